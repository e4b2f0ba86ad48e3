"""
Command-line front end.

    python -m hothand runs --shots shots.csv --alpha 0.05
    python -m hothand behavior --shots shots.csv --metric dribbles
    python -m hothand simulate --shots shots.csv --deltas 0:0.03:0.6 --reps 10 --seed 7

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import analyses as A
from . import ingest, report
from . import simulate as S
from .kernels import Alternative, DegenerateError

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

COMMANDS = ("runs", "global", "freethrow", "behavior", "halftime", "simulate", "report")

DEFAULTS = {
    "alpha": 0.05,
    "alternative": "less",
    "min_hits": None,
    "min_misses": None,
    "min_attempts": 0,
    "metric": "all",
    "window": "all",
    "deltas": "0:0.03:0.6",
    "reps": S.DEFAULT_REPLICATES,
    "seed": 0,
    "threads": 1,
    "threshold": S.DEFAULT_THRESHOLD,
    "permutations": 0,
    "out": "out",
    "format": "csv",
    "delimiter": ",",
    "shots": None,
    "freethrows": None,
    "roster": None,
    "schema_map": None,
    "ft_schema_map": None,
}


_METRIC_ALIASES = {"distance": "shot_distance", "time": "time_between_shots",
                   "frequency": "time_between_shots", "defender": "defender_distance"}


_TYPES = {"alpha": float, "threshold": float, "min_hits": int, "min_misses": int,
          "min_attempts": int, "reps": int, "seed": int, "threads": int, "permutations": int}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_help()}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--shots", help="shot-log file")
    common.add_argument("--freethrows", help="free-throw file")
    common.add_argument("--roster", help="simulation roster file")
    common.add_argument("--schema-map", dest="schema_map", help="column mapping for the shot log")
    common.add_argument("--ft-schema-map", dest="ft_schema_map", help="column mapping for free throws")
    common.add_argument("--delimiter")
    common.add_argument("--alpha", type=float)
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker threads, 0 = auto")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="hothand", description="Streak detection in make/miss sequences.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("runs", parents=[common], help="per-player runs tests").add_argument(
        "--alternative", choices=[a.value for a in Alternative])
    g = sub.add_parser("global", parents=[common], help="pooled disjoint-pair statistic")
    g.add_argument("--permutations", type=int, help="within-game shuffles for a permutation p-value")
    sub.add_parser("freethrow", parents=[common], help="free-throw serial correlation")
    b = sub.add_parser("behavior", parents=[common], help="after-make vs after-miss comparisons")
    b.add_argument("--metric", choices=["all"] + [m.value for m in A.Metric] + list(_METRIC_ALIASES))
    b.add_argument("--min-hits", dest="min_hits", type=int)
    b.add_argument("--min-misses", dest="min_misses", type=int)
    b.add_argument("--min-attempts", dest="min_attempts", type=int)
    h = sub.add_parser("halftime", parents=[common], help="pre/post halftime correlation")
    h.add_argument("--window", choices=["all"] + [w.value for w in A.Window])
    s = sub.add_parser("simulate", parents=[common], help="power simulation over delta")
    s.add_argument("--deltas", help="start:step:stop (inclusive) or comma list")
    s.add_argument("--reps", type=int)
    s.add_argument("--threshold", type=float, help="significant discovery count")
    r = sub.add_parser("report", parents=[common], help="every analysis the inputs allow")
    r.add_argument("--min-hits", dest="min_hits", type=int)
    r.add_argument("--min-misses", dest="min_misses", type=int)
    r.add_argument("--min-attempts", dest="min_attempts", type=int)
    r.add_argument("--permutations", type=int)
    return p


def read_config(path) -> dict:
    try:
        raw = ingest.read_schema_map(path)
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        try:
            out[key] = _TYPES.get(key, str)(v)
        except ValueError:
            raise UsageError(f"bad value for {k}: {v!r}") from None
    return out


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if not 0 < cfg["alpha"] < 1:
        raise UsageError("alpha must lie in (0, 1)")
    if cfg["reps"] < 1:
        raise UsageError("reps must be >= 1")
    if cfg["threads"] < 0:
        raise UsageError("threads must be >= 0")
    return cfg


def parse_deltas(spec: str):
    try:
        if ":" in spec:
            start, step, stop = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            grid = [round(start + i * step, 10) for i in range(n)]
        else:
            grid = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad delta grid {spec!r}") from None
    if not grid or any(not 0 <= d < 1 for d in grid):
        raise UsageError("deltas must lie in [0, 1)")
    return grid


# --------------------------------------------------------------------------

def _require(cfg, key, flag):
    path = cfg[key]
    if not path:
        raise UsageError(f"{flag} is required")
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    return path


def _schema(cfg, key):
    path = cfg[key]
    if not path:
        return None
    if not os.path.exists(path):
        raise DataError(f"schema map not found: {path}")
    return ingest.read_schema_map(path)


def _shots(cfg):
    path = _require(cfg, "shots", "--shots")
    seqs, errors = ingest.load_shots(path, _schema(cfg, "schema_map"), cfg["delimiter"])
    return seqs, errors


def _config_for_hash(cfg, command):
    return {"command": command, **{k: v for k, v in cfg.items() if k not in ("threads", "out")}}


def _emit(cfg, command, name, table, summary, seed=None):
    cols, rows = table
    return report.emit_report(name, cols, rows, summary, cfg["out"], cfg["format"],
                              _config_for_hash(cfg, command), seed)


def _league(summary):
    return {
        "n_players": summary.n_players,
        "n_significant": summary.n_significant,
        "alpha": summary.alpha,
        "null_band": summary.null_band,
        "proportion_ci": summary.proportion_ci,
        "bh_discoveries": summary.bh_discoveries,
        "excluded": summary.excluded,
        **summary.extra,
    }


def do_runs(cfg, seqs, command="runs"):
    rows, summ = A.runs_analysis(seqs, cfg["alpha"], cfg["alternative"])
    _emit(cfg, command, "runs", report.runs_table(rows), _league(summ))
    lo, hi = summ.null_band
    return (f"Runs test: {summ.n_significant} of {summ.n_players} players significant at "
            f"alpha={cfg['alpha']} (null band {lo:.2f}-{hi:.2f}); "
            f"{summ.bh_discoveries} BH discoveries.")


def do_global(cfg, seqs, command="global"):
    res = A.global_hot_hand(seqs)
    summary = {"T": res.test.statistic, "p_value_normal": res.test.p_value,
               "p_value_approximate": True, "mean_p_hat_H": res.mean_p_hat_H,
               "mean_p_hat_M": res.mean_p_hat_M, "n_players": res.n_players,
               "n_excluded": res.n_excluded}
    if cfg["permutations"]:
        _, p = A.global_T_permutation(seqs, cfg["permutations"], cfg["seed"])
        summary["p_value_permutation"] = p
    _emit(cfg, command, "global", report.global_table(res), summary,
          cfg["seed"] if cfg["permutations"] else None)
    return (f"Global T = {res.test.statistic:.4f} over {res.n_players} players "
            f"(one-sided p = {res.test.p_value:.4f}, normal reference); mean p_hat_H = "
            f"{res.mean_p_hat_H:.4f}, mean p_hat_M = {res.mean_p_hat_M:.4f}.")


def do_freethrow(cfg, command="freethrow"):
    path = _require(cfg, "freethrows", "--freethrows")
    trips, errors = ingest.parse_free_throws(path, _schema(cfg, "ft_schema_map"), cfg["delimiter"])
    rows, summ = A.free_throw_analysis(trips, cfg["alpha"])
    league = _league(summ)
    league.update(trips=len(trips), attempts=sum(t.trip_size for t in trips), row_errors=len(errors))
    _emit(cfg, command, "freethrow", report.free_throw_table(rows), league)
    return (f"Free throws: {summ.n_significant} of {summ.n_players} players with significant "
            f"positive serial correlation; {summ.bh_discoveries} BH discoveries "
            f"({len(trips)} trips, {league['attempts']} attempts).")


def _metrics(cfg):
    m = cfg["metric"]
    if m == "all":
        return list(A.Metric)
    return [A.Metric(_METRIC_ALIASES.get(m, m))]


def do_behavior(cfg, seqs, command="behavior"):
    parts = []
    for metric in _metrics(cfg):
        rows, summ = A.behavior_analysis(seqs, metric, cfg["alpha"], cfg["min_hits"],
                                         cfg["min_misses"], cfg["min_attempts"])
        _emit(cfg, command, f"behavior_{metric.value}", report.behavior_table(rows, metric),
              _league(summ))
        parts.append(f"{metric.value}: {summ.n_significant}/{summ.n_players} significant, "
                     f"{summ.bh_discoveries} BH discoveries")
    return "Behaviour after make vs miss - " + "; ".join(parts) + "."


def do_halftime(cfg, seqs, command="halftime"):
    windows = list(A.Window) if cfg["window"] == "all" else [A.Window(cfg["window"])]
    rows = []
    for w in windows:
        try:
            rows.append(A.halftime_analysis(seqs, w))
        except DegenerateError:
            pass
    summary = {"windows": len(windows), "windows_with_data": len(rows)}
    _emit(cfg, command, "halftime", report.halftime_table(rows), summary)
    if not rows:
        return "Halftime: no qualifying player-games."
    first = rows[0]
    return (f"Halftime ({first.window.value}): {first.n_player_games} player-games, FGP "
            f"{first.fgp_pre:.4f} -> {first.fgp_post:.4f}, r = {first.r:.4f}, p = {first.p_value:.4f}.")


def do_simulate(cfg, command="simulate"):
    if cfg["roster"]:
        path = _require(cfg, "roster", "--roster")
        roster = S.read_roster(path, cfg["delimiter"])
    else:
        seqs, _ = _shots(cfg)
        roster, _ = S.extract_profiles(seqs)
    grid = parse_deltas(cfg["deltas"])
    curve = S.sweep(roster, grid, cfg["reps"], cfg["seed"], cfg["alpha"], cfg["threshold"],
                    cfg["threads"])
    ps = S.power_summary(curve)
    summary = {
        "n_players": len(roster),
        "simulations": len(curve.points),
        "threshold_discoveries": curve.threshold_discoveries,
        "critical_T": ps.critical_T,
        "discovery_crossing_delta": ps.discovery_crossing,
        "T_crossing_delta": ps.T_crossing,
        "clamped_quarters": sum(p.clamp_count for p in curve.points),
        "per_delta": {report.fmt4(r.delta): {"mean_discoveries": r.mean_discoveries,
                                             "sd_discoveries": r.sd_discoveries,
                                             "mean_T": r.mean_T, "sd_T": r.sd_T}
                      for r in ps.rows},
    }
    _emit(cfg, command, "power_curve", report.power_table(curve), summary, cfg["seed"])
    fmt = lambda d: "none" if d is None else f"{d:g}"
    return (f"Simulated {len(curve.points)} leagues of {len(roster)} players; mean discoveries "
            f"first exceed {curve.threshold_discoveries:g} at delta={fmt(ps.discovery_crossing)}, "
            f"mean T first exceeds {ps.critical_T:.3f} at delta={fmt(ps.T_crossing)}.")


def do_report(cfg):
    if not cfg["shots"] and not cfg["freethrows"]:
        raise UsageError("report needs --shots and/or --freethrows")
    lines = []
    if cfg["shots"]:
        seqs, _ = _shots(cfg)
        lines += [do_runs(cfg, seqs, "report"), do_global(cfg, seqs, "report"),
                  do_behavior(cfg, seqs, "report"), do_halftime(cfg, seqs, "report")]
    if cfg["freethrows"]:
        lines.append(do_freethrow(cfg, "report"))
    return " ".join(lines)


def dispatch(cfg, command):
    if command == "freethrow":
        return do_freethrow(cfg)
    if command == "simulate":
        return do_simulate(cfg)
    if command == "report":
        return do_report(cfg)
    seqs, _ = _shots(cfg)
    return {"runs": do_runs, "global": do_global, "behavior": do_behavior,
            "halftime": do_halftime}[command](cfg, seqs)


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        cfg = resolve_config(args)
        text = dispatch(cfg, args.command)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DataError, report.OutputError, ingest.SchemaError, DegenerateError,
            FileNotFoundError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=stderr)
        return EXIT_DATA
    print(text, file=stdout)
    return EXIT_OK


def main():
    sys.exit(run_command())
