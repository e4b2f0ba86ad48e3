"""
Writing analysis results to rows/summary files.

Output is deterministic: the same results and config give byte-identical
files. Statistics and p-values are printed with 4 decimals, means and
conditional probabilities with 2. Every file opens with a header comment
(CSV) or a ``meta`` object (JSON) recording tool version, config hash and
seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import asdict, is_dataclass

from . import __version__


class OutputError(OSError):
    """Raised when the output directory cannot be written."""


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_line(config: dict, seed=None) -> str:
    return f"# hothand {__version__} config={config_hash(config)} seed={'' if seed is None else seed}"


def fmt4(x):
    return _fmt(x, 4)


def fmt2(x):
    return _fmt(x, 2)


def _fmt(x, digits):
    if x is None:
        return ""
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{digits}f}"
    return "0." + "0" * digits if s == "-0." + "0" * digits else s


def _jsonable(v):
    if is_dataclass(v):
        return _jsonable(asdict(v))
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    if isinstance(v, float):
        return None if not math.isfinite(v) else v
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def render(columns, rows, summary: dict, fmt, config: dict, seed=None):
    """Return (rows_text, summary_text).

    ``rows`` are lists of already formatted strings in ``columns`` order.
    """
    if fmt == "json":
        meta = {"tool": "hothand", "version": __version__,
                "config_hash": config_hash(config), "seed": seed}
        rows_doc = {"meta": meta, "columns": list(columns),
                    "rows": [dict(zip(columns, r)) for r in rows]}
        summ_doc = {"meta": meta, "summary": _jsonable(summary)}
        dump = lambda d: json.dumps(d, indent=2, sort_keys=False) + "\n"
        return dump(rows_doc), dump(summ_doc)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    head = header_line(config, seed) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    sbuf = io.StringIO()
    sw = csv.writer(sbuf, lineterminator="\n")
    sw.writerow(["key", "value"])
    for k, v in _flatten(_jsonable(summary)):
        sw.writerow([k, _scalar(v)])
    return head + buf.getvalue(), head + sbuf.getvalue()


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
            yield key + ".lo", v[0]
            yield key + ".hi", v[1]
        else:
            yield key, v


def _scalar(v):
    if isinstance(v, float):
        return fmt4(v)
    if v is None:
        return ""
    return v


def emit_report(name, columns, rows, summary: dict, out_dir, fmt="csv", config=None, seed=None):
    """Write ``<name>_rows.<ext>`` and ``<name>_summary.<ext>`` into ``out_dir``.

    Returns the two paths.
    """
    config = config or {}
    rows_text, summary_text = render(columns, rows, summary, fmt, config, seed)
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for suffix, text in (("rows", rows_text), ("summary", summary_text)):
            path = os.path.join(out_dir, f"{name}_{suffix}.{fmt}")
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            paths.append(path)
    except OSError as exc:
        raise OutputError(f"cannot write to {out_dir}: {exc}") from exc
    return tuple(paths)


# --------------------------------------------------------------------------
# table shapes

def _with_count(mean, n):
    return f"{fmt2(mean)} ({n})"


def runs_table(rows):
    cols = ["Player", "Makes", "Misses", "Games", "Z", "P-value", "Significant", "BH discovery"]
    return cols, [[r.player_id, r.metrics["makes"], r.metrics["misses"], r.metrics["games"],
                   fmt4(r.statistic), fmt4(r.p_value), int(r.significant), int(r.bh_rejected)]
                  for r in rows]


def free_throw_table(rows):
    cols = ["Player", "P(H2|H1)", "P(H2|M1)", "r", "P-value", "Trips", "Significant", "BH discovery"]
    out = []
    for r in rows:
        m = r.metrics
        out.append([r.player_id, _with_count(m["p_h2_h1"], m["n_h1"]),
                    _with_count(m["p_h2_m1"], m["n_m1"]), fmt4(m["r"]), fmt4(r.p_value),
                    m["trips"], int(r.significant), int(r.bh_rejected)])
    return cols, out


BEHAVIOR_TITLES = {
    "shot_distance": "Avg. Shot Distance",
    "time_between_shots": "Avg. Time Between Shots",
    "dribbles": "Avg. Dribbles",
    "defender_distance": "Avg. Closest Defender Distance",
}


def behavior_table(rows, metric):
    title = BEHAVIOR_TITLES[getattr(metric, "value", metric)]
    cols = ["Player", f"{title} After Make", f"{title} After Miss", "Z", "P-value",
            "Significant", "BH discovery"]
    out = []
    for r in rows:
        m = r.metrics
        out.append([r.player_id, _with_count(m["mean_after_make"], m["n_after_make"]),
                    _with_count(m["mean_after_miss"], m["n_after_miss"]), fmt4(r.statistic),
                    fmt4(r.p_value), int(r.significant), int(r.bh_rejected)])
    return cols, out


def halftime_table(rows):
    cols = ["Window", "Player-games", "Players", "Shots pre", "Shots post", "FGP pre",
            "FGP post", "r", "P-value"]
    return cols, [[r.window.value, r.n_player_games, r.n_players, r.shots_pre, r.shots_post,
                   fmt4(r.fgp_pre), fmt4(r.fgp_post), fmt4(r.r), fmt4(r.p_value)] for r in rows]


def global_table(result):
    cols = ["Player", "Pairs", "Hit-first", "Miss-first", "p_hat_H", "p_hat_M"]
    out = []
    for s in result.pair_stats:
        out.append([s.player_id, s.n_pairs, s.n_hit_first, s.n_miss_first,
                    fmt4(s.p_hat_H) if s.n_hit_first else "", fmt4(s.p_hat_M) if s.n_miss_first else ""])
    return cols, out


def power_table(curve):
    cols = ["delta", "replicate", "seed", "discoveries", "global_T"]
    return cols, [[fmt4(p.delta), p.replicate, p.seed, p.discoveries, fmt4(p.global_T)]
                  for p in curve.points]
