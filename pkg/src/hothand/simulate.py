"""
Monte Carlo power study for the streak detectors.

Each simulated player keeps their real schedule (attempts per game and
quarter) and season FG%. For every scheduled quarter a shooting probability
is drawn from a three-branch mixture controlled by ``delta``:

    p / (1 - delta)   with probability (1 - delta) / 4
    p                 with probability 1 / 2
    p / (1 + delta)   with probability (1 + delta) / 4

and the quarter's shots are Bernoulli draws at that probability. The first
branch can exceed 1; it is clamped and the clamp is counted.

Random numbers come from Philox streams keyed by
``(master_seed, delta, replicate, player index)``. Inside a player's stream
the quarter draws come first, then one uniform per shot, so any given
(quarter, draw) position is fixed no matter how work is scheduled.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels as K
from .kernels import Alternative, DegenerateError

log = logging.getLogger(__name__)

DEFAULT_DELTAS = tuple(round(0.03 * i, 2) for i in range(21))
DEFAULT_REPLICATES = 10
DEFAULT_THRESHOLD = 22


@dataclass(frozen=True)
class PlayerProfile:
    player_id: str
    season_fg_pct: float
    schedule: tuple  # ((game_id, period, attempts), ...)

    @property
    def n_attempts(self) -> int:
        return sum(k for _, _, k in self.schedule)


@dataclass
class SimulationRun:
    delta: float
    replicate: int
    seed: int
    sequences: list  # per player: list of per-game bool arrays
    clamp_count: int = 0
    quarter_draws: int = 0
    discoveries: int | None = None
    global_T: float | None = None


@dataclass
class PowerPoint:
    delta: float
    replicate: int
    seed: int
    discoveries: int
    global_T: float
    clamp_count: int = 0


@dataclass
class PowerCurve:
    points: list
    threshold_discoveries: float = DEFAULT_THRESHOLD
    alpha: float = 0.05


@dataclass
class DeltaSummary:
    delta: float
    replicates: int
    mean_discoveries: float
    sd_discoveries: float
    mean_T: float
    sd_T: float


@dataclass
class PowerSummary:
    rows: list
    discovery_crossing: float | None
    T_crossing: float | None
    critical_T: float
    threshold_discoveries: float = field(default=DEFAULT_THRESHOLD)


# --------------------------------------------------------------------------
# rosters

def extract_profiles(sequences: Mapping):
    """Season FG% and per-quarter attempt schedule for every player.

    Players who made all or none of their shots cannot be simulated and are
    returned separately.

    Returns
    -------
    profiles : list of PlayerProfile
    excluded : list of str
    """
    if not sequences:
        raise ValueError("no sequences to build profiles from")
    profiles, excluded = [], []
    for player in sorted(sequences):
        made = total = 0
        sched = []
        for seq in sequences[player]:
            counts = defaultdict(int)
            for e in seq.events:
                counts[e.period] += 1
                made += e.made
            total += len(seq.events)
            sched.extend((seq.game_id, q, counts[q]) for q in sorted(counts))
        if total == 0 or made == 0 or made == total:
            excluded.append(player)
            continue
        profiles.append(PlayerProfile(player, made / total, tuple(sched)))
    if excluded:
        log.info("excluded %d players with FG%% of 0 or 1", len(excluded))
    return profiles, excluded


def read_roster(source, delimiter=","):
    """Read a long-format roster: player_id, season_fg_pct, game_id, period, attempts."""
    own = not hasattr(source, "read")
    f = open(source, encoding="utf-8", newline="") if own else source
    try:
        rows = list(csv.DictReader((l for l in f if not l.startswith("#")), delimiter=delimiter))
    finally:
        if own:
            f.close()
    pct, sched, order = {}, defaultdict(list), []
    for row in rows:
        pid = row["player_id"]
        if pid not in pct:
            order.append(pid)
            pct[pid] = float(row["season_fg_pct"])
        sched[pid].append((row["game_id"], int(row["period"]), int(row["attempts"])))
    out = []
    for pid in order:
        if not 0 < pct[pid] < 1:
            raise ValueError(f"season_fg_pct for {pid} must be in (0, 1)")
        out.append(PlayerProfile(pid, pct[pid], tuple(sched[pid])))
    return out


def write_roster(profiles: Sequence[PlayerProfile], stream, delimiter=","):
    w = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    w.writerow(["player_id", "season_fg_pct", "game_id", "period", "attempts"])
    for p in profiles:
        for g, q, k in p.schedule:
            w.writerow([p.player_id, repr(p.season_fg_pct), g, q, k])


def synthetic_roster(n_players, n_games, quarters=4, shots=(1, 5), pct=(0.35, 0.55), seed=0):
    """Random roster for experiments: uniform FG% and uniform shots per quarter."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_players):
        p = float(rng.uniform(*pct))
        k = rng.integers(shots[0], shots[1] + 1, size=(n_games, quarters))
        sched = tuple((f"g{g:04d}", q + 1, int(k[g, q]))
                      for g in range(n_games) for q in range(quarters))
        out.append(PlayerProfile(f"p{i:04d}", p, sched))
    return out


# --------------------------------------------------------------------------
# the mixture

def branch_table(p, delta):
    """(values, weights) of the quarter-probability mixture, before clamping."""
    return ((p / (1 - delta), p, p / (1 + delta)),
            ((1 - delta) / 4, 0.5, (1 + delta) / 4))


def quarter_probability(p, delta, draw):
    """Map one uniform draw in [0, 1) to a quarter shooting probability.

    The branches are laid out on [0, 1) in the order p/(1-delta), p,
    p/(1+delta). Values above 1 are clamped to 1.
    """
    if not 0 <= delta < 1:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    if not 0 < p < 1:
        raise ValueError(f"p must be in (0, 1), got {p}")
    q = np.asarray(draw, dtype=float)
    cut1 = (1 - delta) / 4
    cut2 = cut1 + 0.5
    out = np.where(q < cut1, p / (1 - delta), np.where(q < cut2, p, p / (1 + delta)))
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


def _delta_key(delta):
    return int(np.float64(delta).view(np.uint64))


def _stream(master_seed, delta, replicate, player_index):
    ss = np.random.SeedSequence(master_seed,
                                spawn_key=(_delta_key(delta), replicate, player_index))
    return np.random.Generator(np.random.Philox(ss))


def run_seed(master_seed, delta, replicate) -> int:
    """64-bit identifier of a (delta, replicate) realization, for reporting."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(_delta_key(delta), replicate))
    return int(ss.generate_state(1, np.uint64)[0])


def _simulate_player(profile, delta, rng):
    sched = profile.schedule
    k = np.fromiter((a for _, _, a in sched), dtype=np.int64, count=len(sched))
    u_quarter = rng.random(len(sched))
    prob = quarter_probability(profile.season_fg_pct, delta, u_quarter)
    clamps = int(np.count_nonzero(u_quarter < (1 - delta) / 4)) if profile.season_fg_pct > 1 - delta else 0
    u_shot = rng.random(int(k.sum()))
    made = u_shot < np.repeat(prob, k)
    # split back into games, keeping schedule order
    bounds, start = [], 0
    last = object()
    for (g, _, a) in sched:
        if g != last:
            bounds.append(start)
            last = g
        start += a
    bounds.append(start)
    games = [made[bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1)]
    return games, clamps, len(sched)


def simulate_run(roster: Sequence[PlayerProfile], delta, replicate=0, master_seed=0) -> SimulationRun:
    """Simulate one league realization at ``delta``."""
    if not roster:
        raise ValueError("roster is empty")
    if not 0 <= delta < 1:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    seqs, clamps, draws = [], 0, 0
    for i, prof in enumerate(roster):
        games, c, d = _simulate_player(prof, delta, _stream(master_seed, delta, replicate, i))
        seqs.append(games)
        clamps += c
        draws += d
    if clamps:
        log.debug("delta=%g replicate=%d: %d quarter probabilities clamped", delta, replicate, clamps)
    return SimulationRun(float(delta), int(replicate), run_seed(master_seed, delta, replicate),
                         seqs, clamps, draws)


def detect(run: SimulationRun, alpha=0.05) -> SimulationRun:
    """Fill in BH discoveries over per-player runs tests and the global T."""
    pvals, pairs = [], []
    for i, games in enumerate(run.sequences):
        try:
            pvals.append(K.player_runs_test(games, Alternative.LESS).p_value)
        except DegenerateError:
            pass
        pairs.append(K.player_pair_stats(games, str(i)))
    run.discoveries = len(K.benjamini_hochberg(pvals, alpha))
    try:
        run.global_T = K.global_T(pairs).statistic
    except DegenerateError:
        run.global_T = math.nan
    return run


def _one(args):
    roster, delta, rep, seed, alpha = args
    run = detect(simulate_run(roster, delta, rep, seed), alpha)
    return PowerPoint(run.delta, rep, run.seed, run.discoveries, run.global_T, run.clamp_count)


def sweep(roster, delta_grid=DEFAULT_DELTAS, replicates=DEFAULT_REPLICATES, master_seed=0,
          alpha=0.05, threshold=DEFAULT_THRESHOLD, threads=1) -> PowerCurve:
    """Run every (delta, replicate) cell and collect the detector outputs.

    ``threads`` only changes wall time; the points are identical and in grid
    order for any value (0 picks the CPU count).
    """
    grid = [float(d) for d in delta_grid]
    if not grid:
        raise ValueError("delta grid is empty")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    roster = list(roster)
    jobs = [(roster, d, r, master_seed, alpha) for d in grid for r in range(replicates)]
    if threads == 0:
        import os
        threads = os.cpu_count() or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            points = list(ex.map(_one, jobs))
    else:
        points = [_one(j) for j in jobs]
    return PowerCurve(points, threshold, alpha)


def power_summary(curve: PowerCurve, critical_T=None) -> PowerSummary:
    """Per-delta means and spreads, and the first delta crossing each bar.

    The discovery bar is ``curve.threshold_discoveries``; the T bar is the
    one-sided normal critical value at ``curve.alpha`` unless given.
    """
    if not curve.points:
        raise ValueError("empty power curve")
    if critical_T is None:
        from scipy import stats
        critical_T = float(stats.norm.isf(curve.alpha))
    by_delta = defaultdict(list)
    for pt in curve.points:
        by_delta[pt.delta].append(pt)
    rows = []
    for d in sorted(by_delta):
        pts = sorted(by_delta[d], key=lambda p: p.replicate)
        disc = np.array([p.discoveries for p in pts], dtype=float)
        t = np.array([p.global_T for p in pts], dtype=float)
        ddof = 1 if len(pts) > 1 else 0
        rows.append(DeltaSummary(d, len(pts), float(disc.mean()), float(disc.std(ddof=ddof)),
                                 float(t.mean()), float(t.std(ddof=ddof))))
    disc_cross = next((r.delta for r in rows if r.mean_discoveries > curve.threshold_discoveries), None)
    t_cross = next((r.delta for r in rows if r.mean_T > critical_T), None)
    return PowerSummary(rows, disc_cross, t_cross, critical_T, curve.threshold_discoveries)
