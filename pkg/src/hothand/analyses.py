"""
League-level analyses built from the kernels: runs tests, the pooled
disjoint-pair statistic, free-throw serial correlation, make/miss behaviour
comparisons and the halftime-break correlation.

Every analysis takes ``{player_id: [PlayerGameSequence, ...]}`` (or free-throw
trips) and returns table rows plus a league summary.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels as K
from .ingest import PriorOutcome, filter_min_outcomes, recode_first_shots
from .kernels import Alternative, DegenerateError


class Metric(str, enum.Enum):
    SHOT_DISTANCE = "shot_distance"
    TIME_BETWEEN_SHOTS = "time_between_shots"
    DRIBBLES = "dribbles"
    DEFENDER_DISTANCE = "defender_distance"


# (min_hits, min_misses) applied when the caller does not pass filters
DEFAULT_FILTERS = {
    Metric.SHOT_DISTANCE: (0, 0),
    Metric.TIME_BETWEEN_SHOTS: (0, 0),
    Metric.DRIBBLES: (15, 15),
    Metric.DEFENDER_DISTANCE: (15, 15),
}


class Window(str, enum.Enum):
    LAST3_FIRST3 = "last3_first3"
    LAST4_FIRST4 = "last4_first4"
    LAST5_FIRST5 = "last5_first5"
    LAST6_FIRST6 = "last6_first6"
    ALL_Q2_Q3 = "all_q2_q3"

    @property
    def size(self):
        return None if self is Window.ALL_Q2_Q3 else int(self.value[4])


@dataclass
class PlayerReportRow:
    player_id: str
    metrics: dict
    statistic: float
    p_value: float
    significant_at: float | None = None
    bh_rejected: bool = False

    @property
    def significant(self) -> bool:
        return self.significant_at is not None


@dataclass
class LeagueSummary:
    n_players: int
    n_significant: int
    null_band: tuple
    proportion_ci: tuple
    bh_discoveries: int
    alpha: float = 0.05
    excluded: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass
class GlobalResult:
    test: K.TestResult
    mean_p_hat_H: float
    mean_p_hat_M: float
    n_players: int
    n_excluded: int
    pair_stats: list


@dataclass
class HalftimeRow:
    window: Window
    n_player_games: int
    n_players: int
    shots_pre: int
    shots_post: int
    fgp_pre: float
    fgp_post: float
    r: float
    p_value: float


def _label(rows, alpha):
    """Mark unadjusted significance and BH discoveries in place."""
    pvals = [r.p_value for r in rows]
    rejected = K.benjamini_hochberg(pvals, alpha) if rows else set()
    for i, row in enumerate(rows):
        row.significant_at = alpha if row.p_value <= alpha else None
        row.bh_rejected = i in rejected
    return len(rejected)


def _summary(rows, alpha, excluded, level=0.95, **extra):
    n = len(rows)
    k = sum(r.significant for r in rows)
    disc = sum(r.bh_rejected for r in rows)
    return LeagueSummary(
        n_players=n,
        n_significant=k,
        null_band=K.null_significance_band(n, alpha, level) if n else (0.0, 0.0),
        proportion_ci=K.proportion_ci(k, n, level) if n else (0.0, 0.0),
        bh_discoveries=disc,
        alpha=alpha,
        excluded=excluded,
        extra=extra,
    )


def _by_statistic(rows):
    rows.sort(key=lambda r: (r.statistic, r.player_id))
    return rows


def _game_arrays(games):
    return [g.outcomes if hasattr(g, "outcomes") else np.asarray(g, dtype=bool) for g in games]


# --------------------------------------------------------------------------
# runs

def runs_analysis(sequences: Mapping, alpha=0.05, alternative=Alternative.LESS):
    """Per-player runs test aggregated over games.

    Players whose every game is constant are excluded and counted under
    ``excluded["degenerate"]``.
    """
    rows, degenerate = [], 0
    for player in sorted(sequences):
        games = _game_arrays(sequences[player])
        try:
            res = K.player_runs_test(games, alternative)
        except DegenerateError:
            degenerate += 1
            continue
        n1, n2, n_games = res.n
        rows.append(PlayerReportRow(player, {"makes": n1, "misses": n2, "games": n_games},
                                    res.statistic, res.p_value))
    _label(rows, alpha)
    return _by_statistic(rows), _summary(rows, alpha, {"degenerate": degenerate})


# --------------------------------------------------------------------------
# disjoint pairs

def player_pairs(sequences: Mapping) -> list:
    return [K.player_pair_stats(_game_arrays(sequences[p]), p) for p in sorted(sequences)]


def global_hot_hand(sequences: Mapping) -> GlobalResult:
    """Pooled disjoint-pair statistic plus league mean conditional make rates."""
    stats = player_pairs(sequences)
    test = K.global_T(stats)
    used = [s for s in stats if s.defined]
    return GlobalResult(
        test=test,
        mean_p_hat_H=math.fsum(s.p_hat_H for s in used) / len(used),
        mean_p_hat_M=math.fsum(s.p_hat_M for s in used) / len(used),
        n_players=len(used),
        n_excluded=test.excluded,
        pair_stats=stats,
    )


def global_T_permutation(sequences: Mapping, n_permutations=1000, seed=0):
    """Permutation p-value for the pooled statistic.

    Outcomes are shuffled within each game, which keeps every player's
    per-game make counts fixed, and the statistic is recomputed. Returns
    ``(observed_T, p_value)`` with the add-one correction.
    """
    games = {p: _game_arrays(sequences[p]) for p in sorted(sequences)}
    observed = K.global_T(K.player_pair_stats(g, p) for p, g in games.items()).statistic
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_permutations):
        stats = [K.player_pair_stats([rng.permutation(x) for x in g], p) for p, g in games.items()]
        try:
            t = K.global_T(stats).statistic
        except DegenerateError:
            continue
        hits += t >= observed
    return observed, (hits + 1) / (n_permutations + 1)


# --------------------------------------------------------------------------
# free throws

def free_throw_analysis(trips, alpha=0.05):
    """Serial correlation between first and second attempts of each trip.

    Uses the first two attempts of each trip. A player needs at least three
    trips (the t reference has n - 2 degrees of freedom) and variation in
    both attempts. Rows are ordered by number of trips, most first.
    """
    by_player = defaultdict(list)
    for t in trips:
        by_player[t.player_id].append((bool(t.outcomes[0]), bool(t.outcomes[1])))
    rows = []
    excluded = {"single_trip": 0, "two_trips": 0, "zero_variance": 0}
    for player in sorted(by_player):
        pairs = by_player[player]
        n = len(pairs)
        if n < 2:
            excluded["single_trip"] += 1
            continue
        x = np.array([a for a, _ in pairs], dtype=float)
        y = np.array([b for _, b in pairs], dtype=float)
        try:
            r = K.pearson_r(x, y)
        except DegenerateError:
            excluded["zero_variance"] += 1
            continue
        if n < 3:
            excluded["two_trips"] += 1
            continue
        res = K.corr_test(r, n, Alternative.GREATER)
        hit = x == 1
        metrics = {
            "trips": n,
            "p_h2_h1": float(y[hit].mean()),
            "n_h1": int(hit.sum()),
            "p_h2_m1": float(y[~hit].mean()),
            "n_m1": int((~hit).sum()),
            "r": r,
        }
        rows.append(PlayerReportRow(player, metrics, res.statistic, res.p_value))
    _label(rows, alpha)
    rows.sort(key=lambda r: (-r.metrics["trips"], r.player_id))
    n_multi = len(rows) + excluded["zero_variance"] + excluded["two_trips"]
    return rows, _summary(rows, alpha, excluded, players_with_multiple_trips=n_multi)


# --------------------------------------------------------------------------
# behaviour after a make vs after a miss

def _metric_values(seq, metric):
    """(values, prior outcomes) for shots that have a known prior outcome."""
    evs = seq.events
    if metric is Metric.TIME_BETWEEN_SHOTS:
        t = seq.elapsed_game_time
        vals = np.diff(t)
        priors = [e.prior_outcome for e in evs[1:]]
        return vals, priors
    attr = {
        Metric.SHOT_DISTANCE: "shot_distance",
        Metric.DRIBBLES: "dribbles",
        Metric.DEFENDER_DISTANCE: "defender_distance",
    }[metric]
    vals = np.array([getattr(e, attr) for e in evs], dtype=float)
    return vals, [e.prior_outcome for e in evs]


def split_by_prior(games, metric):
    """Values of ``metric`` after a make and after a miss, pooled over games."""
    after_make, after_miss = [], []
    for seq in games:
        vals, priors = _metric_values(seq, metric)
        for v, p in zip(vals, priors):
            if p is PriorOutcome.MAKE:
                after_make.append(v)
            elif p is PriorOutcome.MISS:
                after_miss.append(v)
    return np.array(after_make, dtype=float), np.array(after_miss, dtype=float)


def behavior_analysis(sequences: Mapping, metric, alpha=0.05, min_hits=None,
                      min_misses=None, min_attempts=0, level=0.95):
    """Two-sample z comparison of a shot feature after makes vs after misses.

    The statistic is (mean after make - mean after miss) over the unpooled
    standard error; p-values are two-sided.
    """
    metric = Metric(metric)
    dh, dm = DEFAULT_FILTERS[metric]
    min_hits = dh if min_hits is None else min_hits
    min_misses = dm if min_misses is None else min_misses
    seqs = recode_first_shots(filter_min_outcomes(sequences, min_hits, min_misses))
    if min_attempts:
        seqs = {p: g for p, g in seqs.items() if sum(len(s) for s in g) >= min_attempts}

    rows = []
    excluded = {"filtered": len(sequences) - len(seqs), "small_group": 0, "zero_variance": 0}
    for player in sorted(seqs):
        make, miss = split_by_prior(seqs[player], metric)
        if make.size < 2 or miss.size < 2:
            excluded["small_group"] += 1
            continue
        m1, m2 = float(make.mean()), float(miss.mean())
        s1, s2 = float(make.std(ddof=1)), float(miss.std(ddof=1))
        try:
            res = K.two_sample_z(m1, s1, make.size, m2, s2, miss.size, Alternative.TWO_SIDED)
            z, p = res.statistic, res.p_value
        except DegenerateError:
            if m1 != m2:
                excluded["zero_variance"] += 1
                continue
            z, p = 0.0, 1.0
        metrics = {"mean_after_make": m1, "n_after_make": int(make.size), "sd_after_make": s1,
                   "mean_after_miss": m2, "n_after_miss": int(miss.size), "sd_after_miss": s2}
        rows.append(PlayerReportRow(player, metrics, z, p))
    _label(rows, alpha)

    n = len(rows)
    higher_make = sum(r.statistic > 0 for r in rows)
    higher_miss = sum(r.statistic < 0 for r in rows)
    sig_make = sum(r.significant and r.statistic > 0 for r in rows)
    sig_miss = sum(r.significant and r.statistic < 0 for r in rows)
    extra = {
        "metric": metric.value,
        "higher_after_make": higher_make,
        "higher_after_miss": higher_miss,
        "no_difference": n - higher_make - higher_miss,
        "significant_higher_after_make": sig_make,
        "significant_higher_after_miss": sig_miss,
    }
    if n:
        extra["ci_higher_after_make"] = K.proportion_ci(sig_make, n, level)
        extra["ci_higher_after_miss"] = K.proportion_ci(sig_miss, n, level)
    return _by_statistic(rows), _summary(rows, alpha, excluded, level, **extra)


# --------------------------------------------------------------------------
# halftime

def _window_shots(seq, window):
    q2 = [e.made for e in seq.events if e.period == 2]
    q3 = [e.made for e in seq.events if e.period == 3]
    need = max(3, window.size or 0)
    if len(q2) < need or len(q3) < need:
        return None
    if window.size is None:
        return q2, q3
    return q2[-window.size:], q3[:window.size]


def halftime_analysis(sequences: Mapping, window=Window.LAST3_FIRST3) -> HalftimeRow:
    """Correlation of a player's pre-half and post-half FG% across player-games.

    A player-game qualifies when it has at least three shots (and at least
    the window size) in both the second and third quarters. The p-value is
    one-sided, testing for a negative correlation.
    """
    window = Window(window)
    pre, post, players = [], [], set()
    made_pre = made_post = n_pre = n_post = 0
    for player in sorted(sequences):
        for seq in sequences[player]:
            got = _window_shots(seq, window)
            if got is None:
                continue
            a, b = got
            players.add(player)
            pre.append(sum(a) / len(a))
            post.append(sum(b) / len(b))
            made_pre += sum(a)
            made_post += sum(b)
            n_pre += len(a)
            n_post += len(b)
    if not pre:
        raise DegenerateError("no qualifying player-games")
    r = K.pearson_r(pre, post)
    p = K.corr_test(r, len(pre), Alternative.LESS).p_value
    return HalftimeRow(window, len(pre), len(players), n_pre, n_post,
                       made_pre / n_pre, made_post / n_post, r, p)
