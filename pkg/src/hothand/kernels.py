"""
Statistical primitives for streak detection in binary make/miss sequences.

Everything in here is a pure function of its arguments. Sequences are
accepted as anything ``np.asarray`` can turn into a 1d boolean/0-1 array.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import stats


class Alternative(str, enum.Enum):
    GREATER = "greater"
    LESS = "less"
    TWO_SIDED = "two-sided"


class Method(str, enum.Enum):
    RUNS_NORMAL = "runs-normal"
    RUNS_EXACT = "runs-exact"
    RUNS_AGGREGATE = "runs-aggregate"
    GLOBAL_T = "global-T"
    CORRELATION_T = "correlation-t"
    TWO_SAMPLE_Z = "two-sample-z"


class DegenerateError(ValueError):
    """Raised when a statistic has zero variance or an empty support."""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    alternative: Alternative
    n: tuple
    method: Method
    approximate: bool = False
    excluded: int = 0

    __test__ = False  # keep pytest from collecting this


@dataclass(frozen=True)
class RunsStats:
    n1: int
    n2: int
    runs: int
    expected_runs: float
    variance_runs: float

    @classmethod
    def from_counts(cls, n1, n2, runs):
        mean, var = runs_moments(n1, n2)
        return cls(int(n1), int(n2), int(runs), mean, var)

    @classmethod
    def from_outcomes(cls, outcomes):
        x = np.asarray(outcomes, dtype=bool)
        n1 = int(x.sum())
        return cls.from_counts(n1, x.size - n1, runs_count(x))


@dataclass(frozen=True)
class PairStats:
    player_id: str
    n_pairs: int
    n_hit_first: int
    n_miss_first: int
    n_hit_hit: int
    n_miss_hit: int

    @property
    def p_hat_H(self) -> float:
        """P(make | first shot made); nan when no pair starts with a make."""
        return self.n_hit_hit / self.n_hit_first if self.n_hit_first else math.nan

    @property
    def p_hat_M(self) -> float:
        return self.n_miss_hit / self.n_miss_first if self.n_miss_first else math.nan

    @property
    def defined(self) -> bool:
        return self.n_hit_first > 0 and self.n_miss_first > 0


# --------------------------------------------------------------------------
# p-value helpers

def _normal_pvalue(z, alternative):
    alternative = Alternative(alternative)
    if alternative is Alternative.GREATER:
        return float(stats.norm.sf(z))
    if alternative is Alternative.LESS:
        return float(stats.norm.cdf(z))
    return float(min(1.0, 2 * min(stats.norm.cdf(z), stats.norm.sf(z))))


def _z_quantile(level):
    return float(stats.norm.ppf(0.5 + level / 2))


# --------------------------------------------------------------------------
# runs

def runs_count(outcomes) -> int:
    """Number of maximal constant blocks in ``outcomes`` (0 when empty)."""
    x = np.asarray(outcomes, dtype=bool)
    if x.size == 0:
        return 0
    return int(np.count_nonzero(x[1:] != x[:-1])) + 1


def runs_moments(n1, n2):
    """Null mean and variance of the number of runs given n1 makes, n2 misses."""
    n = n1 + n2
    if n == 0:
        return 0.0, 0.0
    prod = 2.0 * n1 * n2
    mean = prod / n + 1
    if n == 1:
        return mean, 0.0
    var = prod * (prod - n) / (n * n * (n - 1))
    return mean, max(var, 0.0)


@lru_cache(maxsize=4096)
def runs_exact_counts(n1: int, n2: int) -> dict:
    """Number of arrangements of n1 makes and n2 misses with exactly R runs.

    Returns ``{R: count}``; the counts sum to ``comb(n1 + n2, n1)``.
    """
    if n1 == 0 or n2 == 0:
        return {1 if n1 + n2 else 0: 1}
    out = {}
    for r in range(2, n1 + n2 + 1):
        k, odd = divmod(r, 2)
        if odd:
            c = (math.comb(n1 - 1, k - 1) * math.comb(n2 - 1, k)
                 + math.comb(n1 - 1, k) * math.comb(n2 - 1, k - 1))
        else:
            c = 2 * math.comb(n1 - 1, k - 1) * math.comb(n2 - 1, k - 1)
        if c:
            out[r] = c
    return out


def runs_exact_pvalue(n1, n2, runs, alternative=Alternative.LESS) -> Fraction:
    """Exact permutation p-value of the observed run count, as a Fraction."""
    alternative = Alternative(alternative)
    counts = runs_exact_counts(int(n1), int(n2))
    total = math.comb(n1 + n2, n1)
    lower = Fraction(sum(c for r, c in counts.items() if r <= runs), total)
    upper = Fraction(sum(c for r, c in counts.items() if r >= runs), total)
    if alternative is Alternative.LESS:
        return lower
    if alternative is Alternative.GREATER:
        return upper
    return min(Fraction(1), 2 * min(lower, upper))


EXACT_RUNS_LIMIT = 20


def runs_test(n1, n2, runs, alternative=Alternative.LESS, exact=None) -> TestResult:
    """Wald-Wolfowitz runs test.

    The z-score always uses the closed-form null moments. The p-value is exact
    (full permutation distribution) when ``exact`` is true, or when it is None
    and ``n1 + n2 <= 20``; otherwise it comes from the normal approximation.
    ``LESS`` (fewer runs than expected) is the streaky direction.
    """
    alternative = Alternative(alternative)
    if n1 < 1 or n2 < 1:
        raise DegenerateError(f"runs test needs both outcomes, got n1={n1}, n2={n2}")
    mean, var = runs_moments(n1, n2)
    if var <= 0:
        raise DegenerateError(f"zero variance for n1={n1}, n2={n2}")
    z = (runs - mean) / math.sqrt(var)
    if exact is None:
        exact = n1 + n2 <= EXACT_RUNS_LIMIT
    if exact:
        p = float(runs_exact_pvalue(n1, n2, runs, alternative))
        method = Method.RUNS_EXACT
    else:
        p = _normal_pvalue(z, alternative)
        method = Method.RUNS_NORMAL
    return TestResult(z, p, alternative, (int(n1), int(n2)), method)


def aggregate_runs_test(per_game: Iterable[RunsStats], alternative=Alternative.LESS) -> TestResult:
    """Combine independent games by summing runs and their null moments."""
    alternative = Alternative(alternative)
    used = [g for g in per_game if g.variance_runs > 0]
    if not used:
        raise DegenerateError("every game is degenerate")
    r = sum(g.runs for g in used)
    e = sum(g.expected_runs for g in used)
    v = sum(g.variance_runs for g in used)
    z = (r - e) / math.sqrt(v)
    n1 = sum(g.n1 for g in used)
    n2 = sum(g.n2 for g in used)
    return TestResult(z, _normal_pvalue(z, alternative), alternative,
                      (n1, n2, len(used)), Method.RUNS_AGGREGATE)


def game_runs_arrays(games: Sequence):
    """Vectorised per-game (n1, n2, runs) for a list of outcome arrays."""
    lengths = np.fromiter((len(g) for g in games), dtype=np.int64, count=len(games))
    keep = lengths > 0
    if not keep.all():
        games = [g for g, k in zip(games, keep) if k]
        lengths = lengths[keep]
    if not len(games):
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    x = np.concatenate([np.asarray(g, dtype=bool) for g in games])
    gid = np.repeat(np.arange(len(games)), lengths)
    n1 = np.bincount(gid, weights=x, minlength=len(games)).astype(np.int64)
    switch = (x[1:] != x[:-1]) & (gid[1:] == gid[:-1])
    runs = 1 + np.bincount(gid[1:][switch], minlength=len(games))
    return n1, lengths - n1, runs


def player_runs_test(games: Sequence, alternative=Alternative.LESS) -> TestResult:
    """Per-game runs statistics for one player, aggregated across games."""
    n1, n2, runs = game_runs_arrays(games)
    n1, n2 = n1.astype(float), n2.astype(float)
    n = n1 + n2
    prod = 2.0 * n1 * n2
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = prod / n + 1
        var = prod * (prod - n) / (n * n * (n - 1))
    ok = var > 0
    if not ok.any():
        raise DegenerateError("every game is degenerate")
    n1, n2, runs, mean, var = n1[ok], n2[ok], runs[ok], mean[ok], var[ok]
    z = (runs.sum() - mean.sum()) / math.sqrt(var.sum())
    return TestResult(float(z), _normal_pvalue(z, alternative), Alternative(alternative),
                      (int(n1.sum()), int(n2.sum()), int(ok.sum())), Method.RUNS_AGGREGATE)


# --------------------------------------------------------------------------
# disjoint pairs and the global statistic

def disjoint_pairs(outcomes) -> list:
    """(x1, x2), (x3, x4), ... ; a trailing odd shot is dropped."""
    x = [bool(v) for v in outcomes]
    return [(x[i], x[i + 1]) for i in range(0, len(x) - 1, 2)]


def pair_stats(pairs_by_game, player_id="") -> PairStats:
    """Conditional make counts over the disjoint pairs of one player.

    ``pairs_by_game`` is an iterable of per-game pair lists, or a flat list
    of pairs.
    """
    hh = hm = mh = mm = 0
    for item in pairs_by_game:
        group = [item] if _is_pair(item) else item
        for a, b in group:
            if a:
                hh += bool(b)
                hm += not b
            else:
                mh += bool(b)
                mm += not b
    return PairStats(player_id, hh + hm + mh + mm, hh + hm, mh + mm, hh, mh)


def _is_pair(item):
    return (isinstance(item, tuple) and len(item) == 2
            and all(isinstance(v, (bool, np.bool_, int, np.integer)) for v in item))


def player_pair_stats(games: Sequence, player_id="") -> PairStats:
    """Vectorised ``pair_stats`` over disjoint pairs formed within each game."""
    firsts, seconds = [], []
    for g in games:
        x = np.asarray(g, dtype=bool)
        m = (x.size // 2) * 2
        firsts.append(x[0:m:2])
        seconds.append(x[1:m:2])
    if not firsts:
        return PairStats(player_id, 0, 0, 0, 0, 0)
    a = np.concatenate(firsts)
    b = np.concatenate(seconds)
    n_hit_first = int(a.sum())
    hh = int((a & b).sum())
    mh = int((~a & b).sum())
    return PairStats(player_id, int(a.size), n_hit_first, int(a.size) - n_hit_first, hh, mh)


def global_T(pair_stats_list: Iterable[PairStats]) -> TestResult:
    """Pooled statistic sum(n_i (pH_i - pM_i)) / sqrt(sum n_i).

    Players with either conditional proportion undefined are dropped and
    counted in ``excluded``. The one-sided GREATER p-value uses a standard
    normal reference and is flagged approximate.
    """
    used, excluded = [], 0
    for s in pair_stats_list:
        if s.defined:
            used.append(s)
        else:
            excluded += 1
    if not used:
        raise DegenerateError("no player has both conditional proportions defined")
    n = np.array([s.n_pairs for s in used], dtype=float)
    d = np.array([s.p_hat_H - s.p_hat_M for s in used])
    # order-independent sum
    t = math.fsum(n * d) / math.sqrt(math.fsum(n))
    return TestResult(t, _normal_pvalue(t, Alternative.GREATER), Alternative.GREATER,
                      (len(used),), Method.GLOBAL_T, approximate=True, excluded=excluded)


# --------------------------------------------------------------------------
# correlation

def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1d and of equal length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateError("correlation undefined for a constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def corr_test(r, n, alternative=Alternative.GREATER) -> TestResult:
    """t = r sqrt((n-2)/(1-r^2)) against Student-t with n-2 df.

    ``|r| == 1`` gives an infinite statistic and a p-value of 0 or 1.
    """
    alternative = Alternative(alternative)
    if n < 3:
        raise ValueError(f"correlation test needs n >= 3, got {n}")
    if abs(r) >= 1:
        t = math.copysign(math.inf, r)
    else:
        t = r * math.sqrt((n - 2) / (1 - r * r))
    df = n - 2
    if alternative is Alternative.GREATER:
        p = float(stats.t.sf(t, df))
    elif alternative is Alternative.LESS:
        p = float(stats.t.cdf(t, df))
    else:
        p = float(min(1.0, 2 * stats.t.sf(abs(t), df)))
    return TestResult(t, p, alternative, (int(n),), Method.CORRELATION_T)


# --------------------------------------------------------------------------
# means and proportions

def two_sample_z(mean1, sd1, n1, mean2, sd2, n2, alternative=Alternative.TWO_SIDED) -> TestResult:
    """Unpooled two-sample z test of mean1 - mean2."""
    if n1 < 2 or n2 < 2:
        raise ValueError(f"each sample needs n >= 2, got {n1} and {n2}")
    if sd1 < 0 or sd2 < 0:
        raise ValueError("standard deviations must be non-negative")
    se2 = sd1 * sd1 / n1 + sd2 * sd2 / n2
    if se2 == 0:
        raise DegenerateError("both samples have zero variance")
    z = (mean1 - mean2) / math.sqrt(se2)
    return TestResult(z, _normal_pvalue(z, alternative), Alternative(alternative),
                      (int(n1), int(n2)), Method.TWO_SAMPLE_Z)


def proportion_ci(k, n, level=0.95, exact=False):
    """Wald interval for k/n clipped to [0, 1]; Clopper-Pearson if ``exact``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= k <= n:
        raise ValueError("k must lie in [0, n]")
    if exact:
        a = 1 - level
        lo = stats.beta.ppf(a / 2, k, n - k + 1) if k > 0 else 0.0
        hi = stats.beta.isf(a / 2, k + 1, n - k) if k < n else 1.0
        return float(lo), float(hi)
    p = k / n
    half = _z_quantile(level) * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def null_significance_band(n_tests, alpha=0.05, level=0.95, exact=False):
    """Range of significant-test counts expected by chance among ``n_tests``."""
    if n_tests < 1:
        raise ValueError("n_tests must be positive")
    if exact:
        a = 1 - level
        return (float(stats.binom.ppf(a / 2, n_tests, alpha)),
                float(stats.binom.isf(a / 2, n_tests, alpha)))
    mean = n_tests * alpha
    half = _z_quantile(level) * math.sqrt(n_tests * alpha * (1 - alpha))
    return mean - half, mean + half


def benjamini_hochberg(p_values, alpha=0.05) -> set:
    """Indices rejected by the Benjamini-Hochberg step-up procedure."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    if m == 0:
        return set()
    if np.any((p < 0) | (p > 1) | np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    below = p[order] <= alpha * np.arange(1, m + 1) / m
    if not below.any():
        return set()
    k = int(np.nonzero(below)[0][-1]) + 1
    cutoff = p[order[k - 1]]
    # anything tied with the boundary value goes too
    return {int(i) for i in np.nonzero(p <= cutoff)[0]}
