import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hothand import kernels as K
from hothand.kernels import Alternative, DegenerateError


# --------------------------------------------------------------------------
# independent oracles

def brute_runs_distribution(n1, n2):
    """{R: count} by listing every placement of the makes."""
    n = n1 + n2
    out = {}
    for makes in itertools.combinations(range(n), n1):
        x = [False] * n
        for i in makes:
            x[i] = True
        r = 1 + sum(x[i] != x[i - 1] for i in range(1, n))
        out[r] = out.get(r, 0) + 1
    return out


def normal_cdf(z):
    return 0.5 * (1 + math.erf(z / math.sqrt(2)))


def student_t_sf(t, df):
    c = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))
    val, _ = integrate.quad(lambda u: c * (1 + u * u / df) ** (-(df + 1) / 2), t, math.inf)
    return val


def brute_bh(p, alpha):
    m = len(p)
    srt = sorted(p)
    best = 0
    for k in range(1, m + 1):
        if srt[k - 1] <= k * alpha / m:
            best = k
    if best == 0:
        return set()
    cut = srt[best - 1]
    return {i for i, v in enumerate(p) if v <= cut}


# --------------------------------------------------------------------------
# runs

@pytest.mark.parametrize("seq,expected", [
    ([1, 1, 0, 0, 1], 3),
    ([1, 1, 1], 1),
    ([], 0),
    ([0], 1),
    ([1, 0, 1, 0], 4),
])
def test_runs_count(seq, expected):
    assert K.runs_count(seq) == expected


def test_runs_test_small_example():
    mean, var = K.runs_moments(3, 2)
    assert mean == pytest.approx(3.4)
    assert var == pytest.approx(0.84)
    res = K.runs_test(3, 2, 3)
    assert res.statistic == pytest.approx(-0.4364, abs=1e-4)
    # the exact p-value agrees with enumerating all 10 arrangements
    d = brute_runs_distribution(3, 2)
    assert sum(d.values()) == 10
    assert res.p_value == pytest.approx(sum(c for r, c in d.items() if r <= 3) / 10)


def test_runs_test_degenerate():
    with pytest.raises(DegenerateError):
        K.runs_test(1, 1, 2)
    with pytest.raises(DegenerateError):
        K.runs_test(0, 5, 1)


def test_runs_test_streaky_sequence_is_significant():
    res = K.runs_test(5, 5, 2)
    assert res.statistic < 0
    assert res.method is K.Method.RUNS_EXACT
    d = brute_runs_distribution(5, 5)
    assert res.p_value == pytest.approx(d[2] / math.comb(10, 5))
    assert res.p_value < 0.05


@pytest.mark.parametrize("n1,n2", [(a, b) for a in range(0, 9) for b in range(0, 9) if 1 <= a + b <= 12])
def test_runs_moments_match_enumeration(n1, n2):
    d = brute_runs_distribution(n1, n2)
    total = sum(d.values())
    mean = sum(r * c for r, c in d.items()) / total
    var = sum((r - mean) ** 2 * c for r, c in d.items()) / total
    m, v = K.runs_moments(n1, n2)
    assert m == pytest.approx(mean, abs=1e-9)
    assert v == pytest.approx(var, abs=1e-9)
    assert K.runs_exact_counts(n1, n2) == d


def test_normal_pvalue_large_sample():
    res = K.runs_test(30, 30, 25, Alternative.LESS)
    assert res.method is K.Method.RUNS_NORMAL
    assert res.p_value == pytest.approx(normal_cdf(res.statistic), abs=1e-12)


def test_two_sided_is_twice_min_tail():
    for r in range(2, 11):
        two = K.runs_exact_pvalue(5, 5, r, Alternative.TWO_SIDED)
        lo = K.runs_exact_pvalue(5, 5, r, Alternative.LESS)
        hi = K.runs_exact_pvalue(5, 5, r, Alternative.GREATER)
        assert two == min(Fraction(1), 2 * min(lo, hi))


def test_aggregate_single_game_matches_runs_test():
    g = K.RunsStats.from_outcomes([1, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0])
    agg = K.aggregate_runs_test([g])
    single = K.runs_test(g.n1, g.n2, g.runs, exact=False)
    assert agg.statistic == pytest.approx(single.statistic)
    assert agg.p_value == pytest.approx(single.p_value)


def test_aggregate_two_identical_games():
    g = K.RunsStats.from_outcomes([1, 1, 0, 0, 1])
    d = g.runs - g.expected_runs
    agg = K.aggregate_runs_test([g, g])
    assert agg.statistic == pytest.approx(2 * d / math.sqrt(2 * g.variance_runs))


def test_aggregate_skips_degenerate_games():
    good = K.RunsStats.from_outcomes([1, 0, 0, 1])
    flat = K.RunsStats.from_outcomes([1, 1, 1])
    assert K.aggregate_runs_test([good, flat]).statistic == pytest.approx(
        K.aggregate_runs_test([good]).statistic)
    with pytest.raises(DegenerateError):
        K.aggregate_runs_test([flat])


def test_player_runs_test_matches_aggregate():
    rng = np.random.default_rng(3)
    games = [rng.random(rng.integers(0, 12)) < 0.45 for _ in range(30)]
    fast = K.player_runs_test(games)
    slow = K.aggregate_runs_test([K.RunsStats.from_outcomes(g) for g in games if len(g)])
    assert fast.statistic == pytest.approx(slow.statistic, rel=1e-12)
    assert fast.n == slow.n


# --------------------------------------------------------------------------
# pairs and the global statistic

H, M = True, False


def test_disjoint_pairs():
    assert K.disjoint_pairs([H, M, M, H, H]) == [(H, M), (M, H)]
    assert K.disjoint_pairs([H, H, M, M]) == [(H, H), (M, M)]
    assert K.disjoint_pairs([]) == []


@given(st.lists(st.booleans(), max_size=60))
def test_disjoint_pairs_cover_prefix(x):
    pairs = K.disjoint_pairs(x)
    assert len(pairs) == len(x) // 2
    flat = [v for p in pairs for v in p]
    assert flat == x[: 2 * (len(x) // 2)]


def test_pair_stats():
    s = K.pair_stats([(H, M), (M, H)])
    assert (s.p_hat_H, s.n_hit_first, s.p_hat_M, s.n_miss_first) == (0, 1, 1, 1)
    s = K.pair_stats([[(H, H)], [(H, H), (H, H)]])
    assert s.p_hat_H == 1 and math.isnan(s.p_hat_M) and not s.defined


@given(st.lists(st.lists(st.booleans(), max_size=15), max_size=8))
def test_pair_stats_conservation_and_vectorised_agree(games):
    s = K.pair_stats([K.disjoint_pairs(g) for g in games])
    v = K.player_pair_stats([np.array(g, dtype=bool) for g in games])
    assert (s.n_pairs, s.n_hit_first, s.n_hit_hit, s.n_miss_hit) == (
        v.n_pairs, v.n_hit_first, v.n_hit_hit, v.n_miss_hit)
    assert s.n_hit_first + s.n_miss_first == s.n_pairs
    second_makes = sum(b for g in games for _, b in K.disjoint_pairs(g))
    recovered = (s.p_hat_H * s.n_hit_first if s.n_hit_first else 0) + (
        s.p_hat_M * s.n_miss_first if s.n_miss_first else 0)
    assert recovered == pytest.approx(second_makes)


def _ps(n, hit_first, hh, mh, pid=""):
    return K.PairStats(pid, n, hit_first, n - hit_first, hh, mh)


def test_global_T_examples():
    # p_hat_H - p_hat_M = 0.6 - 0.5 = 0.1 over 100 pairs
    one = _ps(100, 50, 30, 25)
    assert K.global_T([one]).statistic == pytest.approx(1.0)
    a = _ps(4, 2, 2, 1)   # 1.0 - 0.5 = +0.5
    b = _ps(4, 2, 1, 2)   # 0.5 - 1.0 = -0.5
    assert K.global_T([a, b]).statistic == pytest.approx(0.0)
    res = K.global_T([one, _ps(3, 3, 3, 0)])
    assert res.excluded == 1 and res.approximate
    with pytest.raises(DegenerateError):
        K.global_T([_ps(3, 3, 3, 0)])


@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 30), st.data()), min_size=1, max_size=10))
@settings(max_examples=50)
def test_global_T_permutation_invariant(items):
    stats_ = []
    for hf, mf, data in items:
        hh = data.draw(st.integers(0, hf))
        mh = data.draw(st.integers(0, mf))
        stats_.append(K.PairStats("", hf + mf, hf, mf, hh, mh))
    t = K.global_T(stats_).statistic
    assert K.global_T(stats_[::-1]).statistic == pytest.approx(t, abs=1e-12)
    if len(stats_) == 1:
        s = stats_[0]
        assert t == pytest.approx(math.sqrt(s.n_pairs) * (s.p_hat_H - s.p_hat_M))


# --------------------------------------------------------------------------
# correlation

def test_pearson_r():
    assert K.pearson_r([1, 0] * 5, [1, 0] * 5) == pytest.approx(1.0)
    assert K.pearson_r([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.0)
    with pytest.raises(DegenerateError):
        K.pearson_r([1, 1, 1], [1, 0, 1])


def test_corr_test_examples():
    assert K.corr_test(0.0, 10).p_value == pytest.approx(0.5)
    res = K.corr_test(0.5, 12)
    assert res.statistic == pytest.approx(math.sqrt(10) * 0.5 / math.sqrt(0.75))
    assert res.statistic == pytest.approx(1.826, abs=1e-3)
    assert res.p_value == pytest.approx(student_t_sf(res.statistic, 10), abs=1e-8)
    assert res.p_value == pytest.approx(0.049, abs=5e-4)
    with pytest.raises(ValueError):
        K.corr_test(0.2, 2)


def test_corr_test_durant_row():
    # printed r = 0.10 (2 dp) over 234 + 37 trips, printed p = 0.047; the
    # p-value must be bracketed by the rounding interval of r
    assert K.corr_test(0.105, 271).p_value < 0.047 < K.corr_test(0.095, 271).p_value


def test_corr_test_perfect_correlation():
    assert K.corr_test(1.0, 5).p_value == 0.0
    assert K.corr_test(-1.0, 5, Alternative.LESS).p_value == 0.0


# --------------------------------------------------------------------------
# means, proportions, bands

def test_two_sample_z():
    res = K.two_sample_z(3.0, 1.0, 10, 3.0, 1.0, 10)
    assert res.statistic == 0 and res.p_value == pytest.approx(1.0)
    res = K.two_sample_z(10, 2, 4, 8, 2, 4)
    assert res.statistic == pytest.approx(2 / math.sqrt(2))
    assert res.p_value == pytest.approx(2 * (1 - normal_cdf(2 / math.sqrt(2))), abs=1e-12)
    assert res.p_value == pytest.approx(0.157, abs=5e-4)
    with pytest.raises(DegenerateError):
        K.two_sample_z(1, 0, 5, 2, 0, 5)


@given(st.floats(-50, 50), st.floats(0.1, 10), st.integers(2, 500),
       st.floats(-50, 50), st.floats(0.1, 10), st.integers(2, 500))
def test_two_sample_z_swap(m1, s1, n1, m2, s2, n2):
    a = K.two_sample_z(m1, s1, n1, m2, s2, n2)
    b = K.two_sample_z(m2, s2, n2, m1, s1, n1)
    assert a.statistic == -b.statistic
    assert a.p_value == pytest.approx(b.p_value)


def test_proportion_ci():
    assert K.proportion_ci(0, 50) == (0.0, 0.0)
    assert K.proportion_ci(50, 50) == (1.0, 1.0)
    lo, hi = K.proportion_ci(19, 341, 0.95)
    assert (round(lo, 4), round(hi, 4)) == (0.0314, 0.0801)
    lo, hi = K.proportion_ci(19, 341, exact=True)
    assert 0 < lo < 19 / 341 < hi < 1
    with pytest.raises(ValueError):
        K.proportion_ci(0, 0)


def test_null_significance_band():
    lo, hi = K.null_significance_band(480, 0.05, 0.95)
    assert (round(lo, 2), round(hi, 2)) == (14.64, 33.36)
    lo, hi = K.null_significance_band(443, 0.05, 0.95)
    assert (round(lo, 2), round(hi, 2)) == (13.16, 31.14)
    assert K.null_significance_band(100, 0.0) == (0.0, 0.0)


# --------------------------------------------------------------------------
# Benjamini-Hochberg

def test_bh_examples():
    assert K.benjamini_hochberg([0.001, 0.02, 0.04], 0.05) == {0, 1, 2}
    assert K.benjamini_hochberg([0.01, 0.04, 0.9], 0.05) == {0}
    assert K.benjamini_hochberg([1.0] * 7, 0.05) == set()
    assert K.benjamini_hochberg([], 0.05) == set()


def test_bh_ties_at_boundary():
    assert K.benjamini_hochberg([0.03, 0.03, 0.03], 0.05) == {0, 1, 2}


@given(st.lists(st.floats(0, 1), min_size=1, max_size=60), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_bh_properties(p, a1, a2):
    lo, hi = sorted((a1, a2))
    r_lo = K.benjamini_hochberg(p, lo)
    r_hi = K.benjamini_hochberg(p, hi)
    assert r_lo == brute_bh(p, lo)
    assert r_lo <= r_hi
    assert all(p[i] <= hi for i in r_hi)


# --------------------------------------------------------------------------

def test_null_runs_rejection_rate():
    rng = np.random.default_rng(11)
    rejects = 0
    n_players = 10_000
    for _ in range(n_players):
        games = list(rng.random((20, 5)) < 0.45)
        rejects += K.player_runs_test(games).p_value <= 0.05
    assert 0.04 <= rejects / n_players <= 0.06
