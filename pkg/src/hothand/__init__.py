"""Streak ("hot hand") detection in binary make/miss sequences."""

__version__ = "0.1.0"

from .kernels import (  # noqa: E402
    Alternative,
    DegenerateError,
    PairStats,
    RunsStats,
    TestResult,
    aggregate_runs_test,
    benjamini_hochberg,
    corr_test,
    disjoint_pairs,
    global_T,
    null_significance_band,
    pair_stats,
    pearson_r,
    proportion_ci,
    runs_count,
    runs_test,
    two_sample_z,
)
