# %% [markdown]
# Runs tests and the pooled pair statistic on a synthetic league
#
# Two hundred players shoot independently at their own rate, so any
# "streakiness" found here is noise.

# %%
import numpy as np

from hothand import kernels as K
from hothand import simulate as S

# %%
roster = S.synthetic_roster(200, 40, seed=1)
run = S.simulate_run(roster, delta=0.0, replicate=0, master_seed=1)
league = {p.player_id: games for p, games in zip(roster, run.sequences)}

# %% [markdown]
# One player's games, tested one at a time and aggregated.

# %%
games = league[roster[0].player_id]
for g in games[:3]:
    s = K.RunsStats.from_outcomes(g)
    print(g.astype(int), s.runs, f"expected {s.expected_runs:.2f}")
print(K.player_runs_test(games, "less"))

# %% [markdown]
# Across the league about 5% of players should look streaky at alpha = 0.05.
# The null band says how many is too many.

# %%
pvals = np.array([K.player_runs_test(g, "less").p_value for g in league.values()])
print("significant:", int((pvals <= 0.05).sum()), "of", pvals.size)
print("null band:", K.null_significance_band(pvals.size, 0.05))
print("BH discoveries:", len(K.benjamini_hochberg(pvals, 0.05)))

# %% [markdown]
# Disjoint pairs within each game give p_hat(H) and p_hat(M) per player,
# pooled into T.

# %%
stats = [K.player_pair_stats(g, pid) for pid, g in league.items()]
res = K.global_T(stats)
print(f"T = {res.statistic:.3f}, p = {res.p_value:.3f} (approximate), excluded {res.excluded}")
