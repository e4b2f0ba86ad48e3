# %% [markdown]
# Free-throw serial correlation and the halftime reset
#
# Hand-built data, small enough to check by eye.

# %%
import numpy as np

from hothand import analyses as A
from hothand import kernels as K
from hothand.ingest import FreeThrowTrip

# %% [markdown]
# A shooter who makes 86% after a make and 76% after a miss.

# %%
pairs = [(1, 1)] * 201 + [(1, 0)] * 33 + [(0, 1)] * 28 + [(0, 0)] * 9
trips = [FreeThrowTrip("shooter", f"g{i}", tuple(map(bool, p))) for i, p in enumerate(pairs)]
rows, summary = A.free_throw_analysis(trips)
print(rows[0].metrics)
print(f"p = {rows[0].p_value:.4f}")

# %% [markdown]
# The correlation test alone, for a sweep of r at n = 271.

# %%
for r in np.arange(0.0, 0.16, 0.03):
    print(f"r={r:.2f}  p={K.corr_test(r, 271).p_value:.4f}")

# %% [markdown]
# Halftime: late Q2 shooting against early Q3 shooting, one point per
# player-game. These four player-games are perfectly anti-correlated.

# %%
from hothand import ingest

events = []
for gi, (q2, q3) in enumerate([([1, 1, 1], [0, 0, 0]), ([0, 0, 0], [1, 1, 1]),
                               ([1, 0, 1], [0, 1, 0]), ([0, 1, 0], [1, 0, 1])]):
    for q, shots in ((2, q2), (3, q3)):
        for i, made in enumerate(shots):
            events.append(ingest.ShotEvent("a", f"g{gi}", q, 600.0 - 60 * i, bool(made), 10.0, 1, 4.0))
seqs = ingest.recode_first_shots(ingest.build_sequences(events))
print(A.halftime_analysis(seqs, A.Window.LAST3_FIRST3))
