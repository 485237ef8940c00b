"""Feasible regions and their linear minimization oracles.

Run with ``python3 demos/01_regions_and_oracles.py``.
"""
# %%
import itertools

import numpy as np

from socgs import ActiveSet, Birkhoff, L1Ball, Simplex, away_vertex, hungarian_assignment

rng = np.random.default_rng(0)

# %% The simplex oracle picks the smallest gradient coordinate.
simplex = Simplex(4)
g = np.array([0.3, -1.2, 0.8, -1.2])
v = simplex.lmo(g)
print("simplex lmo:", v.dense, "key", v.key)  # ties go to the lowest index

# %% The l1 oracle puts all the mass on the largest |g_i|, with the opposite sign.
ball = L1Ball(4, radius=2.0)
print("l1 lmo:", ball.lmo(g).dense)

# %% Birkhoff vertices are permutation matrices; the oracle is an assignment problem.
birk = Birkhoff(4)
C = rng.standard_normal((4, 4))
perm = hungarian_assignment(C)
best = min(itertools.permutations(range(4)), key=lambda p: sum(C[i, p[i]] for i in range(4)))
print("hungarian:", perm, "brute force:", best)
print(birk.lmo(C.ravel()).dense.reshape(4, 4))

# %% Away vertices come from the active set, not the whole region.
aset = ActiveSet([simplex.vertex(0), simplex.vertex(2), simplex.vertex(3)], [0.5, 0.25, 0.25])
print("away vertex:", away_vertex(aset, g).key)

# %% Diameters are known in closed form.
for region in (simplex, ball, birk):
    print(f"{region!r:24s} dim={region.dim:3d} diameter={region.diameter:.4f}")
