"""
Phase space and smoothed incidences
===================================

A point (a, b, c) of phase space is the point (a, b) of the plane with the
line of slope c through it.  This walk-through builds a configuration, looks
at its covering numbers, and compares the smoothed incidence count with the
hard counts on either side of it.
"""

# %%
# Covering numbers of the grid slope field
# ----------------------------------------
# Every point of a 2^-k grid carries the line of slope x.  The cover of
# u x uw x w rectangles should grow like max(u^-2 w^-1, u^-1 w^-2).

import numpy as np

from incidence_lab.constructions import gen_grid_slope_field, gen_uniform_random
from incidence_lab.incidence_kernel import (dyadic_range, hard_incidences, high_low_scan,
                                            smoothed_incidences)
from incidence_lab.phase_space import ScaleTriple, covering_number, directed_distance

X = gen_grid_slope_field(2.0 ** -6)
print(f"{len(X)} points, delta = {X.delta}")
for k in range(1, 5):
    u = w = 2.0 ** -k
    n = covering_number(X, ScaleTriple(u, u * w, w))
    print(f"u = w = 2^-{k}:  N = {n:6d}   target {max(u ** -2 / w, 1 / (u * w ** 2)):8.0f}")

# %%
# The anisotropic distance
# ------------------------
# Moving along the line costs little in the height coordinate, moving across
# it costs a lot.

s = ScaleTriple(0.25, 0.0625, 0.25)
origin = np.array([0.0, 0.0, 0.5])
along = np.array([0.2, 0.1, 0.5])    # still on the line of slope 1/2
across = np.array([0.0, 0.1, 0.5])
print("along:", directed_distance(origin, along, s), " across:", directed_distance(origin, across, s))

# %%
# Smoothed count versus hard counts
# ---------------------------------
# I(w) sits between the counts at thresholds 0.4w and 0.6w for every w.

Y = gen_uniform_random(1000, seed=0)
for w in dyadic_range(2.0 ** -8, 2.0 ** -2):
    lo = hard_incidences(Y.P, Y.points, 0.4 * w)
    hi = hard_incidences(Y.P, Y.points, 0.6 * w)
    print(f"w = {w:.5f}:  {lo:6d} <= {smoothed_incidences(Y, w):9.1f} <= {hi:6d}")

# %%
# The high-low ratio
# ------------------
# |B(w) - B(w/2)| against the concentration term: a random configuration
# keeps the ratio small at every scale.

rep = high_low_scan(Y, 2.0 ** -10, 2.0 ** -2)
for r in rep.rows:
    print(f"w = {r['w']:.5f}  B = {r['B']:.3f}  ratio = {r['ratio']:.4f}")
print("max ratio", rep.max_ratio)
