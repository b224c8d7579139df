"""
Uniform subsets and branching functions
=======================================

Uniformization keeps a large subset whose rectangles at each scale hold
comparable numbers of points.  On such a set the branching function
f(x, y, z) records how the covering number grows, and the structure checks
say how close it is to a Lipschitz, submodular function.
"""

# %%
# Uniformizing a cluster plus dust
# --------------------------------

from incidence_lab.branching import (barrier_value, be_functionals, check_direction_inequalities,
                                     check_lipschitz_monotone, check_submodular,
                                     compute_branching, direction_numbers, find_effective_triple,
                                     linear_branching)
from incidence_lab.constructions import gen_cluster_mix, gen_grid_slope_field, gen_lattice
from incidence_lab.regularity import uniformize

X = gen_cluster_mix(3000, 3000, seed=0)
Y, cert = uniformize(X, [1.0, 2.0 ** -4, 2.0 ** -8])
print(f"kept {len(Y)} of {len(X)} points, empirical K = {cert.K_empirical:.1f}, holds: {cert.holds()}")

# %%
# Branching function of the lattice
# ---------------------------------
# The lattice fills phase space, so f grows at the full rate in every direction.

m, T = 2, 2
L, c = uniformize(gen_lattice(2.0 ** -(m * T)), [2.0 ** (-j * T) for j in range(m + 1)])
f = compute_branching(L, m, T, c)
print("tolerance", round(f.tolerance, 3))
for rep in (check_lipschitz_monotone(f), check_submodular(f),
            check_direction_inequalities(direction_numbers(f), f)):
    print(f"  {rep['check']:<12} max violation {rep['max_violation']:.3f}  passes {rep['passes']}")

# %%
# The grid slope field on the diagonal
# ------------------------------------
# Here f(x, y) should follow max(2x + y, x + 2y).

g = compute_branching(gen_grid_slope_field(2.0 ** -8), 4, 2, triples="diagonal")
for i in range(5):
    print(" ".join(f"{g.f2(i, j) - max(2 * i + j, i + 2 * j) / 4:+.2f}" for j in range(5 - i)))

# %%
# Effective triples
# -----------------
# A linear function with slope sum 3.4 admits an effective triple; the grid
# slope field sits on the barrier and admits none above its tolerance.

syn = linear_branching(6, 1.7, 1.7)
print("synthetic:", find_effective_triple(syn, 0.01, 0.19))
h = compute_branching(gen_grid_slope_field(2.0 ** -6), 6, 1)
print("grid slope field barrier", round(barrier_value(h, 0.34), 4), "tolerance", round(h.tolerance, 3))
b, e = be_functionals(h)
print("e(s; 1/6, 1/6) for s = 1..4:", [round(float(e[s, 1, 1]), 3) for s in range(1, 5)])
