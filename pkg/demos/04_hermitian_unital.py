"""
The Hermitian unital
====================

Over F_{p^2} the points with N(a) + N(b) = 1 form a set of p^3 - p points,
each with a tangent line that meets the set only at that point.  It is the
configuration with many point-line pairs and no other incidences.
"""

# %%

import numpy as np

from incidence_lab.finite_field import (build_unital, random_subsets, sharpness_probe,
                                        verify_tangency, vinh_check)

for p in (3, 5, 7, 11):
    cfg = build_unital(p)
    F = cfg.field
    v = vinh_check(F, cfg.points, cfg.tangents)
    print(f"p = {p:2d}: |P| = {len(cfg.points):5d}  tangency {verify_tangency(cfg)['passes']}  "
          f"I = {v['I']}  |P||L|/q = {v['expected']:.1f}  slack {v['slack']:.1f} <= {v['bound']:.1f}")

# %%
# Nontrivial incidences: zero, with n close to q^{3/2}.

print(sharpness_probe(build_unital(7)))

# %%
# Vinh's inequality on random point and line sets.

F = build_unital(5).field
reps = [vinh_check(F, P, L) for P, L in random_subsets(F, np.random.default_rng(0))]
worst = max(r["slack"] / r["bound"] for r in reps)
print("worst slack / bound over 50 random pairs:", round(worst, 3))
