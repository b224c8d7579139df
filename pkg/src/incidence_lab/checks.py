"""Small invariant suites, one per module, used by ``--selfcheck``.

Each suite returns a list of (name, ok, detail) rows and is cheap enough to
run in a few seconds.
"""
from __future__ import annotations

import math

import numpy as np

from . import branching, constructions, finite_field, heilbronn, incidence_kernel, regularity
from .phase_space import (Configuration, PhaseRect, ScaleTriple, directed_distance,
                          rescale_points)


def random_scales(rng, n: int) -> np.ndarray:
    """Random admissible (u, v, w) rows with sides in [2^-12, 1]."""
    u = 2.0 ** -rng.uniform(0, 12, n)
    w = 2.0 ** -rng.uniform(0, 12, n)
    v = np.minimum(1.0, u * w * 2.0 ** rng.uniform(0, 12, n))
    return np.column_stack([u, v, w])


def _dist(p, q, S):
    u, v, w = S[:, 0], S[:, 1], S[:, 2]
    da = np.abs(q[:, 0] - p[:, 0]) / u
    db = np.abs(q[:, 1] - (p[:, 1] + p[:, 2] * (q[:, 0] - p[:, 0]))) / v
    dc = np.abs(q[:, 2] - p[:, 2]) / w
    return np.maximum(np.maximum(da, db), dc)


def metric_law_violations(n: int = 100_000, seed: int = 0) -> dict:
    """Counts of transitivity / symmetry failures and the worst isometry error.

    Points are drawn near each other at the sampled scale so both sides of
    each law are of order one.
    """
    rng = np.random.default_rng(seed)
    S = random_scales(rng, n)
    w0 = rng.uniform(-1, 1, (n, 3))

    def near(p):
        step = rng.uniform(-1.5, 1.5, (n, 3)) * S
        q = p + step
        q[:, 1] += p[:, 2] * step[:, 0]
        return q

    w1 = near(w0)
    w2 = near(w1)
    d01, d12, d02 = _dist(w0, w1, S), _dist(w1, w2, S), _dist(w0, w2, S)
    trans = int(np.count_nonzero(d02 > d01 + d12 + d01 * d12))
    d10 = _dist(w1, w0, S)
    sym = int(np.count_nonzero(np.abs(d01 - d10) > d01 * d01))

    # blowup psi_R for R of scale u0 x u0 w0 x w0 centered at w0
    u0 = 2.0 ** -rng.integers(0, 6, n)
    c0 = 2.0 ** -rng.integers(0, 6, n)
    inner = random_scales(rng, n)
    a = w0 + rng.uniform(-1, 1, (n, 3)) * np.column_stack([u0, u0 * c0, c0])
    b = w0 + rng.uniform(-1, 1, (n, 3)) * np.column_stack([u0, u0 * c0, c0])
    iso = 0.0
    for i in range(0, n, 20_000):
        sl = slice(i, i + 20_000)
        # vectorized blowup with per-row centers
        A, B, C0 = a[sl], b[sl], w0[sl]
        U0, W0 = u0[sl], c0[sl]

        def psi(p):
            return np.column_stack([(p[:, 0] - C0[:, 0]) / U0,
                                    (p[:, 1] - (C0[:, 1] + C0[:, 2] * (p[:, 0] - C0[:, 0]))) / (U0 * W0),
                                    (p[:, 2] - C0[:, 2]) / W0])

        S_in = inner[sl]
        S_out = S_in * np.column_stack([U0, U0 * W0, W0])
        lhs = _dist(psi(A), psi(B), S_in)
        rhs = _dist(A, B, S_out)
        iso = max(iso, float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, rhs))))
    # the library blowup agrees with the vectorized one
    for i in range(min(n, 500)):
        R = PhaseRect(tuple(w0[i]), ScaleTriple.blowup(u0[i], c0[i]))
        lhs = directed_distance(rescale_points(R, a[i]), rescale_points(R, b[i]), ScaleTriple(*inner[i]))
        rhs = directed_distance(a[i], b[i], ScaleTriple(*(inner[i] * [u0[i], u0[i] * c0[i], c0[i]])))
        iso = max(iso, abs(lhs - rhs) / max(1.0, rhs))
    return {"n": n, "transitivity": trans, "symmetry": sym, "isometry_err": iso}


# ------------------------------------------------------------------ suites

def _row(name, ok, detail=""):
    return (name, bool(ok), str(detail))


def check_phase_space(seed: int = 0):
    r = metric_law_violations(20_000, seed)
    rect = PhaseRect((0.1, 0.2, 0.3), ScaleTriple(0.25, 0.125, 0.5))
    p = np.array([[0.2, 0.23, 0.4], [-0.3, 0.1, 0.9]])
    ok = np.allclose(directed_distance(rect.center, p, rect.scale),
                     [max(0.4, abs(0.23 - 0.2 - 0.03) / 0.125, 0.2), 1.6])
    q = rescale_points(PhaseRect((0, 0, 0), ScaleTriple(0.5, 0.25, 0.5)), [[0.1, 0.1, 0.1]])
    return [_row("transitivity", r["transitivity"] == 0, r["transitivity"]),
            _row("symmetry", r["symmetry"] == 0, r["symmetry"]),
            _row("isometry", r["isometry_err"] <= 1e-10, r["isometry_err"]),
            _row("distance_examples", ok),
            _row("blowup_example", np.allclose(q, [[0.2, 0.4, 0.2]]))]


def check_constructions(seed: int = 0):
    rows = []
    for X in (constructions.gen_uniform_random(200, seed),
              constructions.gen_grid_slope_field(2.0 ** -3),
              constructions.gen_cluster_mix(50, 50, seed=seed),
              constructions.gen_single_slope(100, 0.5, seed)):
        name = X.metadata.get("generator")
        back = Configuration.from_text(X.to_text())
        rows.append(_row(f"{name}_in_omega", X.in_omega()))
        rows.append(_row(f"{name}_roundtrip", np.array_equal(back.points, X.points) and back.delta == X.delta))
    return rows + check_phase_space(seed)[:2]


def check_incidence(seed: int = 0):
    X = constructions.gen_uniform_random(400, seed)
    P, L = X.P, X.points
    rows = []
    for w in (2.0 ** -2, 2.0 ** -5, 2.0 ** -8):
        I = incidence_kernel.smoothed_incidences(X, w)
        I0 = incidence_kernel.smoothed_incidences(X, w, naive=True)
        lo = incidence_kernel.hard_incidences(P, L, 0.4 * w)
        hi = incidence_kernel.hard_incidences(P, L, 0.6 * w)
        rows.append(_row(f"sandwich_w={w!r}", lo <= I + 1e-9 and I <= hi + 1e-9, (lo, I, hi)))
        rows.append(_row(f"fast_equals_naive_w={w!r}", math.isclose(I, I0, rel_tol=1e-9, abs_tol=1e-9)))
    return rows


def check_highlow(seed: int = 0):
    X = constructions.gen_uniform_random(300, seed)
    rep = incidence_kernel.high_low_scan(X, 2.0 ** -6, 2.0 ** -2)
    r = rep.max_ratio
    return [_row("ratio_finite", math.isfinite(r), r),
            _row("rows", len(rep.rows) == 5, len(rep.rows))] + check_incidence(seed)[:2]


def check_uniformize(seed: int = 0):
    rows = []
    for X in (constructions.gen_uniform_random(1000, seed),
              constructions.gen_cluster_mix(300, 300, seed=seed)):
        Y, cert = regularity.uniformize(X, [1.0, 2.0 ** -2, 2.0 ** -4])
        rows.append(_row(f"{X.metadata['generator']}_certificate", cert.holds(), cert.K_empirical))
        rows.append(_row(f"{X.metadata['generator']}_size", len(Y) * cert.K >= len(X), (len(Y), len(X))))
    return rows


def check_katztao(seed: int = 0):
    delta = 2.0 ** -8
    P = np.arange(0, int(1 / delta) + 1) * delta
    out = regularity.katz_tao_extract(P, delta, 1.0, 2.0)
    need = math.ceil(1 / delta / 12)
    bad = regularity.katz_tao_violations(out, delta, 1.0)
    return [_row("size", len(out) >= need, (len(out), need)), _row("window_bound", not bad, bad)]


def check_frostman(seed: int = 0):
    X = constructions.gen_uniform_random(500, seed)
    X = Configuration(X.points, 2.0 ** -4)
    rep = regularity.check_frostman(X, 1.0, 1.0)
    ok = all(cnt <= rep.C * u ** 1.0 * w ** 1.0 * len(X) * (1 + 1e-12) for u, w, cnt, _ in rep.table)
    return [_row("constant_dominates", ok, rep.C), _row("witness", rep.witness is not None)]


def check_branching(seed: int = 0):
    f = branching.linear_branching(6, 1.7, 1.7)
    dn = branching.direction_numbers(f)
    rows = [_row("synthetic_lipschitz", branching.check_lipschitz_monotone(f)["max_violation"] <= 1e-12),
            _row("synthetic_submodular", branching.check_submodular(f, seed=seed)["max_violation"] <= 1e-12),
            _row("synthetic_direction", branching.check_direction_inequalities(dn, f)["max_violation"] <= 1e-12)]
    g = branching.compute_branching(constructions.gen_grid_slope_field(2.0 ** -3), 3, 1)
    for name, rep in (("lipschitz", branching.check_lipschitz_monotone(g)),
                      ("submodular", branching.check_submodular(g, seed=seed)),
                      ("direction", branching.check_direction_inequalities(branching.direction_numbers(g), g))):
        rows.append(_row(f"grid_slope_field_{name}", rep["passes"], rep["max_violation"]))
    return rows


def check_effective(seed: int = 0):
    f = branching.linear_branching(6, 1.7, 1.7)
    tr = branching.find_effective_triple(f, 0.01, 0.19)
    return [_row("synthetic_found", tr is not None),
            _row("synthetic_verified", tr is not None and branching.verify_effective(f, tr))]


def check_heilbronn(seed: int = 0):
    rng = np.random.default_rng(seed)
    rows = []
    for n in (16, 64, 128):
        P = rng.uniform(0, 1, (n, 2))
        pr = heilbronn.greedy_pairing(P)
        d = pr.distances(P)
        rows.append(_row(f"pairing_bound_n={n}", d.max() <= 10 / math.sqrt(n), d.max()))
        a = heilbronn.small_triangle_pipeline(P).area
        b = heilbronn.brute_force_min_triangle(P).area
        rows.append(_row(f"pipeline_ge_brute_n={n}", a >= b, (a, b)))
    corners = np.array([[0, 0], [1, 0], [0, 1], [1, 1.0]])
    rows.append(_row("corners", heilbronn.brute_force_min_triangle(corners).area == 0.5))
    return rows


def check_unital(seed: int = 0):
    cfg = finite_field.build_unital(3)
    t = finite_field.verify_tangency(cfg)
    v = finite_field.vinh_check(cfg.field, cfg.points, cfg.tangents)
    return [_row("size", len(cfg.points) == 24),
            _row("tangency", t["passes"], t["reason"]),
            _row("vinh_p3", (v["I"], v["expected"], v["slack"], v["bound"]) == (24, 64.0, 40.0, 72.0), v)]


SUITES = {"gen": check_constructions, "incidence": check_incidence, "highlow": check_highlow,
          "uniformize": check_uniformize, "katztao": check_katztao, "frostman": check_frostman,
          "branching": check_branching, "effective": check_effective, "heilbronn": check_heilbronn,
          "unital": check_unital}
