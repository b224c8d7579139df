import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from incidence_lab.constructions import (gen_cluster_mix, gen_grid_slope_field, gen_lattice,
                                         gen_uniform_random)
from incidence_lab.phase_space import (Configuration, ScaleTriple, concentration,
                                       neighborhood_counts)
from incidence_lab.regularity import (CORE, admissible_triples, certify_uniformity,
                                      check_frostman, katz_tao_extract, katz_tao_violations,
                                      lemma_K, regularize_hypergraph, tuple_centers, uniformize,
                                      weak_uniformity_constant, window_max)


# ------------------------------------------------------------ hypergraph

def test_biregular_kept_intact():
    H = np.array([[i % 4, i // 4] for i in range(16)])
    r = regularize_hypergraph(H)
    assert np.array_equal(r.keep, np.arange(16))
    assert r.K_achieved == 1.0


def test_star_plus_matching():
    # hand-run on n = 16: both degree classes carry 16 tuples; the tie goes to
    # the larger degree, so exactly the star survives
    H = np.array([0] * 16 + list(range(1, 17)))
    r = regularize_hypergraph(H)
    assert np.array_equal(r.keep, np.arange(16))
    assert r.degrees[0] == {0: 16}


def test_single_tuple():
    r = regularize_hypergraph(np.array([[3, 5, 7]]))
    assert r.size == 1 and all(d == {v: 1} for d, v in zip(r.degrees, (3, 5, 7)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_hypergraph_guarantees(seed, t):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 400))
    H = rng.zipf(1.6, size=(n, t)) % 50
    r = regularize_hypergraph(H)
    assert r.size * r.K >= n
    for i, (lo, hi) in enumerate(r.bands):
        degs = np.array(list(r.degrees[i].values()))
        if degs.size:
            assert degs.max() <= hi and degs.min() >= lo


def test_empty_hypergraph_rejected():
    with pytest.raises(ValueError):
        regularize_hypergraph(np.zeros((0, 2)))


# ------------------------------------------------------------ uniformize

def test_admissible_triples():
    tr = admissible_triples([1.0, 0.5])
    assert all(s.v >= s.u * s.w for s in tr)
    assert len(tr) == 7  # (u, v, w) = (1, 1/2, 1) is the only excluded triple


def test_tuple_cell_contains_rep():
    rng = np.random.default_rng(0)
    reps = rng.uniform(-1, 1, (500, 3))
    s = ScaleTriple(0.25, 0.0625, 0.25)
    _, cen = tuple_centers(reps, s)
    u, v, w = s.sides()
    assert np.all(np.abs(reps[:, 0] - cen[:, 0]) <= CORE * u)
    assert np.all(np.abs(reps[:, 2] - cen[:, 2]) <= CORE * w)
    h = reps[:, 1] - cen[:, 2] * (reps[:, 0] - cen[:, 0])
    assert np.all(np.abs(h - cen[:, 1]) <= CORE * v)


def test_lattice_already_uniform():
    X = gen_lattice(2.0 ** -2)
    Y, cert = uniformize(X, [1.0, 0.5, 0.25])
    assert len(Y) == len(X)
    assert cert.holds() and cert.K_empirical <= 16


def test_cluster_mix_certificate():
    X = gen_cluster_mix(2000, 2000, seed=3)
    Y, cert = uniformize(X, [1.0, 2.0 ** -4, 2.0 ** -8])
    assert cert.holds()
    assert len(Y) * cert.K >= len(X)
    counts = neighborhood_counts(Y, ScaleTriple(2.0 ** -4, 2.0 ** -8, 2.0 ** -4))
    assert counts.min() * cert.K_empirical >= concentration(Y, ScaleTriple(2.0 ** -4, 2.0 ** -8, 2.0 ** -4))


def test_singleton_uniformize():
    X = Configuration(np.array([[0.1, 0.2, 0.3]]))
    Y, cert = uniformize(X, [1.0, 0.25])
    assert len(Y) == 1 and cert.holds()


def test_certificate_is_measured():
    X = gen_uniform_random(500, 1)
    tr = admissible_triples([1.0, 0.25])
    cert = certify_uniformity(X, tr)
    for r in cert.rows:
        assert r["M"] <= cert.K_empirical * r["min_count"]


def test_lemma_K_overflow():
    assert lemma_K(10_000, 2.0 ** -400) == math.inf
    assert lemma_K(1, 0.5) == pytest.approx((4 * math.log(2)) ** 2)


def test_cube_side_guard():
    with pytest.raises(ValueError):
        uniformize(gen_uniform_random(10), [1.0, 0.5], cube_side=0.1)


# ------------------------------------------------------------ weak uniformity

def test_weak_uniformity_lattice():
    # a closed rectangle of half-width u holds 3^3 lattice points and a
    # cover cell of side 2u about 2^3, so the ratio sits a bounded factor above 1
    X = gen_lattice(2.0 ** -3)
    C = weak_uniformity_constant(X, ScaleTriple(2.0 ** -3, 2.0 ** -3, 2.0 ** -3))
    assert 1 <= C <= 8


def test_weak_uniformity_clusters():
    rng = np.random.default_rng(0)
    a = np.array([0.3, 0.3, 0.3]) + rng.uniform(-1e-3, 1e-3, (50, 3))
    b = np.array([-0.6, -0.6, -0.6]) + rng.uniform(-1e-3, 1e-3, (50, 3))
    C = weak_uniformity_constant(np.concatenate([a, b]), ScaleTriple(2.0 ** -4, 2.0 ** -8, 2.0 ** -4))
    assert C == pytest.approx(1.0)
    assert weak_uniformity_constant(a, ScaleTriple(2.0 ** -4, 2.0 ** -8, 2.0 ** -4)) == pytest.approx(1.0)


# ------------------------------------------------------------ Katz-Tao

def test_katz_tao_decimal_delta():
    P = np.round(np.arange(101) * 0.01, 12)
    out = katz_tao_extract(P, 0.01, 1.0, 2.0)
    assert len(out) >= 9
    assert katz_tao_violations(out, 0.01, 1.0) == []


def test_katz_tao_dyadic():
    delta = 2.0 ** -10
    P = np.arange(1025) * delta
    out = katz_tao_extract(P, delta, 1.0, 2.0)
    assert len(out) >= math.ceil(1024 / 12)
    assert katz_tao_violations(out, delta, 1.0) == []


def test_katz_tao_s_zero():
    out = katz_tao_extract(np.arange(11) * 0.1, 0.1, 0.0, 2.0)
    assert len(out) >= 1


def test_katz_tao_input_checks():
    with pytest.raises(ValueError):
        katz_tao_extract(np.array([0.0, 0.001]), 0.01, 1.0, 2.0)
    with pytest.raises(ValueError):
        katz_tao_extract(np.arange(10) * 0.01, 0.01, 1.0, 1.0)  # all mass in one window


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 9), st.sampled_from([0.5, 1.0]), st.integers(0, 1000))
def test_katz_tao_random_subsets(k, s, seed):
    delta = 2.0 ** -k
    rng = np.random.default_rng(seed)
    P = np.arange(2 ** k + 1) * delta
    P = P[rng.uniform(size=P.size) < 0.8]
    C = 8.0
    try:
        out = katz_tao_extract(P, delta, s, C)
    except ValueError:
        return  # not a (delta, s, C)-set
    assert katz_tao_violations(out, delta, s) == []
    assert len(out) >= math.ceil(delta ** -s / (6 * C) - 1e-12)


def test_window_max():
    assert window_max(np.array([0.0, 0.25, 0.5, 0.75]), 0.5) == 2
    assert window_max(np.array([]), 0.5) == 0


# ------------------------------------------------------------ Frostman

def test_frostman_lattice():
    rep = check_frostman(gen_lattice(2.0 ** -3), 1.5, 1.5)
    assert rep.C == pytest.approx(1.0)
    assert rep.witness.scale.sides() == (1.0, 1.0, 1.0)


def test_frostman_single_rectangle():
    rng = np.random.default_rng(0)
    u0, w0 = 2.0 ** -3, 2.0 ** -2
    pts = rng.uniform(-0.4, 0.4, (200, 3)) * [u0, u0 * w0, w0]
    X = Configuration(pts, 2.0 ** -6)
    rep = check_frostman(X, 1.0, 1.0, scale_grid=[(1.0, 1.0), (u0, w0)])
    assert rep.C == pytest.approx(u0 ** -1 * w0 ** -1)
    assert rep.witness.scale.sides() == (u0, u0 * w0, w0)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_frostman_grid_slope_field(alpha):
    for k in (4, 6):
        rep = check_frostman(gen_grid_slope_field(2.0 ** -k), alpha, 3 - alpha)
        assert rep.C <= 4


def test_frostman_needs_scales():
    with pytest.raises(ValueError):
        check_frostman(np.zeros((3, 3)), 1.0, 1.0)
