import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from incidence_lab.finite_field import (UnitalConfig, all_lines, build_field, build_unital,
                                        incidences, is_prime, line_points, line_through,
                                        on_unital, random_subsets, sharpness_probe,
                                        tangent_lines, verify_tangency, vinh_check)

PRIMES = [3, 5, 7, 11]


def to_pair(F, a):
    a0, a1 = F.split(a)
    return int(a0), int(a1)


def test_field_p3():
    F = build_field(3)
    assert F.n == 2  # x^2 - 2 = x^2 + 1 over F_3
    N = F.norm(F.elements())
    assert N[0] == 0 and set(N[1:].tolist()) == {1, 2}


def test_field_guards():
    assert not is_prime(9)
    for p in (9, 2, 101):
        with pytest.raises(ValueError):
            build_field(p)
    with pytest.raises(ZeroDivisionError):
        build_field(3).inv(0)


@pytest.mark.parametrize("p", PRIMES)
def test_frobenius_involution(p):
    F = build_field(p)
    e = F.elements()
    assert np.array_equal(F.frobenius(F.frobenius(e)), e)
    assert np.array_equal(F.frobenius(e), F.pow(e, p))


@pytest.mark.parametrize("p", [3, 5])
def test_arithmetic_matches_oracle(p):
    F = build_field(p)
    O = oracles.Fp2(p)
    e = F.elements()
    for a in e[::3]:
        pa = to_pair(F, a)
        assert F.norm(a) == O.norm(pa)
        assert to_pair(F, F.frobenius(a)) == O.conj(pa)
        for b in e[::5]:
            assert to_pair(F, F.mul(a, b)) == O.mul(pa, to_pair(F, b))


def test_norm_multiplicative_p7():
    F = build_field(7)
    e = F.elements()
    A, B = np.meshgrid(e, e, indexing="ij")
    assert np.array_equal(F.norm(F.mul(A, B)), (F.norm(A) * F.norm(B)) % 7)


def test_inverse():
    F = build_field(7)
    e = F.elements()[1:]
    assert np.all(F.mul(e, F.inv(e)) == 1)
    assert np.array_equal(F.pow(e, -1), F.inv(e))


def test_line_through_and_points():
    F = build_field(3)
    ids = line_through(F, np.array([2, 4]), np.array([5, 1]), np.array([0, 1]), np.array([1, 3]))
    for i, (x, y) in zip(ids, [(2, 5), (4, 1)]):
        pts = line_points(F, int(i))
        assert len(pts) == F.q and any((pts == [x, y]).all(1))


@pytest.mark.parametrize("p", PRIMES)
def test_unital_size(p):
    cfg = build_unital(p)
    assert len(cfg.points) == p ** 3 - p
    assert np.all(on_unital(cfg.field, cfg.points))


@pytest.mark.parametrize("p", [3, 5])
def test_unital_against_oracle(p):
    F, U = oracles.unital(p)
    cfg = build_unital(p)
    got = sorted((to_pair(cfg.field, a), to_pair(cfg.field, b)) for a, b in cfg.points)
    assert got == sorted(U)
    assert oracles.unital_tangency(p)


@pytest.mark.parametrize("p", PRIMES)
def test_tangent_contains_point(p):
    cfg = build_unital(p)
    F = cfg.field
    for (a, b), ln in zip(cfg.points[::7], cfg.tangents[::7]):
        assert any((line_points(F, int(ln)) == [a, b]).all(1))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_tangency(p):
    assert verify_tangency(build_unital(p))["passes"]


def test_perturbed_point_fails():
    cfg = build_unital(3)
    F = cfg.field
    pts = cfg.points.copy()
    pts[0, 0] = (pts[0, 0] + 1) % F.q
    bad = UnitalConfig(F, pts, tangent_lines(F, pts))
    rep = verify_tangency(bad)
    assert not rep["passes"] and rep["witness"] == pts[0].tolist()


def test_vinh_p3_numbers():
    cfg = build_unital(3)
    rep = vinh_check(cfg.field, cfg.points, cfg.tangents)
    # frozen from oracles.unital_tangent_incidences(3) = (24, 24, 24, 9)
    assert oracles.unital_tangent_incidences(3) == (24, 24, 24, 9)
    assert (rep["I"], rep["expected"], rep["slack"], rep["bound"]) == (24, 64, 40, 72)
    assert rep["passes"]


def test_all_points_all_lines():
    F = build_field(3)
    e = F.elements()
    X, Y = np.meshgrid(e, e, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    L = all_lines(F)
    rep = vinh_check(F, P, L)
    assert rep["I"] == F.q * len(L) == 810
    assert rep["passes"] and rep["slack"] == 0


def test_empty_lines():
    rep = vinh_check(build_field(3), np.array([[0, 0]]), np.zeros(0, dtype=np.int64))
    assert rep["I"] == 0 and rep["bound"] == 0 and rep["passes"]


def test_incidence_range_guard():
    with pytest.raises(ValueError):
        incidences(build_field(3), np.array([[0, 9]]), np.array([0]))


@pytest.mark.parametrize("p", PRIMES)
def test_vinh_random_subsets(p):
    F = build_field(p)
    for P, L in random_subsets(F, np.random.default_rng(p)):
        assert vinh_check(F, P, L)["passes"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_incidences_match_direct_count(seed):
    F = build_field(3)
    rng = np.random.default_rng(seed)
    idx = rng.choice(F.q * F.q, size=int(rng.integers(1, 30)), replace=False)
    P = np.column_stack([idx // F.q, idx % F.q])
    L = rng.choice(F.q * F.q + F.q, size=int(rng.integers(1, 30)), replace=False)
    want = 0
    for ln in L:
        S = {tuple(r) for r in line_points(F, int(ln)).tolist()}
        want += sum(tuple(r) in S for r in P.tolist())
    assert incidences(F, P, L) == want


@pytest.mark.parametrize("p", [3, 5])
def test_sharpness_probe(p):
    rep = sharpness_probe(build_unital(p))
    assert rep["nontrivial_incidences"] == 0
    assert rep["n"] <= rep["threshold"]
