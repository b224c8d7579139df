import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from incidence_lab.heilbronn import (brute_force_min_triangle, exponent_sweep, greedy_pairing,
                                     hull_area, loglog_slope, nearest_cross_incidence,
                                     nearest_cross_incidence_brute, small_triangle_pipeline,
                                     triangle_area)

CORNERS = np.array([[0, 0], [1, 0], [0, 1], [1, 1.0]])


# ------------------------------------------------------------ pairing

def test_pairing_corners():
    pr = greedy_pairing(CORNERS)
    assert len(pr.pairs) == 1
    assert pr.distances(CORNERS)[0] <= 5 / 2 <= pr.bound


def test_pairing_random_100():
    P = np.random.default_rng(0).uniform(0, 1, (100, 2))
    pr = greedy_pairing(P)
    assert len(pr.pairs) == 25 and pr.bound == 1.0
    assert np.all(pr.distances(P) <= 1.0)
    assert len(set(pr.pairs.ravel())) == 50


def test_pairing_collinear():
    n = 64
    P = np.column_stack([np.linspace(0, 1, n), np.full(n, 0.5)])
    pr = greedy_pairing(P)
    assert len(pr.pairs) == 16
    assert np.all(pr.distances(P) <= 10 / math.sqrt(n))


def test_pairing_guards():
    with pytest.raises(ValueError):
        greedy_pairing(CORNERS[:3])
    with pytest.raises(ValueError):
        greedy_pairing(CORNERS + 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 3000), st.integers(0, 10_000))
def test_pairing_bound(n, seed):
    P = np.random.default_rng(seed).uniform(0, 1, (n, 2))
    pr = greedy_pairing(P)
    assert len(pr.pairs) == n // 4
    assert np.all(pr.distances(P) <= 10 / math.sqrt(n))


# ------------------------------------------------------------ cross incidence

def test_cross_incidence_exact_hit():
    # l_1 is y = 0 and l_2 is x = 0, so p_1 = (0, 0) lies on l_2
    pts = np.array([[0.0, 0.0], [0.5, 0.5]])
    A = np.array([[0.0, 0.0], [0.0, 0.7]])
    D = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert nearest_cross_incidence(pts, A, D) == (0, 1, 0.0)


def test_cross_incidence_one_line():
    t = np.linspace(0, 1, 10)
    pts = np.column_stack([t, t])
    A = pts.copy()
    D = np.tile([1 / math.sqrt(2), 1 / math.sqrt(2)], (10, 1))
    j, k, d = nearest_cross_incidence(pts, A, D)
    assert (j, k) == (0, 1) and d == pytest.approx(0.0, abs=1e-15)


def test_cross_incidence_guard():
    with pytest.raises(ValueError):
        nearest_cross_incidence(np.zeros((1, 2)), np.zeros((1, 2)), np.array([[1.0, 0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 2000), st.integers(0, 10_000))
def test_cross_incidence_matches_loop(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, (n, 2))
    A = rng.uniform(0, 1, (n, 2))
    th = rng.uniform(0, math.pi, n)
    D = np.column_stack([np.cos(th), np.sin(th)])
    fast = nearest_cross_incidence(pts, A, D)
    slow = nearest_cross_incidence_brute(pts, A, D)
    assert fast[2] == pytest.approx(slow[2], rel=1e-12, abs=1e-15)


# ------------------------------------------------------------ triangles

def test_brute_force_examples():
    assert brute_force_min_triangle(CORNERS).area == 0.5
    assert brute_force_min_triangle(CORNERS, k=4).area == pytest.approx(1.0)
    line = np.column_stack([np.linspace(0, 1, 5), np.linspace(0, 1, 5)])
    assert brute_force_min_triangle(line).area == 0.0


def test_brute_force_matches_oracle():
    P = np.random.default_rng(4).uniform(0, 1, (40, 2))
    res = brute_force_min_triangle(P)
    assert res.area == pytest.approx(oracles.triangle_min(P.tolist()), rel=1e-12)
    assert res.recompute(P) == pytest.approx(res.area)


def test_brute_force_caps():
    with pytest.raises(ValueError):
        brute_force_min_triangle(np.zeros((61, 2)), k=4)
    with pytest.raises(ValueError):
        brute_force_min_triangle(CORNERS[:2])
    with pytest.raises(ValueError):
        brute_force_min_triangle(CORNERS, k=6)


def test_hull_area_interior_point():
    G = np.array([[[0, 0], [1, 0], [0, 1], [0.2, 0.2]]], float)
    assert hull_area(G)[0] == pytest.approx(0.5)


def test_pipeline_returns_genuine_triangle():
    # the pipeline needs 8 points; corners plus interior points keep the square's hull
    P = np.vstack([CORNERS, [[0.25, 0.5], [0.75, 0.5], [0.5, 0.25], [0.5, 0.75]]])
    res = small_triangle_pipeline(P)
    assert len(set(res.indices)) == 3
    assert res.area == triangle_area(*(P[i] for i in res.indices))


def test_pipeline_collinear_gives_zero():
    P = np.column_stack([np.linspace(0, 1, 16), np.full(16, 0.5)])
    assert small_triangle_pipeline(P).area == 0.0


def test_pipeline_guard():
    with pytest.raises(ValueError):
        small_triangle_pipeline(CORNERS)


@settings(max_examples=25, deadline=None)
@given(st.integers(8, 256), st.integers(0, 10_000))
def test_pipeline_between_brute_and_bound(n, seed):
    P = np.random.default_rng(seed).uniform(0, 1, (n, 2))
    res = small_triangle_pipeline(P)
    assert res.area >= brute_force_min_triangle(P).area
    assert res.area <= 0.5 * res.extra["base"] * res.extra["dist"] * (1 + 1e-9) + 1e-15
    assert res.area <= res.extra["bound"] * (1 + 1e-9) + 1e-15


# ------------------------------------------------------------ sweeps

def test_loglog_slope():
    ns = [1, 2, 4, 8]
    assert loglog_slope(ns, [n ** -1.5 for n in ns]) == pytest.approx(-1.5)


def test_grid_sweep_degenerate():
    res = exponent_sweep("grid", [16, 64, 256], trials=1)
    assert res.degenerate and math.isnan(res.slope)


def test_brute_slope_random_model():
    res = exponent_sweep("uniform_random", [32, 64, 128, 256], trials=15, seed=1, brute=True)
    assert abs(res.brute_slope + 3) <= 0.5


def test_sweep_determinism_and_workers():
    a = exponent_sweep("uniform_random", [64, 128, 256], trials=3, seed=7)
    b = exponent_sweep("uniform_random", [64, 128, 256], trials=3, seed=7, workers=2)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "n,trial,method,area,dist"


def test_sweep_guard():
    with pytest.raises(ValueError):
        exponent_sweep("uniform_random", [64, 128], trials=1)
    with pytest.raises(ValueError):
        exponent_sweep("nope", [64, 128, 256], trials=1)
