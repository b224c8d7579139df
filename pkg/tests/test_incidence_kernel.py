import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from incidence_lab.constructions import gen_uniform_random
from incidence_lab.incidence_kernel import (build_kernel, default_kernel, dyadic_range,
                                            hard_incidences, high_low_scan, incidence_profile,
                                            near_pairs, point_line_distance, smoothed_incidences)
from incidence_lab.phase_space import Configuration


def test_kernel_values():
    eta = default_kernel()
    assert eta(0.0) == 1.0
    assert eta(0.39) == 1.0
    assert eta(0.61) == 0.0
    assert eta(-0.39) == 1.0
    assert abs(eta.integral() - 1.0) <= 1e-6


def test_kernel_monotone_on_halfline():
    x = np.linspace(0, 1, 2001)
    assert np.all(np.diff(default_kernel()(x)) <= 1e-15)


def test_kernel_resolution_guard():
    with pytest.raises(ValueError):
        build_kernel(resolution=1e-2)


def test_single_pair_counts():
    P = np.array([[0.0, 0.0]])
    assert smoothed_incidences(P=P, L=np.array([[0.3, 0.0, 0.0]]), w=0.1) == 1.0
    assert smoothed_incidences(P=P, L=np.array([[0.0, 0.1, 0.0]]), w=0.1) == 0.0


def test_points_on_one_line():
    n = 17
    P = np.column_stack([np.linspace(-1, 1, n), np.full(n, 0.25)])
    L = np.array([[0.0, 0.25, 0.0]])
    for w in (1.0, 2.0 ** -4, 2.0 ** -10):
        assert smoothed_incidences(P=P, L=L, w=w) == n


def test_empty_lines():
    assert smoothed_incidences(P=np.zeros((3, 2)), L=np.zeros((0, 3)), w=0.5) == 0.0
    assert hard_incidences(np.zeros((3, 2)), np.zeros((0, 3)), 0.5) == 0


def test_corners_and_diagonals():
    # frozen from oracles.hard_count: 4
    P = np.array([[0, 0], [1, 0], [0, 1], [1, 1.0]])
    L = np.array([[0, 0, 1.0], [0, 1, -1.0]])
    assert hard_incidences(P, L, 1e-9) == 4


def test_huge_threshold():
    rng = np.random.default_rng(0)
    P = rng.uniform(-1, 1, (30, 2))
    L = rng.uniform(-1, 1, (20, 3))
    assert hard_incidences(P, L, 3.0) == 600


def test_distance_matches_oracle():
    rng = np.random.default_rng(1)
    P = rng.uniform(-1, 1, (20, 2))
    L = rng.uniform(-1, 1, (15, 3))
    D = point_line_distance(P, L)
    for i, j in [(0, 0), (3, 7), (19, 14)]:
        assert D[i, j] == pytest.approx(oracles.point_line_dist(P[i], L[j]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 10))
def test_near_pairs_complete(seed, k):
    rng = np.random.default_rng(seed)
    P = rng.uniform(-1, 1, (150, 2))
    L = rng.uniform(-1, 1, (120, 3))
    r = 2.0 ** -k
    got = sorted((int(i), int(j)) for a, b, _ in near_pairs(P, L, r) for i, j in zip(a, b))
    D = point_line_distance(P, L)
    want = sorted(zip(*map(lambda x: x.tolist(), np.nonzero(D <= r))))
    assert got == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10))
def test_sandwich(seed, k):
    X = gen_uniform_random(200, seed)
    w = 2.0 ** -k
    I = smoothed_incidences(X, w)
    assert hard_incidences(X.P, X.points, 0.4 * w) <= I <= hard_incidences(X.P, X.points, 0.6 * w)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10))
def test_fast_equals_naive(seed, k):
    X = gen_uniform_random(150, seed)
    w = 2.0 ** -k
    assert smoothed_incidences(X, w) == pytest.approx(smoothed_incidences(X, w, naive=True), rel=1e-12)


def test_steep_lines_use_naive_path():
    P = np.array([[0.0, 0.0]])
    L = np.array([[0.0, 0.0, 3.0]])
    assert smoothed_incidences(P=P, L=L, w=0.1) == 1.0


def test_duplication_leaves_B_unchanged():
    X = gen_uniform_random(300, 2)
    Y = Configuration(np.concatenate([X.points, X.points]), X.delta)
    ws = dyadic_range(2.0 ** -6, 2.0 ** -2)
    a = incidence_profile(X, ws).normalized
    b = incidence_profile(Y, ws).normalized
    assert np.allclose(a, b, rtol=1e-12)


def test_random_B_near_one():
    X = gen_uniform_random(2000, 0)
    prof = incidence_profile(X, dyadic_range(2.0 ** -8, 2.0 ** -3))
    assert all(0.2 <= B <= 5 for B in prof.normalized)


def test_high_low_rows():
    X = gen_uniform_random(500, 1)
    rep = high_low_scan(X, 2.0 ** -8, 2.0 ** -2)
    assert [r["w"] for r in rep.rows] == dyadic_range(2.0 ** -8, 2.0 ** -2)
    for r in rep.rows:
        assert math.isfinite(r["ratio"])
        assert r["hard_lo"] <= r["I"] <= r["hard_hi"]
        want = math.sqrt(r["M_pt"] / 500 * r["M_line"] / 500 * r["w"] ** -3)
        assert r["rhs_core"] == pytest.approx(want)
    assert rep.to_csv().splitlines()[0].startswith("w,I,B")


def test_high_low_single_square():
    # every point in one tiny square with one slope: M_pt = |P|
    rng = np.random.default_rng(3)
    pts = np.column_stack([rng.uniform(0, 2.0 ** -9, (100, 2)), np.zeros(100)])
    rep = high_low_scan(Configuration(pts), 2.0 ** -6, 2.0 ** -4)
    assert all(r["M_pt"] == 100 for r in rep.rows)


def test_high_low_degenerate():
    with pytest.raises(ValueError):
        high_low_scan(Configuration(np.zeros((0, 3))), 2.0 ** -4, 2.0 ** -2)


def test_w_range_guard():
    with pytest.raises(ValueError):
        smoothed_incidences(gen_uniform_random(5), 2.0)
