"""Generators for example configurations.

Every generator is a pure function of its parameters (and seed) and returns a
:class:`Configuration` whose metadata records how it was made.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .phase_space import Configuration

KINDS = ("uniform_random", "grid_slope_field", "ad_regular_product", "cluster_mix",
         "single_slope", "lines_through_points")

T_MENU = {"1": 1.0, "log2(3)": math.log2(3), "2": 2.0}
S_MENU = {"0": 0.0, "1/2": 0.5, "log3(2)": math.log(2, 3), "1": 1.0}


@dataclass
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        d = json.loads(text)
        return cls(d["kind"], d.get("params", {}))


def generate(spec: GeneratorSpec) -> Configuration:
    if spec.kind not in KINDS or spec.kind == "lines_through_points":
        raise ValueError(f"unknown generator kind {spec.kind!r}")
    fn = {"uniform_random": gen_uniform_random, "grid_slope_field": gen_grid_slope_field,
          "ad_regular_product": gen_ad_regular_product, "cluster_mix": gen_cluster_mix,
          "single_slope": gen_single_slope}[spec.kind]
    return fn(**spec.params)


def _dyadic_floor(x: float) -> float:
    return 2.0 ** math.floor(math.log2(x))


def min_separation(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return math.inf
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


def _delta_from(pts: np.ndarray) -> float:
    sep = min_separation(pts)
    if not math.isfinite(sep) or sep >= 1:
        return 1.0
    if sep <= 0:
        raise ValueError("configuration has repeated points")
    return max(_dyadic_floor(sep), 2.0 ** -40)


def gen_uniform_random(n: int, seed: int = 0) -> Configuration:
    """n i.i.d. uniform points of [-1, 1]^3."""
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n, 3))
    return Configuration(pts, _delta_from(pts), {"generator": "uniform_random", "n": n, "seed": seed})


def _grid(delta: float) -> np.ndarray:
    k = int(round(1.0 / delta))
    return np.arange(-k, k + 1) * delta


def gen_grid_slope_field(delta: float, phi="identity", check: bool = True) -> Configuration:
    """X = {(x, y, phi(x, y)) : (x, y) in delta Z^2 cap [-1, 1]^2}.

    ``phi`` is ``"identity"`` (phi(x, y) = x), a vectorized callable, or a
    table of values on the grid (shape (2/delta+1, 2/delta+1), indexed [x, y]).
    """
    if not (delta >= 2.0 ** -16 and math.frexp(delta)[0] == 0.5 and delta <= 1):
        raise ValueError("delta must be dyadic and >= 2^-16")
    g = _grid(delta)
    n = g.size
    pts = np.empty((n * n, 3))
    pts[:, 0] = np.repeat(g, n)
    pts[:, 1] = np.tile(g, n)
    name = phi if isinstance(phi, str) else "custom"
    if isinstance(phi, str):
        if phi != "identity":
            raise ValueError(f"unknown slope field {phi!r}")
        pts[:, 2] = pts[:, 0]
    else:
        if callable(phi):
            vals = np.asarray(phi(pts[:, 0], pts[:, 1]), dtype=np.float64).reshape(-1)
        else:
            vals = np.asarray(phi, dtype=np.float64).reshape(-1)
        if vals.size != n * n:
            raise ValueError("slope table has the wrong size")
        if np.abs(vals).max() > 1:
            raise ValueError("slopes must lie in [-1, 1]")
        pts[:, 2] = vals
        if check:
            _check_nondegenerate(vals.reshape(n, n), delta)
    return Configuration(pts, delta, {"generator": "grid_slope_field", "delta": delta, "phi": name})


def _check_nondegenerate(F: np.ndarray, delta: float) -> None:
    """|phi_x + phi phi_y| in [1/4, 4] by central differences."""
    if F.shape[0] < 3:
        return
    fx = (F[2:, 1:-1] - F[:-2, 1:-1]) / (2 * delta)
    fy = (F[1:-1, 2:] - F[1:-1, :-2]) / (2 * delta)
    val = np.abs(fx + F[1:-1, 1:-1] * fy)
    if val.min() < 0.25 or val.max() > 4:
        raise ValueError(f"slope field degenerate: |(1, phi).grad phi| ranges over "
                         f"[{val.min():.3g}, {val.max():.3g}]")


# ------------------------------------------------------------ AD-regular

def _menu_value(x, menu, what):
    for key, val in menu.items():
        if (isinstance(x, str) and x == key) or (not isinstance(x, str) and abs(float(x) - val) < 1e-9):
            return key
    raise ValueError(f"{what} exponent {x!r} not realizable; choose from {list(menu)}")


def ad_point_set(t_exponent, delta: float) -> np.ndarray:
    """Digit-restricted subsets of [-1, 1]^2 at spacing delta."""
    key = _menu_value(t_exponent, T_MENU, "point")
    levels = int(round(math.log2(2.0 / delta)))
    g = _grid(delta)
    if key == "2":
        X, Y = np.meshgrid(g, g, indexing="ij")
        return np.stack([X.ravel(), Y.ravel()], axis=1)
    if key == "1":
        return np.stack([g, np.zeros_like(g)], axis=1)
    # Sierpinski corner set: binary digits (bx, by) never both 1
    cells = np.zeros((1, 2), dtype=np.int64)
    for _ in range(levels):
        kids = [cells * 2 + np.array(o) for o in ((0, 0), (1, 0), (0, 1))]
        cells = np.concatenate(kids)
    return -1.0 + cells * delta


def slope_set(s_exponent, delta: float, rng=None) -> np.ndarray:
    """Digit-restricted slope sets in [-1, 1] at spacing about delta."""
    key = _menu_value(s_exponent, S_MENU, "slope")
    if key == "0":
        if rng is None:
            return np.array([0.0])
        return np.array([rng.integers(-int(1 / delta), int(1 / delta) + 1) * delta])
    if key == "1":
        return _grid(delta)
    if key == "1/2":
        # base 4, keep two of four digits per level (chosen per level by rng)
        levels = int(round(math.log(2.0 / delta, 4)))
        vals = np.zeros(1, dtype=np.int64)
        for _ in range(levels):
            keep = (0, 2) if rng is None else tuple(sorted(rng.choice(4, 2, replace=False)))
            vals = np.concatenate([vals * 4 + k for k in keep])
        return -1.0 + vals * (2.0 / 4 ** levels)
    # middle-thirds Cantor set, base 3 (spacing 2*3^-k, not dyadic)
    levels = max(1, int(round(math.log(2.0 / delta, 3))))
    vals = np.zeros(1, dtype=np.int64)
    for _ in range(levels):
        vals = np.concatenate([vals * 3, vals * 3 + 2])
    return -1.0 + vals * (2.0 / 3 ** levels)


def gen_ad_regular_product(t_exponent, s_exponent, delta: float, seed: int = 0,
                           check: bool = True) -> Configuration:
    """Point set of dimension t, each point carrying a slope set of dimension s."""
    rng = np.random.default_rng(seed)
    P = ad_point_set(t_exponent, delta)
    slopes = [slope_set(s_exponent, delta, rng) for _ in range(len(P))]
    X = gen_lines_through_points(P, slopes)
    if check:
        C = ad_regularity_constant(P, T_MENU[_menu_value(t_exponent, T_MENU, "point")], delta)
        if C > 16:
            raise RuntimeError(f"AD-regularity check failed (constant {C:.3g} > 16)")
    md = {"generator": "ad_regular_product", "t": str(t_exponent), "s": str(s_exponent),
          "delta": delta, "seed": seed}
    return Configuration(X.points, delta, md)


def ad_regularity_constant(P: np.ndarray, t: float, delta: float) -> float:
    """Smallest C with C^-1 <= |P cap B_w(p)| / (w^t |P|) <= C (sup-norm balls).

    Scanned for every p in P and every dyadic w in [delta, 1].
    """
    P = np.asarray(P, float)
    tree = cKDTree(P)
    n = len(P)
    worst = 1.0
    w = 1.0
    while w >= delta:
        cnt = np.asarray(tree.query_ball_point(P, w, p=np.inf, return_length=True))
        ratio = cnt / (w ** t * n)
        worst = max(worst, float(ratio.max()), float(1.0 / ratio.min()))
        w /= 2
    return worst


def gen_lines_through_points(P, slope_sets) -> Configuration:
    """Cartesian assembly omega = (p, slope) for every slope attached to p."""
    P = np.asarray(P, float).reshape(-1, 2)
    if len(slope_sets) != len(P):
        raise ValueError("need one slope set per point")
    counts = np.array([len(np.atleast_1d(s)) for s in slope_sets], dtype=np.int64)
    sl = np.concatenate([np.atleast_1d(np.asarray(s, float)) for s in slope_sets]) if len(P) else np.zeros(0)
    if sl.size and np.abs(sl).max() > 1:
        raise ValueError("slopes must lie in [-1, 1]")
    pts = np.column_stack([np.repeat(P, counts, axis=0), sl])
    delta = _delta_from(pts) if len(pts) > 1 else 1.0
    return Configuration(pts, delta, {"generator": "lines_through_points"})


def gen_cluster_mix(n_cluster: int, n_dust: int, radius: float = 2.0 ** -6, seed: int = 0,
                    center=(0.25, 0.25, 0.25)) -> Configuration:
    """A dense cluster in a small cube plus sparse uniform dust."""
    rng = np.random.default_rng(seed)
    cl = np.asarray(center) + rng.uniform(-radius, radius, size=(n_cluster, 3))
    dust = rng.uniform(-1, 1, size=(n_dust, 3))
    pts = np.concatenate([cl, dust])
    return Configuration(pts, _delta_from(pts), {"generator": "cluster_mix", "seed": seed,
                                                 "n_cluster": n_cluster, "n_dust": n_dust})


def gen_single_slope(n: int, slope: float = 0.0, seed: int = 0) -> Configuration:
    """Random points all carrying the same slope."""
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(-1, 1, size=(n, 2)), np.full(n, float(slope))])
    return Configuration(pts, _delta_from(pts), {"generator": "single_slope", "seed": seed})


def gen_lattice(delta: float) -> Configuration:
    """Full lattice delta Z^3 cap [-1, 1]^3."""
    g = _grid(delta)
    A, B, C = np.meshgrid(g, g, g, indexing="ij")
    pts = np.stack([A.ravel(), B.ravel(), C.ravel()], axis=1)
    return Configuration(pts, delta, {"generator": "lattice", "delta": delta})

