"""Branching functions on the grid D_m and the functionals built from them.

All grid coordinates are integers i meaning i/m.  ``values[i, j, k]`` holds
f(i/m, j/m, k/m) with the scale ordering u = delta^x, v = delta^z, w = delta^y,
and NaN outside D_m = {z <= min(1, x + y)}.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .phase_space import Configuration, ScaleTriple, covering_number


def tolerance_for(K: float, m: int, T: int) -> float:
    """Slack used in place of the o(1) terms: 6 log2(K) / (m T) + 3 / m."""
    return 6.0 * math.log2(max(K, 1.0)) / (m * T) + 3.0 / m


def domain_mask(m: int) -> np.ndarray:
    i, j, k = np.indices((m + 1,) * 3)
    return k <= np.minimum(m, i + j)


@dataclass
class BranchingFunction:
    m: int
    T: int
    values: np.ndarray = field(repr=False)
    tolerance: float
    K: float = 1.0
    certified: bool = False
    flags: list = field(default_factory=list)

    @property
    def delta(self) -> float:
        return 2.0 ** (-self.m * self.T)

    def f(self, i, j, k) -> float:
        m = self.m
        if min(i, j, k) < 0 or max(i, j) > m or k > min(m, i + j):
            return math.nan
        return float(self.values[i, j, k])

    def f2(self, i, j) -> float:
        """f(x, y) = f(x, y, x + y)."""
        return self.f(i, j, i + j)

    def rel(self, di, dj, dk, i, j) -> float:
        """f(x', y', z'; x, y) = f(x + x', y + y', x + y + z') - f(x, y)."""
        if i + j > self.m:
            return math.nan
        return self.f(i + di, j + dj, i + j + dk) - self.f2(i, j)

    def rel2(self, di, dj, i, j) -> float:
        return self.rel(di, dj, di + dj, i, j)

    def points(self):
        """Grid points of D_m as integer triples."""
        return [tuple(p) for p in np.argwhere(domain_mask(self.m))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "y", "z", "f"])
        m = self.m
        for i, j, k in self.points():
            wr.writerow([i / m, j / m, k / m, repr(float(self.values[i, j, k]))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        m = self.m
        return {"m": m, "T": self.T, "delta": self.delta, "tolerance": self.tolerance,
                "K": self.K, "certified": self.certified, "flags": list(self.flags),
                "values": [[i / m, j / m, k / m, float(self.values[i, j, k])]
                           for i, j, k in self.points()]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "BranchingFunction":
        m = int(d["m"])
        vals = np.full((m + 1,) * 3, np.nan)
        for x, y, z, v in d["values"]:
            vals[round(x * m), round(y * m), round(z * m)] = v
        return cls(m, int(d["T"]), vals, float(d["tolerance"]), float(d["K"]),
                   bool(d["certified"]), list(d.get("flags", [])))


def from_function(fn, m: int, T: int = 1, tolerance: float | None = None,
                  K: float = 1.0) -> BranchingFunction:
    """Tabulate a callable fn(x, y, z) on D_m (used for synthetic grids)."""
    vals = np.full((m + 1,) * 3, np.nan)
    for i, j, k in np.argwhere(domain_mask(m)):
        vals[i, j, k] = fn(i / m, j / m, k / m)
    tol = tolerance_for(K, m, T) if tolerance is None else tolerance
    return BranchingFunction(m, T, vals, tol, K, True, ["synthetic"])


def linear_branching(m: int, alpha: float, beta: float, gamma: float = 1.0,
                     T: int = 1, tolerance: float | None = None) -> BranchingFunction:
    """f(x, y, z) = alpha x + beta y + gamma (z - x - y), so f(x, y) = alpha x + beta y."""
    return from_function(lambda x, y, z: alpha * x + beta * y + gamma * (z - x - y),
                         m, T, tolerance)


def compute_branching(X: Configuration, m: int, T: int, certificate=None,
                      triples: str = "all") -> BranchingFunction:
    """f(x, y, z) = log_{1/delta} |X|_{delta^x x delta^z x delta^y} over D_m.

    ``triples="diagonal"`` fills only the points (x, y, x + y); an (n, 3) array
    of grid indices fills just those points.  Without a uniformity
    certificate the tolerance uses K = 1 and the result is flagged.
    """
    if m < 1 or T < 1:
        raise ValueError("m and T must be positive")
    delta = 2.0 ** (-m * T)
    flags = []
    if not math.isclose(X.delta, delta):
        flags.append(f"delta_mismatch: X.delta={X.delta!r}, 2^-mT={delta!r}")
    if certificate is None:
        K = 1.0
        flags.append("uncertified")
    else:
        K = float(certificate.K_empirical)
        want = {2.0 ** (-j * T) for j in range(m + 1)}
        have = set()
        for s in certificate.scales:
            have.update(s.sides())
        if not want <= have:
            flags.append("certificate_scales_mismatch")
    mask = domain_mask(m)
    if isinstance(triples, str):
        if triples == "diagonal":
            i, j, k = np.indices(mask.shape)
            mask &= k == i + j
        elif triples != "all":
            raise ValueError("triples must be 'all', 'diagonal' or an index array")
    else:
        idx = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        if idx.min(initial=0) < 0 or idx.max(initial=0) > m:
            raise ValueError("triple index out of range")
        sel = np.zeros_like(mask)
        sel[tuple(idx.T)] = True
        mask &= sel
    vals = np.full((m + 1,) * 3, np.nan)
    logd = math.log(1.0 / delta)
    for i, j, k in np.argwhere(mask):
        s = ScaleTriple(2.0 ** (-i * T), 2.0 ** (-k * T), 2.0 ** (-j * T))
        n = covering_number(X, s)
        vals[i, j, k] = math.log(n) / logd if n else 0.0
    return BranchingFunction(m, T, vals, tolerance_for(K, m, T), K,
                             certificate is not None, flags)


# ------------------------------------------------------------- Lemma checks

def _report(name, viol, where, tol, n):
    worst = float(viol) if n else 0.0
    return {"check": name, "max_violation": worst, "where": where,
            "n_checked": int(n), "tolerance": tol, "passes": worst <= tol}


def _domain_list(f: BranchingFunction) -> np.ndarray:
    return np.argwhere(domain_mask(f.m) & ~np.isnan(f.values))


def check_lipschitz_monotone(f: BranchingFunction) -> dict:
    """0 <= f(b) - f(a) <= |b - a|_1 for all comparable a <= b in D_m."""
    pts = _domain_list(f)
    vals = f.values[tuple(pts.T)]
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    np.fill_diagonal(le, False)
    ia, ib = np.nonzero(le)
    diff = vals[ib] - vals[ia]
    step = (pts[ib] - pts[ia]).sum(axis=1) / f.m
    v = np.maximum(-diff, diff - step)
    if v.size == 0:
        return _report("lipschitz_monotone", 0.0, None, f.tolerance, 0)
    k = int(np.argmax(v))
    where = {"a": (pts[ia[k]] / f.m).tolist(), "b": (pts[ib[k]] / f.m).tolist()}
    rep = _report("lipschitz_monotone", max(v[k], 0.0), where, f.tolerance, v.size)
    rep["max_monotone_violation"] = float(max((-diff).max(), 0.0))
    rep["max_lipschitz_violation"] = float(max((diff - step).max(), 0.0))
    return rep


def check_submodular(f: BranchingFunction, max_pairs: int = 4_000_000, seed: int = 0) -> dict:
    """f(max(a, b)) + f(min(a, b)) - f(a) - f(b), maximized over pairs in D_m."""
    pts = _domain_list(f)
    n = len(pts)
    if n * n <= max_pairs:
        ia, ib = np.triu_indices(n, 1)
    else:
        rng = np.random.default_rng(seed)
        ia = rng.integers(0, n, max_pairs)
        ib = rng.integers(0, n, max_pairs)
    A, B = pts[ia], pts[ib]
    hi, lo = np.maximum(A, B), np.minimum(A, B)
    m = f.m

    def ok(p):
        return p[:, 2] <= np.minimum(m, p[:, 0] + p[:, 1])

    good = ok(hi) & ok(lo)
    hi, lo, A, B = hi[good], lo[good], A[good], B[good]
    F = f.values
    g = lambda p: F[p[:, 0], p[:, 1], p[:, 2]]
    lhs = g(hi) + g(lo) - g(A) - g(B)
    keep = ~np.isnan(lhs)
    lhs, A, B = lhs[keep], A[keep], B[keep]
    if lhs.size == 0:
        return _report("submodular", 0.0, None, f.tolerance, 0)
    k = int(np.argmax(lhs))
    where = {"a": (A[k] / m).tolist(), "b": (B[k] / m).tolist()}
    return _report("submodular", max(lhs[k], 0.0), where, f.tolerance, lhs.size)


# ------------------------------------------------------- direction numbers

@dataclass
class DirectionNumbers:
    """d[t, x, y] = f(0, t, 0; x, y) and dv[t, x, y] = f(t, 0, 0; x, y); NaN if undefined."""

    m: int
    d: np.ndarray = field(repr=False)
    dv: np.ndarray = field(repr=False)


def direction_numbers(f: BranchingFunction) -> DirectionNumbers:
    m = f.m
    d = np.full((m + 1,) * 3, np.nan)
    dv = np.full((m + 1,) * 3, np.nan)
    for t, x, y in itertools.product(range(m + 1), repeat=3):
        if x + y > m:
            continue
        d[t, x, y] = f.rel(0, t, 0, x, y)
        dv[t, x, y] = f.rel(t, 0, 0, x, y)
    return DirectionNumbers(m, d, dv)


def _shift(A, axis, k):
    """(A[.. i + k ..], A[.. i ..]) aligned, NaN-padded."""
    out = np.full_like(A, np.nan)
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    src[axis] = slice(k, None)
    dst[axis] = slice(0, A.shape[axis] - k)
    out[tuple(dst)] = A[tuple(src)]
    return out


def _worst(viol, m):
    """max of a NaN-padded violation grid and its (t, x, y) location."""
    if np.all(np.isnan(viol)):
        return 0.0, None
    k = np.unravel_index(np.nanargmax(viol), viol.shape)
    return max(float(viol[k]), 0.0), [c / m for c in k]


def check_direction_inequalities(dn: DirectionNumbers, f: BranchingFunction) -> dict:
    """Superadditivity (i), the lower bound (ii), the Lipschitz box (iii) and b_from_dir.

    The dual superadditivity is checked as dv(t + s; x, y) >= dv(t; x, y) + dv(s; x + t, y).
    """
    m, tol = dn.m, f.tolerance
    d, dv = dn.d, dn.dv
    items = {}

    def put(name, grids):
        best, where = 0.0, None
        for g in grids:
            v, w = _worst(g, m)
            if where is None or v > best:
                best, where = v, w
        items[name] = {"max_violation": best, "where": where, "passes": best <= tol}

    # (i) superadditivity, grids indexed (t, s, x, y)
    g = np.full((m + 1,) * 4, np.nan)
    gv = np.full((m + 1,) * 4, np.nan)
    for t in range(1, m + 1):
        for s in range(1, m + 1 - t):
            for x in range(m + 1):
                for y in range(m + 1 - x):
                    if x + y + t <= m:
                        g[t, s, x, y] = d[t, x, y] + d[s, x, y + t] - d[t + s, x, y]
                        gv[t, s, x, y] = dv[t, x, y] + dv[s, x + t, y] - dv[t + s, x, y]
    sup, supv = [g], [gv]
    put("superadditive", sup)
    put("superadditive_dual", supv)

    # (ii) d(t; x, y) >= f(0, t; x, y) - t and its dual
    low = np.full_like(d, np.nan)
    lowv = np.full_like(d, np.nan)
    for t, x, y in itertools.product(range(m + 1), repeat=3):
        if x + y > m:
            continue
        low[t, x, y] = f.rel2(0, t, x, y) - t / m - d[t, x, y]
        lowv[t, x, y] = f.rel2(t, 0, x, y) - t / m - dv[t, x, y]
    put("lower_bound", [low])
    put("lower_bound_dual", [lowv])

    # (iii) Lipschitz / monotone box
    box, boxv = [], []
    for k in range(1, m + 1):
        step = k / m
        dt = _shift(d, 0, k) - d
        box += [-dt, dt - step]
        dx = d - _shift(d, 1, k)
        box += [-dx, dx - 2 * step]
        dy = _shift(d, 2, k) - d
        box += [np.abs(dy) - 2 * step]
        dtv = _shift(dv, 0, k) - dv
        boxv += [-dtv, dtv - step]
        dxv = dv - _shift(dv, 1, k)
        boxv += [np.abs(dxv) - 2 * step]
        dyv = dv - _shift(dv, 2, k)
        boxv += [-dyv, dyv - 2 * step]
    # 0 <= d(t; x, y) <= t
    tt = (np.arange(m + 1) / m)[:, None, None]
    box += [-d, d - tt]
    boxv += [-dv, dv - tt]
    put("lipschitz_box", box)
    put("lipschitz_box_dual", boxv)

    # b(t; x, y) >= d(t; x + t, y) - d(t; x, y) and the dual form
    b, _ = be_functionals(f)
    bd = np.full_like(d, np.nan)
    bdv = np.full_like(d, np.nan)
    for t, x, y in itertools.product(range(m + 1), repeat=3):
        if np.isnan(b[t, x, y]):
            continue
        bd[t, x, y] = d[t, x + t, y] - d[t, x, y] - b[t, x, y]
        bdv[t, x, y] = dv[t, x, y + t] - dv[t, x, y] - b[t, x, y]
    put("b_from_dir", [bd])
    put("b_from_dir_dual", [bdv])

    worst = max(v["max_violation"] for v in items.values())
    return {"check": "direction", "checks": items, "max_violation": worst, "tolerance": tol,
            "passes": worst <= tol}


# ------------------------------------------------------------ b and e

def be_functionals(f: BranchingFunction):
    """b[t, x, y] and e[s, x, y] on the grid; NaN where an argument leaves D_m."""
    m = f.m
    b = np.full((m + 1,) * 3, np.nan)
    e = np.full((m + 1,) * 3, np.nan)
    for t, x, y in itertools.product(range(m + 1), repeat=3):
        if x + y + t > m:
            continue
        h = t / m
        b[t, x, y] = f.rel(t, t, t, x, y) - (f.rel2(t, 0, x, y) + f.rel2(0, t, x, y) - h)
        e[t, x, y] = 0.5 * (f.rel2(t, 0, x, y) + f.rel2(0, t, x, y) - 3 * h)
    return b, e


@dataclass
class EffectiveTriple:
    t: float
    x: float
    y: float
    c1: float
    c2: float
    b_value: float
    min_e_value: float
    margin: float  # min over s of b + e(s)

    def to_dict(self):
        return dict(self.__dict__)


def _triple_margin(b, e, m, t, x, y):
    """min_{t <= s <= 1 - (x + y)} b(t; x, y) + e(s; x, y), with the minimizing e."""
    s_hi = m - x - y
    if t < 1 or t > s_hi or np.isnan(b[t, x, y]):
        return math.nan, math.nan
    es = e[t:s_hi + 1, x, y]
    return float(b[t, x, y] + es.min()), float(es.min())


def effective_margins(f: BranchingFunction, c2: float):
    """{(t, x, y): min_s b + e} over grid triples with max(t, x, y) <= c2."""
    b, e = be_functionals(f)
    m = f.m
    lim = int(math.floor(c2 * m + 1e-9))
    out = {}
    for t, x, y in itertools.product(range(1, lim + 1), range(lim + 1), range(lim + 1)):
        marg, _ = _triple_margin(b, e, m, t, x, y)
        if not math.isnan(marg):
            out[(t, x, y)] = marg
    return out


def effective_support(m: int, c2: float) -> np.ndarray:
    """Grid points read by the effective-triple search: the diagonal plus
    (x + t, y + t, x + y + t) for max(t, x, y) <= c2."""
    lim = int(math.floor(c2 * m + 1e-9))
    pts = {(i, j, i + j) for i in range(m + 1) for j in range(m + 1 - i)}
    for t, x, y in itertools.product(range(1, lim + 1), range(lim + 1), range(lim + 1)):
        if x + y + t <= m:
            pts.add((x + t, y + t, x + y + t))
    return np.array(sorted(pts), dtype=np.int64)


def barrier_value(f: BranchingFunction, c2: float) -> float:
    """sup over admissible triples of min_s (b + e); effective triples exist iff c1 <= this."""
    vals = effective_margins(f, c2).values()
    return max(vals) if vals else -math.inf


def verify_effective(f: BranchingFunction, triple: EffectiveTriple) -> bool:
    """Re-check b + e(s) >= c1 over the whole s-range and max(t, x, y) <= c2."""
    m = f.m
    t, x, y = (int(round(v * m)) for v in (triple.t, triple.x, triple.y))
    if max(t, x, y) > triple.c2 * m + 1e-9:
        return False
    b, e = be_functionals(f)
    if t < 1 or x + y + t > m:
        return False
    return all(b[t, x, y] + e[s, x, y] >= triple.c1 for s in range(t, m - x - y + 1))


def find_effective_triple(f: BranchingFunction, c1: float, c2: float) -> EffectiveTriple | None:
    """First (c1, c2)-effective grid triple, scanning by max(t, x, y) then t, x, y."""
    b, e = be_functionals(f)
    m = f.m
    lim = int(math.floor(c2 * m + 1e-9))
    cands = sorted(itertools.product(range(1, lim + 1), range(lim + 1), range(lim + 1)),
                   key=lambda p: (max(p), p))
    for t, x, y in cands:
        marg, emin = _triple_margin(b, e, m, t, x, y)
        if not math.isnan(marg) and marg >= c1:
            trip = EffectiveTriple(t / m, x / m, y / m, c1, c2, float(b[t, x, y]), emin, marg)
            if not verify_effective(f, trip):
                raise AssertionError("effective triple failed re-verification")
            return trip
    return None


# ------------------------------------------------------ directional stability

@dataclass
class StabilityScan:
    t: float
    rho: float
    stable: np.ndarray = field(repr=False)  # bool grid over (x, y); False where undefined
    candidates: list                        # x-values on the y = 0 row
    found: list                             # stable candidates
    premise: bool | None                    # d(t; 0, 0) - d(t; K t, 0) <= rho K t

    @property
    def telescoping_ok(self) -> bool:
        return not self.premise or bool(self.found)


def directional_stability_scan(dn: DirectionNumbers, t: int, rho: float) -> StabilityScan:
    """(x, y) with d(t; x, y) - d(t; x + t, y) <= rho t; t is a grid index."""
    m = dn.m
    if not 1 <= t <= m:
        raise ValueError("t must be a grid index in [1, m]")
    h = t / m
    d = dn.d[t]
    stable = np.zeros((m + 1, m + 1), dtype=bool)
    for x in range(m + 1 - t):
        for y in range(m + 1):
            if x + t + y <= m and not np.isnan(d[x, y]) and not np.isnan(d[x + t, y]):
                stable[x, y] = d[x, y] - d[x + t, y] <= rho * h + 1e-12
    K = math.ceil(1.0 / rho - 1e-12)
    cands = [j * t for j in range(K + 1)]
    premise = None
    found = []
    if K * t <= m:
        premise = bool(d[0, 0] - d[K * t, 0] <= rho * K * h + 1e-12)
        found = [c / m for c in cands[:-1] if stable[c, 0]]
    return StabilityScan(h, rho, stable, [c / m for c in cands], found, premise)
