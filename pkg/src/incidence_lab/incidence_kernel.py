"""Smoothed incidence counts and the high-low scan.

Lines are given in phase form ``(a, b, c)``: the line of slope ``c`` through
``(a, b)``.  The point-line distance is the vertical distance divided by
``sqrt(1 + c^2)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .phase_space import Configuration, ScaleTriple, concentration

BUMP_RADIUS = 1.0 / 50
CSV_COLUMNS = ["w", "I", "B", "hard_lo", "hard_hi", "M_pt", "M_line", "lhs", "rhs_core", "ratio"]


# ----------------------------------------------------------------- kernel

def _bump(x, radius):
    y = np.zeros_like(x)
    inside = np.abs(x) < radius
    r = x[inside] / radius
    y[inside] = np.exp(-1.0 / (1.0 - r * r))
    return y


@dataclass(frozen=True)
class SmoothingKernel:
    """eta tabulated on [0, 1] (it is even); linear interpolation between nodes."""

    resolution: float
    table: np.ndarray = field(repr=False)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=np.float64))
        nodes = np.arange(self.table.size) * self.resolution
        out = np.interp(x, nodes, self.table, right=0.0)
        return out if out.ndim else float(out)

    def integral(self) -> float:
        # eta is piecewise linear between nodes, so the trapezoid rule is exact
        return 2.0 * float(integrate.trapezoid(self.table, dx=self.resolution))


def build_kernel(resolution: float = 1e-4, fine: int = 4000) -> SmoothingKernel:
    """eta = 1_[-1/2,1/2] * kappa * kappa_{1/2}.

    kappa is the normalized bump exp(-1/(1-(50x)^2)) and kappa_{1/2} its
    2x-compressed copy.  eta(t) = F(t + 1/2) - F(t - 1/2) where F is the CDF of
    kappa * kappa_{1/2}.
    """
    if resolution > 1e-3:
        raise ValueError("resolution must be <= 1e-3")
    R = BUMP_RADIUS
    h = R / fine
    xs = np.arange(-fine, fine + 1) * h
    k1 = _bump(xs, R)
    k1 /= integrate.simpson(k1, dx=h)
    xs2 = np.arange(-fine // 2, fine // 2 + 1) * h
    k2 = _bump(xs2, R / 2)
    k2 /= integrate.simpson(k2, dx=h)
    rho = np.convolve(k1, k2) * h  # density of kappa * kappa_{1/2}
    grid = (np.arange(rho.size) - (rho.size - 1) // 2) * h
    F = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1])) * h])
    F /= F[-1]
    # symmetrize the CDF: F(-x) = 1 - F(x)
    F = 0.5 * (F + 1.0 - F[::-1])

    nodes = np.arange(int(round(1.0 / resolution)) + 1) * resolution
    hi = np.interp(nodes + 0.5, grid, F, left=0.0, right=1.0)
    lo = np.interp(nodes - 0.5, grid, F, left=0.0, right=1.0)
    table = np.clip(hi - lo, 0.0, 1.0)
    table[nodes <= 0.5 - 1.5 * R] = 1.0
    table[nodes >= 0.5 + 1.5 * R] = 0.0
    table.setflags(write=False)
    return SmoothingKernel(resolution, table)


_DEFAULT_KERNEL = None


def default_kernel() -> SmoothingKernel:
    global _DEFAULT_KERNEL
    if _DEFAULT_KERNEL is None:
        _DEFAULT_KERNEL = build_kernel()
    return _DEFAULT_KERNEL


# ------------------------------------------------------------- distances

def _split(X=None, P=None, L=None):
    if X is not None:
        pts = X.points if isinstance(X, Configuration) else np.asarray(X, float).reshape(-1, 3)
        return pts[:, :2], pts
    return np.asarray(P, float).reshape(-1, 2), np.asarray(L, float).reshape(-1, 3)


def point_line_distance(P, L) -> np.ndarray:
    """Full |P| x |L| distance matrix (naive oracle)."""
    P = np.asarray(P, float).reshape(-1, 2)
    L = np.asarray(L, float).reshape(-1, 3)
    vert = P[:, None, 1] - (L[None, :, 1] + L[None, :, 2] * (P[:, None, 0] - L[None, :, 0]))
    return np.abs(vert) / np.sqrt(1.0 + L[None, :, 2] ** 2)


def near_pairs(P, L, radius: float, strip: float | None = None):
    """All (i, j) with d(P_i, L_j) <= radius, via x-strips and sorted intercepts.

    Lines must have |slope| <= 1.  Yields (i, j, dist) in a fixed order.
    """
    P = np.asarray(P, float).reshape(-1, 2)
    L = np.asarray(L, float).reshape(-1, 3)
    if P.shape[0] == 0 or L.shape[0] == 0:
        return
    cmax = float(np.abs(L[:, 2]).max())
    if strip is None:
        # wide strips amortize the per-strip sort; the extra slack costs little
        strip = max(radius, 2.0 ** -5)
    sx = np.floor(P[:, 0] / strip).astype(np.int64)
    order = np.lexsort((P[:, 1], sx))
    sx_sorted = sx[order]
    bounds = np.flatnonzero(np.diff(sx_sorted)) + 1
    starts = np.concatenate([[0], bounds])
    ends = np.concatenate([bounds, [len(order)]])
    vrad = radius * math.sqrt(1.0 + cmax * cmax)
    slack = vrad + cmax * strip / 2 + 1e-12
    for s, e in zip(starts, ends):
        idx = order[s:e]
        xc = (sx_sorted[s] + 0.5) * strip
        h = L[:, 1] + L[:, 2] * (xc - L[:, 0])
        lo_ord = np.argsort(h, kind="stable")
        hs = h[lo_ord]
        py = P[idx, 1]
        left = np.searchsorted(hs, py - slack, side="left")
        right = np.searchsorted(hs, py + slack, side="right")
        cnt = right - left
        if cnt.sum() == 0:
            continue
        pi = np.repeat(idx, cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        lj = lo_ord[np.repeat(left, cnt) + offs]
        d = np.abs(P[pi, 1] - (L[lj, 1] + L[lj, 2] * (P[pi, 0] - L[lj, 0]))) / np.sqrt(1 + L[lj, 2] ** 2)
        keep = d <= radius
        yield pi[keep], lj[keep], d[keep]


def _all_near(P, L, radius):
    parts = list(near_pairs(P, L, radius))
    if not parts:
        e = np.zeros(0, dtype=np.int64)
        return e, e, np.zeros(0)
    i, j, d = (np.concatenate(c) for c in zip(*parts))
    order = np.lexsort((j, i))
    return i[order], j[order], d[order]


def smoothed_incidences(X=None, w: float = 1.0, kernel: SmoothingKernel | None = None,
                        P=None, L=None, naive: bool = False) -> float:
    """I(w; P, L) = sum over pairs of eta(d(p, l) / w)."""
    if not (0 < w <= 1):
        raise ValueError("w must lie in (0, 1]")
    kernel = kernel or default_kernel()
    P, L = _split(X, P, L)
    if P.shape[0] == 0 or L.shape[0] == 0:
        return 0.0
    if naive or np.abs(L[:, 2]).max() > 1:
        return float(np.sum(kernel(point_line_distance(P, L) / w)))
    _, _, d = _all_near(P, L, 0.6 * w)
    return float(np.sum(kernel(d / w)))


def hard_incidences(P, L, threshold: float) -> int:
    """#{(p, l): d(p, l) <= threshold} with the Euclidean point-line distance."""
    P = np.asarray(P, float).reshape(-1, 2)
    L = np.asarray(L, float).reshape(-1, 3)
    if P.shape[0] == 0 or L.shape[0] == 0:
        return 0
    if threshold >= 3 and np.all(np.abs(P) <= 1) and np.all(np.abs(L) <= 1):
        return P.shape[0] * L.shape[0]
    if np.abs(L[:, 2]).max() > 1 or threshold > 0.5:
        total = 0
        for k in range(0, P.shape[0], 512):
            total += int(np.count_nonzero(point_line_distance(P[k:k + 512], L) <= threshold))
        return total
    return sum(int(i.size) for i, _, _ in near_pairs(P, L, threshold))


# ---------------------------------------------------------------- profiles

@dataclass
class IncidenceProfile:
    scales: list
    smoothed: list
    normalized: list
    hard_lo: list
    hard_hi: list


def _incidence_stats(P, L, w, kernel):
    """I(w), hard(0.4w), hard(0.6w) from one pass over near pairs."""
    if np.abs(L[:, 2]).max() > 1:
        D = point_line_distance(P, L)
        return float(np.sum(kernel(D / w))), int((D <= 0.4 * w).sum()), int((D <= 0.6 * w).sum())
    _, _, d = _all_near(P, L, 0.6 * w)
    return float(np.sum(kernel(d / w))), int(np.count_nonzero(d <= 0.4 * w)), int(d.size)


def dyadic_range(w_min: float, w_max: float):
    k_hi = int(round(-math.log2(w_max)))
    k_lo = int(round(-math.log2(w_min)))
    return [2.0 ** -k for k in range(k_hi, k_lo + 1)]


def incidence_profile(X, scales, kernel=None) -> IncidenceProfile:
    kernel = kernel or default_kernel()
    P, L = _split(X)
    n = P.shape[0] * L.shape[0]
    prof = IncidenceProfile([], [], [], [], [])
    for w in scales:
        I, lo, hi = _incidence_stats(P, L, w, kernel)
        prof.scales.append(w)
        prof.smoothed.append(I)
        prof.normalized.append(I / (w * n))
        prof.hard_lo.append(lo)
        prof.hard_hi.append(hi)
    return prof


@dataclass
class HighLowReport:
    rows: list  # one dict per scale, keys CSV_COLUMNS

    @property
    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for r in self.rows:
            wr.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in CSV_COLUMNS])
        return buf.getvalue()


def high_low_scan(X: Configuration, w_min: float, w_max: float, kernel=None) -> HighLowReport:
    """Compare |B(w) - B(w/2)| against the concentration term at each dyadic w."""
    kernel = kernel or default_kernel()
    P, L = _split(X)
    nP, nL = P.shape[0], L.shape[0]
    if nP * nL == 0:
        raise ValueError("degenerate configuration: |P||L| = 0")
    scales = dyadic_range(w_min, w_max)
    stats = {w: _incidence_stats(P, L, w, kernel) for w in scales + [scales[-1] / 2]}
    rows = []
    for w in scales:
        I, lo, hi = stats[w]
        I2 = stats[w / 2][0]
        B = I / (w * nP * nL)
        B2 = I2 / (w / 2 * nP * nL)
        m_pt = concentration(X, ScaleTriple(w, w, 1.0))
        m_line = concentration(X, ScaleTriple(1.0, w, w))
        rhs = math.sqrt(m_pt / nP * m_line / nL * w ** -3)
        lhs = abs(B - B2)
        rows.append({"w": w, "I": I, "B": B, "hard_lo": lo, "hard_hi": hi,
                     "M_pt": m_pt, "M_line": m_line, "lhs": lhs, "rhs_core": rhs,
                     "ratio": lhs / rhs})
    return HighLowReport(rows)
