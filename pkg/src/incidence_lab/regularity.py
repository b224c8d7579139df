"""Uniform subsets, Katz-Tao extraction and Frostman checks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .phase_space import (Configuration, PhaseRect, ScaleTriple, concentration,
                          covering_number, neighborhood_counts)

HYPERGRAPH_C = 4.0


# --------------------------------------------------------------- hypergraph

@dataclass
class RegularizedHypergraph:
    keep: np.ndarray           # indices of surviving tuples in the input H
    bands: list                # per class (d_i / K, d_i)
    K: float                   # instantiated (C t log N)^t
    K_achieved: float          # max over classes of d_i / min degree
    degrees: list = field(default_factory=list)  # per class: {vertex: degree}

    @property
    def size(self) -> int:
        return int(self.keep.size)


def _degrees(col: np.ndarray):
    uniq, inv, cnt = np.unique(col, return_inverse=True, return_counts=True)
    return uniq, inv, cnt


def _dyadic_class(deg: np.ndarray) -> np.ndarray:
    """Smallest k with deg <= 2^k, so deg lies in (2^(k-1), 2^k]."""
    return np.ceil(np.log2(deg) - 1e-12).astype(np.int64).clip(0)


def regularize_hypergraph(H, C: float = HYPERGRAPH_C) -> RegularizedHypergraph:
    """Restrict a multiset of t-tuples so every class has comparable degrees.

    Stage 1 keeps, class by class, the dyadic degree band carrying the most
    tuples (ties go to the larger degree).  Stage 2 repeatedly drops vertices
    of degree below |H''| / (10 t |A_i''|).
    """
    H = np.asarray(H)
    if H.ndim == 1:
        H = H[:, None]
    if H.shape[0] == 0:
        raise ValueError("empty hypergraph")
    n, t = H.shape
    N = max(len(np.unique(H[:, i])) for i in range(t)) + n
    try:
        K = (C * t * max(math.log(N), 1.0)) ** t
    except OverflowError:
        K = math.inf

    alive = np.arange(n)
    dmax = []
    for i in range(t):
        _, inv, cnt = _degrees(H[alive, i])
        cls = _dyadic_class(cnt)[inv]
        labels, mass = np.unique(cls, return_counts=True)
        best = labels[mass == mass.max()].max()
        alive = alive[cls == best]
        dmax.append(2 ** int(best))

    # stage 2 pruning with thresholds fixed by H''
    size2 = alive.size
    thresh = []
    for i in range(t):
        thresh.append(size2 / (10 * t * len(np.unique(H[alive, i]))))
    changed = True
    while changed and alive.size:
        changed = False
        for i in range(t):
            _, inv, cnt = _degrees(H[alive, i])
            ok = cnt[inv] >= thresh[i]
            if not ok.all():
                alive = alive[ok]
                changed = True
    bands, degs, achieved = [], [], 1.0
    for i in range(t):
        uniq, _, cnt = _degrees(H[alive, i]) if alive.size else (np.zeros(0), None, np.zeros(0))
        bands.append((dmax[i] / K, float(dmax[i])))
        degs.append(dict(zip(uniq.tolist(), cnt.tolist())))
        if cnt.size:
            achieved = max(achieved, dmax[i] / cnt.min())
    return RegularizedHypergraph(alive, bands, K, achieved, degs)


# ---------------------------------------------------------------- uniformize

def admissible_triples(scales):
    """All (u, v, w) from the scale list with v >= u w."""
    out = []
    for u, v, w in itertools.product(sorted(set(scales), reverse=True), repeat=3):
        if v >= u * w:
            out.append(ScaleTriple(u, v, w))
    return out


@dataclass
class UniformityCertificate:
    scales: list
    K: float                     # constant the certificate is checked against
    K_empirical: float           # smallest K that works for this output
    rows: list                   # per scale dict: scale, min_count, M
    n_in: int = 0
    n_out: int = 0

    def holds(self, K: float | None = None) -> bool:
        K = self.K if K is None else K
        per_scale = all(r["min_count"] * K >= r["M"] for r in self.rows)
        return per_scale and self.n_out * K >= self.n_in

    def to_dict(self):
        return {"K": self.K, "K_empirical": self.K_empirical, "n_in": self.n_in,
                "n_out": self.n_out, "holds": self.holds(),
                "scales": [{"scale": str(r["scale"]), "min_count": r["min_count"], "M": r["M"]}
                           for r in self.rows]}


def certify_uniformity(X, triples, K: float | None = None, n_in: int | None = None):
    """Measure min_omega |X cap R(omega)| and M at each scale."""
    pts = X.points if isinstance(X, Configuration) else np.asarray(X, float)
    rows = []
    k_emp = 1.0
    for s in triples:
        if len(pts):
            cnt = neighborhood_counts(pts, s)
            mn = int(cnt.min())
            M = concentration(pts, s)
        else:
            mn, M = 0, 0
        rows.append({"scale": s, "min_count": mn, "M": M})
        if mn:
            k_emp = max(k_emp, M / mn)
    n_in = len(pts) if n_in is None else n_in
    if len(pts):
        k_emp = max(k_emp, n_in / len(pts))
    return UniformityCertificate(list(triples), k_emp if K is None else K, k_emp, rows,
                                 n_in, len(pts))


def lemma_K(n_scales: int, delta: float, C: float = HYPERGRAPH_C) -> float:
    """(C M log(1/delta))^(M+1) with M the number of scale triples."""
    try:
        return (C * n_scales * math.log(1.0 / delta)) ** (n_scales + 1)
    except OverflowError:
        return math.inf


# Each cube Q gets, per scale, a rectangle R with Q inside its core
# CORE * R.  Cores are half-open cells of (2 CORE u) x ... on a sheared grid,
# shifted by a small dyadic offset so lattice inputs never sit on a cell wall.
CORE = 2.0 ** -10
TUPLE_OFFSET = 3 * 2.0 ** -10


def _cell(x: np.ndarray, side: float):
    """(index, center) of the half-open core cell of half-width ``side``."""
    off = TUPLE_OFFSET * side
    idx = np.floor((x - off) / (2 * side) + 0.5)
    return idx, idx * 2 * side + off


def tuple_centers(reps: np.ndarray, s: ScaleTriple, core: float = CORE):
    """(keys, centers) of the rectangles assigned to each representative."""
    u, v, w = (core * x for x in s.sides())
    ia, a0 = _cell(reps[:, 0], u)
    ic, c0 = _cell(reps[:, 2], w)
    ib, h0 = _cell(reps[:, 1] - c0 * (reps[:, 0] - a0), v)
    idx = np.column_stack([ia, ib, ic]).astype(np.int64)
    _, key = np.unique(idx, axis=0, return_inverse=True)
    return key.reshape(-1), np.column_stack([a0, h0, c0])


def uniformize(X: Configuration, scales, cube_side: float | None = None, core: float = CORE):
    """Extract a uniform subset at all admissible triples from ``scales``.

    Returns (X', certificate).  The certificate is measured on X' (nothing is
    assumed); ``K`` is the instantiated lemma constant and ``K_empirical`` the
    smallest constant the output actually satisfies.
    """
    scales = sorted(set(float(s) for s in scales), reverse=True)
    triples = admissible_triples(scales)
    min_side = min(scales)
    if cube_side is None:
        cube_side = min_side * 2.0 ** -40
    if cube_side > min_side * 2.0 ** -40:
        raise ValueError("cube side must be <= 2^-40 times the smallest scale")
    K_lemma = lemma_K(len(triples), cube_side)
    pts = X.points
    n = len(pts)
    if n == 0:
        return X, certify_uniformity(pts, triples, K_lemma)

    # cubes and occupancy classes
    q = np.floor(pts / cube_side).astype(np.int64)
    _, cube_id, occ = np.unique(q, axis=0, return_inverse=True, return_counts=True)
    cube_id = cube_id.reshape(-1)
    cls = _dyadic_class(occ)
    pt_cls = cls[cube_id]
    labels, mass = np.unique(pt_cls, return_counts=True)
    best = labels[mass == mass.max()].max()
    sel = np.flatnonzero(pt_cls == best)

    # one representative per cube, its tuple of assigned rectangles
    cubes, first = np.unique(cube_id[sel], return_index=True)
    reps = pts[sel[first]]
    cols = [tuple_centers(reps, s, core)[0] for s in triples]
    H = np.stack(cols, axis=1)
    reg = regularize_hypergraph(H)
    keep_cubes = set(cubes[reg.keep].tolist())
    mask = np.zeros(n, dtype=bool)
    mask[sel] = np.isin(cube_id[sel], list(keep_cubes))
    out = X.subset(mask, uniformized=[repr(s) for s in scales])
    cert = certify_uniformity(out, triples, K_lemma, n_in=n)
    return out, cert


def weak_uniformity_constant(X, scale) -> float:
    """M_scale(X) * |X|_scale / |X|."""
    pts = X.points if isinstance(X, Configuration) else np.asarray(X, float)
    if len(pts) == 0:
        return 0.0
    return concentration(pts, scale) * covering_number(pts, scale) / len(pts)


# ---------------------------------------------------------------- Katz-Tao

def window_max(P: np.ndarray, w: float) -> int:
    """max_x |P cap [x, x + w)| (attained with x at a point of P)."""
    P = np.sort(np.asarray(P, float))
    right = np.searchsorted(P, P + w, side="left")
    return int((right - np.arange(P.size)).max()) if P.size else 0


def dyadic_widths(delta: float):
    k = int(math.floor(math.log2(1.0 / delta)))
    return [2.0 ** -j for j in range(0, k + 1)]


def frostman_1d_ok(P, delta: float, s: float, C: float) -> bool:
    P = np.asarray(P, float)
    n = P.size
    return all(window_max(P, w) <= C * w ** s * n for w in dyadic_widths(delta))


def katz_tao_violations(P, delta: float, s: float):
    """List of (w, count, bound) with count > 4 (w/delta)^s."""
    out = []
    for w in dyadic_widths(delta):
        cnt = window_max(P, w)
        bound = 4 * (w / delta) ** s
        if cnt > bound:
            out.append((w, cnt, bound))
    return out


def katz_tao_extract(P, delta: float, s: float, C: float) -> np.ndarray:
    """Greedy Katz-Tao subset of a (delta, s, C)-set on the line.

    Windows are half-open intervals [x, x + w); the extraction uses closed
    intervals [p - r, p + r] with r = 0 or a dyadic multiple of delta.
    """
    P = np.sort(np.asarray(P, float).reshape(-1))
    n = P.size
    if n == 0:
        return P
    if n > 1 and np.diff(P).min() < delta * (1 - 1e-12):
        raise ValueError("input is not delta-separated")
    if not frostman_1d_ok(P, delta, s, C):
        raise ValueError("input is not a (delta, s, C)-set")
    steps = math.ceil(delta ** (-s) / (6 * C) - 1e-12)
    threshold = C * delta ** s * n
    alive = np.ones(n, dtype=bool)
    radii = [0.0] + [delta * 2.0 ** k for k in range(0, int(math.ceil(math.log2(4 / delta))) + 1)]
    chosen = []
    for _ in range(steps):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        Q = P[idx]
        need = min(threshold, Q.size)
        for r in radii:
            cnt = np.searchsorted(Q, Q + r, side="right") - np.searchsorted(Q, Q - r, side="left")
            hit = np.flatnonzero(cnt >= need)
            if hit.size:
                j = hit[0]
                break
        p = Q[j]
        chosen.append(p)
        alive[idx[(Q >= p - r) & (Q <= p + r)]] = False
    return np.asarray(chosen)


# ---------------------------------------------------------------- Frostman

@dataclass
class FrostmanReport:
    alpha: float
    beta: float
    C: float
    witness: PhaseRect | None
    table: list = field(default_factory=list)  # (u, w, count, ratio)

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "C": self.C,
                "witness": None if self.witness is None else self.witness.to_dict(),
                "table": [list(r) for r in self.table]}


def blowup_scales(delta: float):
    """Dyadic (u, w) with u w >= delta."""
    k = int(round(-math.log2(delta)))
    return [(2.0 ** -i, 2.0 ** -j) for i in range(k + 1) for j in range(k + 1 - i)]


def check_frostman(X, alpha: float, beta: float, scale_grid=None) -> FrostmanReport:
    """max over dyadic rectangles of |X cap R| u^-alpha w^-beta / |X|."""
    pts = X.points if isinstance(X, Configuration) else np.asarray(X, float)
    delta = X.delta if isinstance(X, Configuration) else None
    n = len(pts)
    if scale_grid is None:
        if delta is None:
            raise ValueError("need delta or an explicit scale grid")
        scale_grid = blowup_scales(delta)
    best, wit, table = 0.0, None, []
    for u, w in scale_grid:
        if n == 0:
            break
        M, rect = concentration(pts, ScaleTriple(u, u * w, w), return_rect=True)
        ratio = M * u ** -alpha * w ** -beta / n
        table.append((u, w, M, ratio))
        if ratio > best:
            best, wit = ratio, rect
    return FrostmanReport(alpha, beta, best, wit, table)


def best_rectangle(X, alpha: float, beta: float, scale_grid=None) -> PhaseRect:
    return check_frostman(X, alpha, beta, scale_grid).witness
