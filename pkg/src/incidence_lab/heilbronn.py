"""Small triangles from point-line incidences, plus brute-force oracles."""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .incidence_kernel import near_pairs


# ----------------------------------------------------------------- pairing

@dataclass
class PairingResult:
    pairs: np.ndarray        # (k, 2) point indices
    leftovers: np.ndarray    # unpaired indices
    n: int

    @property
    def bound(self) -> float:
        return 10.0 / math.sqrt(self.n)

    def distances(self, P) -> np.ndarray:
        P = np.asarray(P, float)
        return np.hypot(*(P[self.pairs[:, 1]] - P[self.pairs[:, 0]]).T)

    def lines(self, P):
        """(anchor point, unit direction) of the line through each pair."""
        P = np.asarray(P, float)
        a, b = P[self.pairs[:, 0]], P[self.pairs[:, 1]]
        d = b - a
        norm = np.hypot(d[:, 0], d[:, 1])
        return a, d / norm[:, None]


def _check_unit_square(P):
    P = np.asarray(P, float).reshape(-1, 2)
    if P.size and (P.min() < 0 or P.max() > 1):
        raise ValueError("points must lie in [0, 1]^2")
    return P


def greedy_pairing(P) -> PairingResult:
    """floor(n/4) disjoint pairs, each at distance <= 10/sqrt(n).

    Remaining points are binned into a grid of side 1/k <= 5/sqrt(n_rem) and
    cell-mates are paired (sorted by x inside the cell).  Since n_rem >= n/2
    throughout, a cell diagonal is at most 10/sqrt(n).
    """
    P = _check_unit_square(P)
    n = len(P)
    if n < 4:
        raise ValueError("need at least 4 points")
    target = n // 4
    alive = np.arange(n)
    pairs = []
    while len(pairs) < target:
        k = math.ceil(math.sqrt(alive.size) / 5)
        cell = np.minimum((P[alive] * k).astype(np.int64), k - 1)
        cid = cell[:, 0] * k + cell[:, 1]
        order = np.lexsort((alive, P[alive, 0], cid))
        ids, cs = alive[order], cid[order]
        used = np.zeros(n, dtype=bool)
        i = 0
        while i + 1 < ids.size and len(pairs) < target:
            if cs[i] == cs[i + 1]:
                pairs.append((ids[i], ids[i + 1]))
                used[ids[i]] = used[ids[i + 1]] = True
                i += 2
            else:
                i += 1
        alive = alive[~used[alive]]
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    res = PairingResult(pairs, alive, n)
    if np.any(res.distances(P) > res.bound):
        raise AssertionError("pairing bound violated")
    return res


# ------------------------------------------------- nearest cross incidence

def _cross_dist(px, py, ax, ay, dx, dy):
    """Distance from (px, py) to the line through (ax, ay) with unit direction (dx, dy)."""
    return np.abs(dx * (py - ay) - dy * (px - ax))


def nearest_cross_incidence_brute(points, anchors, dirs):
    """min over j != k of d(points_j, line_k) by the O(n^2) loop; ties -> smallest (j, k)."""
    pts = np.asarray(points, float)
    A = np.asarray(anchors, float)
    D = np.asarray(dirs, float)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 point-line pairs")
    best = (math.inf, -1, -1)
    for j in range(n):
        d = _cross_dist(pts[j, 0], pts[j, 1], A[:, 0], A[:, 1], D[:, 0], D[:, 1])
        d[j] = math.inf
        k = int(np.argmin(d))
        if d[k] < best[0]:
            best = (float(d[k]), j, k)
    return best[1], best[2], best[0]


def _candidates(pts, A, D, r):
    """(j, k) with d(p_j, l_k) <= r (superset), via strip search on shallow/steep lines."""
    js, ks = [], []
    shallow = np.abs(D[:, 1]) <= np.abs(D[:, 0])
    for mask, swap in ((shallow, False), (~shallow, True)):
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            continue
        Q = pts[:, ::-1] if swap else pts
        An = A[idx][:, ::-1] if swap else A[idx]
        Dn = D[idx][:, ::-1] if swap else D[idx]
        L = np.column_stack([An, Dn[:, 1] / Dn[:, 0]])
        for pi, lj, _ in near_pairs(Q, L, r * (1 + 1e-9) + 1e-15):
            js.append(pi)
            ks.append(idx[lj])
    if not js:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    return np.concatenate(js), np.concatenate(ks)


def nearest_cross_incidence(points, anchors, dirs, r0: float | None = None):
    """Exact min over j != k of d(points_j, line_k), strip-accelerated.

    The search radius doubles until a candidate pair with j != k appears; the
    answer is then minimized exactly over all candidates within that radius.
    """
    pts = np.asarray(points, float)
    A = np.asarray(anchors, float)
    D = np.asarray(dirs, float)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 point-line pairs")
    r = r0 if r0 is not None else 1.0 / n
    while True:
        j, k = _candidates(pts, A, D, r)
        keep = j != k
        j, k = j[keep], k[keep]
        if j.size:
            d = _cross_dist(pts[j, 0], pts[j, 1], A[k, 0], A[k, 1], D[k, 0], D[k, 1])
            order = np.lexsort((k, j, d))
            i = order[0]
            if d[i] <= r:
                return int(j[i]), int(k[i]), float(d[i])
        if r > 4:
            # every distance in the unit square is below this; fall back to the loop
            return nearest_cross_incidence_brute(pts, A, D)
        r *= 2


# ----------------------------------------------------------------- triangles

@dataclass
class TriangleResult:
    indices: tuple
    area: float
    method: str
    extra: dict = field(default_factory=dict)

    def recompute(self, P) -> float:
        P = np.asarray(P, float)
        if len(self.indices) == 3:
            return triangle_area(*(P[i] for i in self.indices))
        return float(hull_area(P[list(self.indices)][None])[0])


def triangle_area(p1, p2, p3) -> float:
    return 0.5 * abs((p2[0] - p1[0]) * (p3[1] - p1[1]) - (p2[1] - p1[1]) * (p3[0] - p1[0]))


def small_triangle_pipeline(P) -> TriangleResult:
    """pairing -> lines through pairs -> nearest cross incidence -> triangle.

    The triangle is (p_k, p_k', p_j) where p_j (first point of pair j) is the
    point nearest to the line l_k through pair k.
    """
    P = _check_unit_square(P)
    n = len(P)
    if n < 8:
        raise ValueError("need at least 8 points")
    pr = greedy_pairing(P)
    A, D = pr.lines(P)
    pts = P[pr.pairs[:, 0]]
    j, k, dist = nearest_cross_incidence(pts, A, D)
    idx = (int(pr.pairs[k, 0]), int(pr.pairs[k, 1]), int(pr.pairs[j, 0]))
    area = triangle_area(*(P[i] for i in idx))
    base = float(pr.distances(P)[k])
    return TriangleResult(idx, area, "pipeline",
                          {"dist": dist, "base": base, "bound": 0.5 * pr.bound * dist,
                           "pair_j": j, "pair_k": k})


def brute_force_min_triangle(P, k: int = 3) -> TriangleResult:
    """Exact minimum convex-hull area over all k-subsets (k = 3, 4, 5)."""
    P = np.asarray(P, float).reshape(-1, 2)
    n = len(P)
    caps = {3: 400, 4: 60, 5: 30}
    if k not in caps:
        raise ValueError("k must be 3, 4 or 5")
    if n < k:
        raise ValueError("need at least k points")
    if n > caps[k]:
        raise ValueError(f"n = {n} exceeds the brute-force cap {caps[k]} for k = {k}")
    if k == 3:
        best = (math.inf, None)
        for i in range(n - 2):
            V = P[i + 1:] - P[i]
            cr = 0.5 * np.abs(V[:, 0, None] * V[None, :, 1] - V[:, 1, None] * V[None, :, 0])
            iu = np.triu_indices(len(V), 1)
            vals = cr[iu]
            t = int(np.argmin(vals))
            if vals[t] < best[0]:
                best = (float(vals[t]), (i, i + 1 + int(iu[0][t]), i + 1 + int(iu[1][t])))
        return TriangleResult(best[1], best[0], "brute_force")
    combos = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)
    areas = np.empty(len(combos))
    for s in range(0, len(combos), 100_000):
        areas[s:s + 100_000] = hull_area(P[combos[s:s + 100_000]])
    t = int(np.argmin(areas))
    return TriangleResult(tuple(int(i) for i in combos[t]), float(areas[t]), "kgon")


def hull_area(G: np.ndarray) -> np.ndarray:
    """Convex hull areas of point groups G with shape (m, k, 2), k <= 6.

    The hull area is the largest angular-sorted shoelace area over subsets of
    size >= 3: hull vertices give the hull itself and any other subset gives a
    star-shaped polygon inside it.
    """
    G = np.asarray(G, float)
    m, k, _ = G.shape
    best = np.zeros(m)
    for r in range(3, k + 1):
        for sub in itertools.combinations(range(k), r):
            S = G[:, list(sub)]
            cen = S.mean(axis=1, keepdims=True)
            ang = np.arctan2(S[..., 1] - cen[..., 1], S[..., 0] - cen[..., 0])
            order = np.argsort(ang, axis=1)
            S = np.take_along_axis(S, order[..., None], axis=1)
            x, y = S[..., 0], S[..., 1]
            a = 0.5 * np.abs(np.sum(x * np.roll(y, -1, axis=1) - y * np.roll(x, -1, axis=1), axis=1))
            best = np.maximum(best, a)
    return best


# ------------------------------------------------------------------ sweeps

def _gen_points(generator, n, rng):
    if callable(generator):
        return np.asarray(generator(n, rng), float)
    if generator == "uniform_random":
        return rng.uniform(0, 1, size=(n, 2))
    if generator == "grid":
        k = math.ceil(math.sqrt(n))
        g = np.arange(k) / max(k - 1, 1)
        X, Y = np.meshgrid(g, g, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])[:n]
    raise ValueError(f"unknown generator {generator!r}")


def loglog_slope(ns, vals) -> float:
    x = np.log(np.asarray(ns, float))
    y = np.log(np.asarray(vals, float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class SweepResult:
    rows: list                   # dicts: n, trial, method, area, dist
    slope: float
    brute_slope: float | None
    degenerate: bool
    medians: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["n", "trial", "method", "area", "dist"])
        for r in self.rows:
            wr.writerow([r["n"], r["trial"], r["method"], repr(r["area"]),
                         "" if r["dist"] is None else repr(r["dist"])])
        wr.writerow(["# slope", repr(self.slope), "brute_slope",
                     "" if self.brute_slope is None else repr(self.brute_slope),
                     "degenerate", int(self.degenerate)])
        return buf.getvalue()


def _sweep_trial(generator, n, t, seed, brute):
    rng = np.random.default_rng([seed, n, t])
    P = _gen_points(generator, n, rng)
    res = small_triangle_pipeline(P)
    rows = [{"n": n, "trial": t, "method": "pipeline", "area": res.area, "dist": res.extra["dist"]}]
    if brute and n <= 400:
        b = brute_force_min_triangle(P)
        rows.append({"n": n, "trial": t, "method": "brute_force", "area": b.area, "dist": None})
    return rows


def exponent_sweep(generator, n_list, trials: int, seed: int = 0,
                   brute: bool = False, workers: int = 1) -> SweepResult:
    """Median pipeline area per n and the least-squares log-log slope.

    Trial t at size n is seeded by (seed, n, t), so results do not depend on
    the number of workers.
    """
    n_list = list(n_list)
    if len(n_list) < 3:
        raise ValueError("need at least 3 values of n")
    jobs = [(generator, n, t, seed, brute) for n in n_list for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            chunks = list(ex.map(_sweep_trial, *zip(*jobs)))
    else:
        chunks = [_sweep_trial(*j) for j in jobs]
    rows = [r for c in chunks for r in c]
    med, bmed = {}, {}
    for n in n_list:
        areas = [r["area"] for r in rows if r["n"] == n and r["method"] == "pipeline"]
        bareas = [r["area"] for r in rows if r["n"] == n and r["method"] == "brute_force"]
        med[n] = float(np.median(areas))
        if bareas:
            bmed[n] = float(np.median(bareas))
    degenerate = any(v <= 0 for v in med.values())
    slope = math.nan if degenerate else loglog_slope(list(med), list(med.values()))
    bslope = None
    if len(bmed) >= 2 and all(v > 0 for v in bmed.values()):
        bslope = loglog_slope(list(bmed), list(bmed.values()))
    return SweepResult(rows, slope, bslope, degenerate, med)
