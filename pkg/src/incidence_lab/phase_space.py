"""Phase space geometry.

A phase point ``omega = (a, b, c)`` encodes the plane point ``(a, b)`` together
with the line of slope ``c`` through it.  Scales ``u x v x w`` measure the
x-position, the height along the line and the slope.  All sets of phase points
are stored as ``(n, 3)`` float64 arrays.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

LATTICE_OFFSET = 2.0 ** -10

# refine=1 gives the half-overlapping sublattice (step = side) used for
# concentration; see dyadic_candidates.
_PAIR_BUDGET = 4_000_000


class PhasePoint(NamedTuple):
    a: float
    b: float
    c: float

    @property
    def point(self):
        return (self.a, self.b)

    @property
    def slope(self):
        return self.c

    def in_omega(self) -> bool:
        return max(abs(self.a), abs(self.b), abs(self.c)) <= 1.0


@dataclass(frozen=True)
class ScaleTriple:
    """Sides ``u x v x w``; ``None`` marks an unbounded slot."""

    u: Optional[float]
    v: Optional[float]
    w: Optional[float]

    def __post_init__(self):
        for s in (self.u, self.v, self.w):
            if s is not None and not (0 < s <= 1):
                raise ValueError(f"scale side {s} outside (0, 1]")
        if self.bounded and self.v < self.u * self.w:
            raise ValueError(f"inadmissible scale {self}: v < u*w")

    @property
    def bounded(self) -> bool:
        return self.u is not None and self.v is not None and self.w is not None

    @property
    def dyadic(self) -> bool:
        return self.bounded and all(_is_pow2(s) for s in (self.u, self.v, self.w))

    def sides(self):
        return (self.u, self.v, self.w)

    def min_side(self) -> float:
        return min(s for s in self.sides() if s is not None)

    def __le__(self, other: "ScaleTriple") -> bool:
        return all(s <= o for s, o in zip(self.sides(), other.sides()))

    def __str__(self):
        return "x".join(format_scale(s) for s in self.sides())

    @classmethod
    def blowup(cls, u0: float, w0: float) -> "ScaleTriple":
        return cls(u0, u0 * w0, w0)


def _is_pow2(s: float) -> bool:
    m, _ = math.frexp(s)
    return m == 0.5


def format_scale(s: Optional[float]) -> str:
    if s is None:
        return "[]"
    if _is_pow2(s):
        k = -int(round(math.log2(s)))
        return f"2^-{k}"
    return repr(s)


def parse_scale(text: str) -> float:
    """Parse ``2^-k`` literals (and plain decimals) into floats."""
    text = text.strip()
    if text.startswith("2^"):
        return 2.0 ** int(text[2:])
    return float(text)


@dataclass(frozen=True)
class PhaseRect:
    center: PhasePoint
    scale: ScaleTriple

    @property
    def dyadic(self) -> bool:
        u, v, w = self.scale.sides()
        steps = (LATTICE_OFFSET * u, LATTICE_OFFSET * v, LATTICE_OFFSET * w)
        return all(float(x / s).is_integer() for x, s in zip(self.center, steps))

    def to_dict(self):
        return {"center": list(self.center), "scale": [format_scale(s) for s in self.scale.sides()]}


@dataclass(frozen=True)
class Configuration:
    """Finite multiset of phase points with ambient scale ``delta``."""

    points: np.ndarray
    delta: float = 1.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def P(self) -> np.ndarray:
        return self.points[:, :2]

    @property
    def slopes(self) -> np.ndarray:
        return self.points[:, 2]

    def in_omega(self) -> bool:
        return bool(np.all(np.abs(self.points) <= 1.0))

    def subset(self, mask_or_idx, **meta) -> "Configuration":
        md = dict(self.metadata)
        md.update(meta)
        return Configuration(self.points[mask_or_idx], self.delta, md)

    # text / json io
    def to_text(self) -> str:
        lines = [f"# delta={self.delta!r}"]
        if self.metadata:
            lines.append("# metadata=" + json.dumps(self.metadata, sort_keys=True))
        lines.extend(f"{a!r} {b!r} {c!r}" for a, b, c in self.points.tolist())
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "Configuration":
        delta, meta, rows = 1.0, {}, []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("delta="):
                    delta = float(body[6:])
                elif body.startswith("metadata="):
                    meta = json.loads(body[9:])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"bad configuration line: {line!r}")
            rows.append([float(x) for x in parts])
        return cls(np.array(rows, dtype=np.float64).reshape(-1, 3), delta, meta)

    @classmethod
    def load(cls, path) -> "Configuration":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def to_json(self) -> str:
        return json.dumps({"delta": self.delta, "metadata": self.metadata,
                           "points": self.points.tolist()}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        d = json.loads(text)
        return cls(np.array(d["points"], dtype=np.float64).reshape(-1, 3),
                   d["delta"], d.get("metadata", {}))


def as_points(X) -> np.ndarray:
    if isinstance(X, Configuration):
        return X.points
    return np.asarray(X, dtype=np.float64).reshape(-1, 3)


def _as_scale(scale) -> ScaleTriple:
    if isinstance(scale, ScaleTriple):
        return scale
    return ScaleTriple(*scale)


# ---------------------------------------------------------------- distances

def directed_distance(frm, to, scale) -> np.ndarray | float:
    """d_{u x v x w}(frm -> to); broadcasts over leading axes."""
    scale = _as_scale(scale)
    f = np.asarray(frm, dtype=np.float64)
    t = np.asarray(to, dtype=np.float64)
    a0, b0, c0 = f[..., 0], f[..., 1], f[..., 2]
    a1, b1, c1 = t[..., 0], t[..., 1], t[..., 2]
    out = np.zeros(np.broadcast(a0, a1).shape)
    u, v, w = scale.sides()
    if u is not None:
        out = np.maximum(out, np.abs(a0 - a1) / u)
    if v is not None:
        out = np.maximum(out, np.abs(b1 - (b0 + c0 * (a1 - a0))) / v)
    if w is not None:
        out = np.maximum(out, np.abs(c0 - c1) / w)
    if out.ndim == 0:
        return float(out)
    return out


def rect_contains(rect: PhaseRect, omega) -> np.ndarray | bool:
    return dilated_contains(rect, 1.0, omega)


def dilated_contains(rect: PhaseRect, lam: float, omega):
    if not rect.scale.bounded:
        raise ValueError("rectangle needs a bounded scale")
    d = directed_distance(rect.center, omega, rect.scale)
    if np.ndim(d) == 0:
        return bool(d <= lam)
    return d <= lam


def rect_sample(rect: PhaseRect, t, r, s) -> np.ndarray:
    """Points ``(a0+t, b0+c0 t+r, c0+s)`` of the explicit parametrization."""
    a0, b0, c0 = rect.center
    t, r, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(r, float), np.asarray(s, float))
    return np.stack([a0 + t, b0 + c0 * t + r, c0 + s], axis=-1)


# ------------------------------------------------------------ dyadic covers

def _cover_indices(pts: np.ndarray, scale: ScaleTriple):
    u, v, w = scale.sides()
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    ia = np.rint(a / (2 * u))
    ic = np.rint(c / (2 * w))
    a0 = ia * (2 * u)
    c0 = ic * (2 * w)
    ib = np.rint((b - c0 * (a - a0)) / (2 * v))
    return ia.astype(np.int64), ib.astype(np.int64), ic.astype(np.int64)


def dyadic_cover_assign(X, scale) -> np.ndarray:
    """Center of the assigned cover rectangle for every point, shape (n, 3).

    Centers lie on (2u)Z x (2v)Z x (2w)Z, a sublattice of the 2^-10 lattice,
    so each assigned rectangle belongs to the dyadic family.  The slope and
    x-position are rounded first, then the height along the rounded slope.
    """
    scale = _as_scale(scale)
    pts = as_points(X)
    ia, ib, ic = _cover_indices(pts, scale)
    u, v, w = scale.sides()
    return np.stack([ia * (2 * u), ib * (2 * v), ic * (2 * w)], axis=1).astype(np.float64)


def _pack(ia, ib, ic):
    """Injective int64 packing of index triples (plus the keyspace size)."""
    lo = [x.min() for x in (ia, ib, ic)]
    span = [int(x.max() - l) + 1 for x, l in zip((ia, ib, ic), lo)]
    size = span[0] * span[1] * span[2]
    if size >= 2 ** 62:
        raise OverflowError("index keyspace too large to pack")
    key = ((ia - lo[0]) * span[1] + (ib - lo[1])) * span[2] + (ic - lo[2])
    return key, size


def _cover_keys_np(pts, scale, offs, sizes):
    ia, ib, ic = _cover_indices(pts, scale)
    return ((ia + offs[0]) * sizes[1] + (ib + offs[1])) * sizes[2] + (ic + offs[2])


try:
    import numba

    @numba.njit(cache=True)
    def _cover_keys_nb(p, u, v, w, o0, o1, o2, s1, s2, out):
        iu = 1.0 / (2 * u)
        iv = 1.0 / (2 * v)
        iw = 1.0 / (2 * w)
        for i in range(p.shape[0]):
            a = p[i, 0]
            ia = np.rint(a * iu)
            ic = np.rint(p[i, 2] * iw)
            ib = np.rint((p[i, 1] - ic * (2 * w) * (a - ia * (2 * u))) * iv)
            out[i] = ((np.int64(ia) + o0) * s1 + np.int64(ib) + o1) * s2 + np.int64(ic) + o2

    @numba.njit(cache=True)
    def _mark(keys, seen):
        for k in keys:
            seen[k] = True
except ImportError:  # pragma: no cover
    numba = None


def _cover_keys(pts, scale, offs, sizes):
    if numba is None:
        return _cover_keys_np(pts, scale, offs, sizes)
    out = np.empty(pts.shape[0], dtype=np.int64)
    u, v, w = scale.sides()
    _cover_keys_nb(pts, u, v, w, offs[0], offs[1], offs[2], sizes[1], sizes[2], out)
    return out


def covering_number(X, scale, chunk: int = 1 << 22) -> int:
    """Number of distinct assigned dyadic rectangles meeting X."""
    scale = _as_scale(scale)
    pts = as_points(X)
    n = pts.shape[0]
    if n == 0:
        return 0
    u, v, w = scale.sides()
    # index bounds from coordinate bounds
    r = float(np.abs(pts).max()) if n <= chunk else max(1.0, float(np.abs(pts[::97]).max()))
    if n > chunk and r > 1.0:
        r = float(np.abs(pts).max())
    offs = (int(math.ceil(r / (2 * u))) + 1,
            int(math.ceil((r + (r + 2 * w) * (2 * u)) / (2 * v))) + 2,
            int(math.ceil(r / (2 * w))) + 1)
    sizes = [2 * o + 1 for o in offs]
    size = sizes[0] * sizes[1] * sizes[2]
    if size >= 2 ** 62:
        raise OverflowError("index keyspace too large")
    if size <= 2 ** 31:
        seen = np.zeros(size, dtype=bool)
        for i in range(0, n, chunk):
            key = _cover_keys(pts[i:i + chunk], scale, offs, sizes)
            if numba is None:
                seen[key] = True
            else:
                _mark(key, seen)
        return int(np.count_nonzero(seen))
    if n <= chunk:
        return int(np.unique(_cover_keys(pts, scale, offs, sizes)).size)
    keys = np.empty(n, dtype=np.int64)
    for i in range(0, n, chunk):
        keys[i:i + chunk] = _cover_keys(pts[i:i + chunk], scale, offs, sizes)
    keys.sort()
    return int(np.count_nonzero(np.diff(keys)) + 1)


def dyadic_candidates(pts: np.ndarray, scale: ScaleTriple, refine: int = 1):
    """All lattice centers (step = side/refine) whose rectangle contains a point.

    Returns (point_index, ia, ib, ic) with the center at (ia*su, ib*sv, ic*sw).
    """
    u, v, w = scale.sides()
    su, sv, sw = u / refine, v / refine, w / refine
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    ia_lo = np.ceil((a - u) / su).astype(np.int64)
    ic_lo = np.ceil((c - w) / sw).astype(np.int64)
    idx = np.arange(pts.shape[0])
    out = []
    for i in range(2 * refine + 1):
        ia = ia_lo + i
        a0 = ia * su
        ok_a = np.abs(a - a0) <= u
        for k in range(2 * refine + 1):
            ic = ic_lo + k
            c0 = ic * sw
            ok = ok_a & (np.abs(c - c0) <= w)
            if not ok.any():
                continue
            sel = idx[ok]
            h = b[sel] - c0[sel] * (a[sel] - a0[sel])
            ib_lo = np.ceil((h - v) / sv).astype(np.int64)
            for j in range(2 * refine + 1):
                ib = ib_lo + j
                cen = np.stack([a0[sel], ib * sv, c0[sel]], axis=1)
                good = directed_distance(cen, pts[sel], scale) <= 1.0
                if good.any():
                    out.append((sel[good], ia[sel][good], ib[good], ic[sel][good]))
    if not out:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e, e
    return tuple(np.concatenate(col) for col in zip(*out))


def overlap_count(omega, scale, refine: int = 1) -> np.ndarray:
    """Number of lattice rectangles (step side/refine) containing each omega.

    The height count for fixed (a0, c0) is done in closed form, so refine can
    be as large as 1024 (the full 2^-10 lattice) for a handful of points.
    """
    scale = _as_scale(scale)
    pts = np.atleast_2d(np.asarray(omega, dtype=np.float64))
    u, v, w = scale.sides()
    su, sv, sw = u / refine, v / refine, w / refine
    out = np.zeros(pts.shape[0], dtype=np.int64)
    for n, (a, b, c) in enumerate(pts):
        ia = np.arange(math.ceil((a - u) / su), math.floor((a + u) / su) + 1)
        ic = np.arange(math.ceil((c - w) / sw), math.floor((c + w) / sw) + 1)
        a0 = ia * su
        c0 = ic * sw
        A0, C0 = np.meshgrid(a0, c0, indexing="ij")
        h = b - C0 * (a - A0)
        cnt = np.floor((h + v) / sv) - np.ceil((h - v) / sv) + 1
        out[n] = int(np.clip(cnt, 0, None).sum())
    return out


def concentration(X, scale, refine: int = 1, return_rect: bool = False):
    """max |X cap R| over lattice rectangles R (exact over the scanned lattice).

    The scanned lattice has step side/refine in each coordinate; refine=1 is a
    sublattice of the 2^-10 lattice whose rectangles already overlap by half.
    """
    scale = _as_scale(scale)
    pts = as_points(X)
    if pts.shape[0] == 0:
        return (0, None) if return_rect else 0
    _, ia, ib, ic = dyadic_candidates(pts, scale, refine)
    key, _ = _pack(ia, ib, ic)
    uniq, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
    best = int(counts.max())
    if not return_rect:
        return best
    j = int(np.argmax(counts))
    first = int(np.flatnonzero(inv == j)[0])
    u, v, w = scale.sides()
    center = PhasePoint(float(ia[first] * u / refine), float(ib[first] * v / refine),
                        float(ic[first] * w / refine))
    return best, PhaseRect(center, scale)


# ------------------------------------------------------------ range counts

def _rect_pairs(X: np.ndarray, centers: np.ndarray, scale: ScaleTriple, lam: float):
    """Yield (center_idx, x_idx) chunks of all pairs with d(center -> x) <= lam."""
    u, v, w = scale.sides()
    ha, hc = lam * u, lam * w
    hg = lam * v * (1.0 + 0.75 * lam) * (1 + 1e-9)
    a, b, c = X[:, 0], X[:, 1], X[:, 2]
    ka = np.floor(a / ha).astype(np.int64)
    kc = np.floor(c / hc).astype(np.int64)
    A = (ka + 0.5) * ha
    S = (kc + 0.5) * hc
    g = b - S * (a - A)
    kg = np.floor(g / hg).astype(np.int64)
    lo = (ka.min(), kc.min(), kg.min())
    span = (int(ka.max() - lo[0]) + 1, int(kc.max() - lo[1]) + 1, int(kg.max() - lo[2]) + 1)
    key = ((ka - lo[0]) * span[1] + (kc - lo[1])) * span[2] + (kg - lo[2])
    order = np.argsort(key, kind="stable")
    skey = key[order]

    eps = 1e-12
    ca, cb, cc = centers[:, 0], centers[:, 1], centers[:, 2]
    ka_lo = np.floor((ca - lam * u - eps) / ha).astype(np.int64)
    ka_hi = np.floor((ca + lam * u + eps) / ha).astype(np.int64)
    kc_lo = np.floor((cc - lam * w - eps) / hc).astype(np.int64)
    kc_hi = np.floor((cc + lam * w + eps) / hc).astype(np.int64)

    starts, lens, owners = [], [], []
    # the eps padding can stretch a window of width 2 buckets over 4
    for i in range(4):
        kai = ka_lo + i
        for j in range(4):
            kcj = kc_lo + j
            ok = (kai <= ka_hi) & (kcj <= kc_hi)
            ok &= (kai >= lo[0]) & (kai < lo[0] + span[0]) & (kcj >= lo[1]) & (kcj < lo[1] + span[1])
            if not ok.any():
                continue
            sel = np.flatnonzero(ok)
            Aq = (kai[sel] + 0.5) * ha
            G0 = cb[sel] + cc[sel] * (Aq - ca[sel])
            g_lo = np.clip(np.floor((G0 - hg) / hg).astype(np.int64), lo[2], lo[2] + span[2] - 1)
            g_hi = np.clip(np.floor((G0 + hg) / hg).astype(np.int64), lo[2], lo[2] + span[2] - 1)
            base = ((kai[sel] - lo[0]) * span[1] + (kcj[sel] - lo[1])) * span[2] - lo[2]
            s = np.searchsorted(skey, base + g_lo, side="left")
            e = np.searchsorted(skey, base + g_hi, side="right")
            nz = e > s
            starts.append(s[nz])
            lens.append((e - s)[nz])
            owners.append(sel[nz])
    if not starts:
        return
    starts = np.concatenate(starts)
    lens = np.concatenate(lens)
    owners = np.concatenate(owners)
    # chunk so the pair arrays stay bounded
    csum = np.cumsum(lens)
    pos = 0
    done = 0
    while pos < len(lens):
        limit = done + _PAIR_BUDGET
        end = int(np.searchsorted(csum, limit, side="right"))
        end = max(end, pos + 1)
        L = lens[pos:end]
        n_pairs = int(L.sum())
        own = np.repeat(owners[pos:end], L)
        offs = np.arange(n_pairs) - np.repeat(np.cumsum(L) - L, L)
        xi = order[np.repeat(starts[pos:end], L) + offs]
        d = directed_distance(centers[own], X[xi], scale)
        keep = d <= lam
        yield own[keep], xi[keep]
        done += n_pairs
        pos = end


if numba is not None:
    @numba.njit(cache=True)
    def _count_nb(P, starts, k0, ha, cen, u, v, w, lam, out):
        # P sorted by (a-bucket, c); starts[k] = first row of bucket k0 + k
        nb = starts.shape[0] - 1
        for i in range(cen.shape[0]):
            a0, b0, c0 = cen[i, 0], cen[i, 1], cen[i, 2]
            klo = int(np.floor((a0 - lam * u) / ha)) - k0 - 1
            khi = int(np.floor((a0 + lam * u) / ha)) - k0 + 1
            cnt = 0
            for k in range(max(klo, 0), min(khi, nb - 1) + 1):
                s, e = starts[k], starts[k + 1]
                if s == e:
                    continue
                j = s + np.searchsorted(P[s:e, 2], c0 - lam * w - 1e-12 * w)
                while j < e and P[j, 2] <= c0 + lam * w + 1e-12 * w:
                    da = P[j, 0] - a0
                    d = max(abs(da) / u, abs(P[j, 1] - (b0 + c0 * da)) / v,
                            abs(c0 - P[j, 2]) / w)
                    if d <= lam:
                        cnt += 1
                    j += 1
            out[i] = cnt


def _count_fast(pts, cen, scale, lam):
    u, v, w = scale.sides()
    ha = lam * u
    ka = np.floor(pts[:, 0] / ha).astype(np.int64)
    order = np.lexsort((pts[:, 2], ka))
    P = np.ascontiguousarray(pts[order])
    ks = ka[order]
    k0 = int(ks[0])
    starts = np.searchsorted(ks, np.arange(k0, int(ks[-1]) + 2)).astype(np.int64)
    out = np.zeros(cen.shape[0], dtype=np.int64)
    _count_nb(P, starts, k0, ha, np.ascontiguousarray(cen), u, v, w, float(lam), out)
    return out


def count_in_rects(X, centers, scale, lam: float = 1.0) -> np.ndarray:
    """|X cap lam*R(center)| for every center (exact, bucketed range search)."""
    scale = _as_scale(scale)
    pts = as_points(X)
    cen = np.asarray(centers, dtype=np.float64).reshape(-1, 3)
    out = np.zeros(cen.shape[0], dtype=np.int64)
    if pts.shape[0] == 0 or cen.shape[0] == 0:
        return out
    if numba is not None and None not in scale.sides():
        return _count_fast(pts, cen, scale, lam)
    for own, _ in _rect_pairs(pts, cen, scale, lam):
        out += np.bincount(own, minlength=cen.shape[0])
    return out


def neighborhood_counts(X, scale, lam: float = 1.0) -> np.ndarray:
    """|X cap lam*R(omega)| for every omega in X."""
    pts = as_points(X)
    return count_in_rects(pts, pts, scale, lam)


def neighbor_lists(X, scale, lam: float):
    """CSR neighbor structure: pairs (i, j) with d(x_i -> x_j) <= lam."""
    pts = as_points(X)
    scale = _as_scale(scale)
    ii, jj = [], []
    for own, xi in _rect_pairs(pts, pts, scale, lam):
        ii.append(own)
        jj.append(xi)
    if not ii:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    return np.concatenate(ii), np.concatenate(jj)


# -------------------------------------------------------------- rescaling

def rescale_points(rect: PhaseRect, pts) -> np.ndarray:
    a0, b0, c0 = rect.center
    u0, _, w0 = rect.scale.sides()
    p = np.asarray(pts, dtype=np.float64)
    a, b, c = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([(a - a0) / u0, (b - (b0 + c0 * (a - a0))) / (u0 * w0), (c - c0) / w0], axis=-1)


def rescale(rect: PhaseRect, X: Configuration) -> Configuration:
    """Blow the rectangle up to the whole phase space: psi_R(X cap R)."""
    u0, v0, w0 = rect.scale.sides()
    if not rect.scale.bounded or v0 != u0 * w0:
        raise ValueError("rescale needs a rectangle of scale u0 x u0*w0 x w0")
    inside = np.asarray(rect_contains(rect, X.points), dtype=bool).reshape(-1)
    new = rescale_points(rect, X.points[inside]).reshape(-1, 3)
    md = dict(X.metadata)
    md["rescaled_by"] = rect.to_dict()
    return Configuration(new, min(1.0, X.delta / (u0 * w0)), md)


# ----------------------------------------------------------- separated nets

def separated_net(X, scale, lam: float = 1.0) -> np.ndarray:
    """Indices of a greedy maximal lam-separated subset (both directions).

    Point i is kept unless some already kept j has d(j -> i) < lam or
    d(i -> j) < lam.  Scanned in input order.
    """
    scale = _as_scale(scale)
    pts = as_points(X)
    n = pts.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    # d(i->j) < lam  or  d(j->i) < lam  implies j in (lam + lam^2) R(i)
    ii, jj = neighbor_lists(pts, scale, lam + lam * lam)
    fwd = directed_distance(pts[ii], pts[jj], scale)
    bwd = directed_distance(pts[jj], pts[ii], scale)
    close = ((fwd < lam) | (bwd < lam)) & (ii != jj)
    ii, jj = ii[close], jj[close]
    order = np.argsort(ii, kind="stable")
    ii, jj = ii[order], jj[order]
    ptr = np.searchsorted(ii, np.arange(n + 1))
    blocked = np.zeros(n, dtype=bool)
    kept = []
    for i in range(n):
        if blocked[i]:
            continue
        kept.append(i)
        blocked[jj[ptr[i]:ptr[i + 1]]] = True
    return np.asarray(kept, dtype=np.int64)
