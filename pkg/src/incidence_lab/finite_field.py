"""F_{p^2} arithmetic, the affine Hermitian unital and Vinh's bound.

An element a0 + a1 x of F_p[x]/(x^2 - n) is stored as the int a0 + p a1, so
arrays of elements are plain int64 arrays.  Lines of F_q^2 are numbered
m q + c for Y = m X + c (m, c in F_q) and q^2 + c for the vertical X = c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class Field:
    p: int
    n: int  # x^2 = n, n a quadratic non-residue

    @property
    def q(self) -> int:
        return self.p * self.p

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def split(self, a):
        a = np.asarray(a, dtype=np.int64)
        return a % self.p, a // self.p

    def make(self, a0, a1):
        return np.asarray(a0, dtype=np.int64) % self.p + self.p * (np.asarray(a1, dtype=np.int64) % self.p)

    def add(self, a, b):
        a0, a1 = self.split(a)
        b0, b1 = self.split(b)
        return self.make(a0 + b0, a1 + b1)

    def neg(self, a):
        a0, a1 = self.split(a)
        return self.make(-a0, -a1)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a0, a1 = self.split(a)
        b0, b1 = self.split(b)
        return self.make(a0 * b0 + self.n * a1 * b1, a0 * b1 + a1 * b0)

    def frobenius(self, a):
        """a^p = a0 - a1 x, the Galois conjugate."""
        a0, a1 = self.split(a)
        return self.make(a0, -a1)

    def norm(self, a):
        """N(a) = a^(p+1) = a0^2 - n a1^2, an element of F_p."""
        a0, a1 = self.split(a)
        return (a0 * a0 - self.n * a1 * a1) % self.p

    def inv(self, a):
        """a^-1 = conj(a) / N(a)."""
        nrm = self.norm(a)
        if np.any(nrm == 0):
            raise ZeroDivisionError("0 has no inverse")
        ninv = np.asarray([pow(int(v), -1, self.p) for v in np.atleast_1d(nrm)]).reshape(np.shape(nrm))
        return self.mul(self.frobenius(a), ninv)

    def pow(self, a, k: int):
        a = np.asarray(a, dtype=np.int64)
        if k < 0:
            return self.pow(self.inv(a), -k)
        out = np.ones_like(a)
        base = a.copy()
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out


def build_field(p: int) -> Field:
    """F_{p^2} as F_p[x]/(x^2 - n) with n the least quadratic non-residue."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if not 3 <= p <= 97:
        raise ValueError("p must lie in [3, 97]")
    squares = {(t * t) % p for t in range(p)}
    for n in range(2, p):
        if n not in squares:  # x^2 - n has no root, so it is irreducible
            return Field(p, n)
    raise RuntimeError("no irreducible quadratic found")  # pragma: no cover


# ------------------------------------------------------------------- lines

def line_through(F: Field, X, Y, dX, dY) -> np.ndarray:
    """Normal-form ids of the lines through (X, Y) with direction (dX, dY)."""
    X, Y, dX, dY = (np.asarray(v, dtype=np.int64) for v in (X, Y, dX, dY))
    vert = dX == 0
    safe = np.where(vert, 1, dX)
    m = F.mul(dY, F.inv(safe))
    c = F.sub(Y, F.mul(m, X))
    return np.where(vert, F.q * F.q + X, m * F.q + c)


def line_points(F: Field, line_id: int) -> np.ndarray:
    """The q points of a line as an (q, 2) array."""
    q = F.q
    t = F.elements()
    if line_id >= q * q:
        return np.column_stack([np.full(q, line_id - q * q), t])
    m, c = divmod(line_id, q)
    return np.column_stack([t, F.add(F.mul(m, t), c)])


def all_lines(F: Field) -> np.ndarray:
    return np.arange(F.q * F.q + F.q, dtype=np.int64)


def incidences(F: Field, P, L) -> int:
    """Exact I(P, L) with L a set of line ids (duplicates ignored)."""
    P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
    L = np.unique(np.asarray(L, dtype=np.int64))
    q = F.q
    if len(P) == 0 or len(L) == 0:
        return 0
    if L.min() < 0 or L.max() >= q * q + q or P.min() < 0 or P.max() >= q:
        raise ValueError("point or line id out of range for this field")
    inL = np.zeros(q * q + q, dtype=bool)
    inL[L] = True
    total = int(np.count_nonzero(inL[q * q + P[:, 0]]))
    X, Y = P[:, 0], P[:, 1]
    for m in range(q):
        c = F.sub(Y, F.mul(m, X))
        total += int(np.count_nonzero(inL[m * q + c]))
    return total


def vinh_check(F: Field, P, L) -> dict:
    """|I - |P||L|/q| <= sqrt(q |P| |L|)."""
    P = np.unique(np.asarray(P, dtype=np.int64).reshape(-1, 2), axis=0)
    L = np.unique(np.asarray(L, dtype=np.int64))
    q = F.q
    I = incidences(F, P, L)
    expected = len(P) * len(L) / q
    slack = abs(I - expected)
    bound = math.sqrt(q * len(P) * len(L))
    return {"I": I, "expected": expected, "slack": slack, "bound": bound,
            "n_points": int(len(P)), "n_lines": int(len(L)), "passes": slack <= bound}


# ------------------------------------------------------------------ unital

@dataclass
class UnitalConfig:
    field: Field
    points: np.ndarray                  # (n, 2) element ids
    tangents: np.ndarray = field(repr=False)  # line id of l_x per point

    @property
    def p(self) -> int:
        return self.field.p


def on_unital(F: Field, P) -> np.ndarray:
    P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
    return (F.norm(P[:, 0]) + F.norm(P[:, 1])) % F.p == 1


def tangent_lines(F: Field, P) -> np.ndarray:
    """l_x = {(a + t conj(b), b - t conj(a))} for x = (a, b)."""
    P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
    a, b = P[:, 0], P[:, 1]
    return line_through(F, a, b, F.frobenius(b), F.neg(F.frobenius(a)))


def build_unital(p: int) -> UnitalConfig:
    """All (a, b) in F_q^2 with N(a) + N(b) = 1, with their tangent lines."""
    F = build_field(p)
    e = F.elements()
    A, B = np.meshgrid(e, e, indexing="ij")
    pts = np.column_stack([A.ravel(), B.ravel()])
    pts = pts[on_unital(F, pts)]
    return UnitalConfig(F, pts, tangent_lines(F, pts))


def verify_tangency(cfg: UnitalConfig) -> dict:
    """Every x is on the unital and its parametrized l_x meets the set only at x."""
    F = cfg.field
    q = F.q
    P = cfg.points
    member = np.zeros(q * q, dtype=bool)
    member[P[:, 0] * q + P[:, 1]] = True
    bad = np.flatnonzero(~on_unital(F, P))
    if bad.size:
        i = int(bad[0])
        return {"passes": False, "witness": P[i].tolist(), "reason": "point not on the unital"}
    t = F.elements()
    for i, (a, b) in enumerate(P):
        X = F.add(a, F.mul(t, F.frobenius(b)))
        Y = F.sub(b, F.mul(t, F.frobenius(a)))
        hit = np.flatnonzero(member[X * q + Y])
        if hit.size != 1 or t[hit[0]] != 0:
            others = [[int(X[h]), int(Y[h])] for h in hit if t[h] != 0]
            return {"passes": False, "witness": P[i].tolist(), "reason": "tangent meets other points",
                    "others": others}
    return {"passes": True, "witness": None, "reason": None}


def sharpness_probe(cfg: UnitalConfig) -> dict:
    """Nontrivial incidences p_j in l_k (j != k) for the unital and its tangents."""
    F = cfg.field
    I = incidences(F, cfg.points, cfg.tangents)
    n = len(cfg.points)
    return {"n": n, "q": F.q, "q_three_halves": F.q ** 1.5, "threshold": F.q ** 1.5 + F.q,
            "nontrivial_incidences": I - n}


def random_subsets(F: Field, rng, n_sets: int = 50):
    """Seeded random (P, L) pairs with assorted sizes."""
    q = F.q
    out = []
    for _ in range(n_sets):
        n_p = int(rng.integers(1, q * q + 1))
        n_l = int(rng.integers(1, q * q + q + 1))
        idx = rng.choice(q * q, size=n_p, replace=False)
        P = np.column_stack([idx // q, idx % q])
        L = rng.choice(q * q + q, size=n_l, replace=False)
        out.append((P, L))
    return out
