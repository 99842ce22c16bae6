"""Bounded enumeration of primitive negative and isotropic lattice vectors.

A window fixes a positive anchor ``h`` and a height bound ``H``; vectors are
searched slice by slice on ``c = q(h, z)`` for ``c = 0..H``. On a slice the
form restricted to the affine lattice ``z0 + K t`` (``K`` a basis of the
integer kernel of ``q(h, .)``) is negative definite, so each slice is a
finite ellipsoid search done with exact Fincke-Pohst pruning.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, floor, ceil
from typing import Sequence

from .errors import DomainError
from .lattice import (QuadLattice, Vec, _column_reduce, canonical_sign, content,
                      eval_form, mat_inverse, square)
from .parallel import default_workers


@dataclass(frozen=True)
class EnumWindow:
    anchor: Vec
    height: int
    square: int = 0  # d > 0 targets q(z, z) = -d; 0 targets isotropic vectors

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(int(x) for x in self.anchor))
        if self.height < 0:
            raise DomainError("height bound must be nonnegative")

    def to_dict(self) -> dict:
        return {"anchor": list(self.anchor), "height": self.height, "square": -self.square}


def _check_window(L: QuadLattice, anchor: Sequence[int]) -> None:
    L.require_hyperbolic()
    if len(anchor) != L.rank:
        raise DomainError(f"anchor {tuple(anchor)} has wrong length for rank {L.rank}")
    if square(L, anchor) <= 0:
        raise DomainError(f"anchor {tuple(anchor)} is not positive")


class _SliceSearch:
    """Exact ellipsoid search on one pairing slice ``q(h, z) = c``."""

    def __init__(self, L: QuadLattice, anchor: Sequence[int]):
        self.L = L
        n = L.rank
        row = L.pairing_row(anchor)
        _, u, _ = _column_reduce([row], n)
        self.step = sum(r * u[i][0] for i, r in enumerate(row))  # gcd of the row
        self.z_unit = tuple(u[i][0] for i in range(n))
        self.kernel = [tuple(u[i][k] for i in range(n)) for k in range(1, n)]
        m = len(self.kernel)
        gk = [L.pairing_row(k) for k in self.kernel]
        # A = -K^T G K, positive definite
        self.A = [[-sum(a * b for a, b in zip(gk[i], self.kernel[j])) for j in range(m)]
                  for i in range(m)]
        self.Ainv = mat_inverse(self.A) if m else ()
        self.gk = gk
        self._decompose()

    def _decompose(self):
        m = len(self.A)
        Q = [[Fraction(x) for x in row] for row in self.A]
        for i in range(m):
            for j in range(i + 1, m):
                Q[j][i] = Q[i][j]
                Q[i][j] = Q[i][j] / Q[i][i]
            for k in range(i + 1, m):
                for l in range(k, m):
                    Q[k][l] -= Q[k][i] * Q[i][l]
        self.diag = [Q[i][i] for i in range(m)]
        self.mu = Q

    def vectors(self, c: int, dmin: int, dmax: int) -> list[Vec]:
        """All z (not necessarily primitive) with q(h,z)=c and dmin <= -q(z,z) <= dmax."""
        if self.step == 0 or c % self.step:
            return []
        L = self.L
        n = L.rank
        z0 = tuple(c // self.step * x for x in self.z_unit)
        q0 = square(L, z0)
        m = len(self.kernel)
        if m == 0:
            return [z0] if dmin <= -q0 <= dmax else []
        uvec = [sum(a * b for a, b in zip(gk, z0)) for gk in self.gk]
        t0 = [sum(self.Ainv[i][j] * uvec[j] for j in range(m)) for i in range(m)]
        base = q0 + sum(t0[i] * self.A[i][j] * t0[j] for i in range(m) for j in range(m))
        radius = dmax + base  # (t - t0)^T A (t - t0) <= radius
        if radius < 0:
            return []
        out: list[Vec] = []
        kernel = self.kernel
        diag, mu = self.diag, self.mu
        t = [0] * m

        def emit_last():
            # coordinate 0 handled with integer arithmetic only
            partial = list(z0)
            for j in range(1, m):
                if t[j]:
                    kj = kernel[j]
                    for i in range(n):
                        partial[i] += t[j] * kj[i]
            return partial

        def recurse(i: int, rem: Fraction):
            centre = t0[i] - sum(mu[i][j] * (t[j] - t0[j]) for j in range(i + 1, m))
            s = rem / diag[i]
            r = isqrt(floor(s)) + 1
            lo, hi = ceil(centre - r), floor(centre + r)
            if i == 0:
                partial = emit_last()
                k0 = kernel[0]
                for v in range(lo, hi + 1):
                    z = tuple(p + v * k for p, k in zip(partial, k0))
                    nq = -square(L, z)
                    if dmin <= nq <= dmax:
                        out.append(z)
                return
            for v in range(lo, hi + 1):
                term = diag[i] * (v - centre) ** 2
                if term <= rem:
                    t[i] = v
                    recurse(i - 1, rem - term)
            t[i] = 0

        recurse(m - 1, Fraction(radius))
        return out


def _collect(L, anchor, height, dmin, dmax, c_start, workers):
    search = _SliceSearch(L, anchor)
    cs = list(range(c_start, height + 1))
    workers = workers or default_workers()
    if workers > 1 and len(cs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            slices = list(pool.map(lambda c: search.vectors(c, dmin, dmax), cs))
    else:
        slices = [search.vectors(c, dmin, dmax) for c in cs]
    found = set()
    for vs in slices:
        for z in vs:
            if any(z) and content(z) == 1:
                found.add(canonical_sign(L, z, anchor))
    return sorted(found)


def enum_negative_primitive(L: QuadLattice, w: EnumWindow, workers: int | None = None) -> list[Vec]:
    """Primitive z with q(z,z) = -d and 0 <= q(h,z) <= H, sign-canonical and sorted."""
    _check_window(L, w.anchor)
    if w.square <= 0:
        raise DomainError(f"target square must be negative, got {-w.square}")
    return _collect(L, w.anchor, w.height, w.square, w.square, 0, workers)


def enum_negative_range(L: QuadLattice, anchor: Sequence[int], height: int, dmax: int,
                        dmin: int = 1, workers: int | None = None) -> dict[int, list[Vec]]:
    """Primitive negative vectors with dmin <= -q(z,z) <= dmax, grouped by d."""
    _check_window(L, anchor)
    if dmin < 1:
        raise DomainError("dmin must be positive")
    out: dict[int, list[Vec]] = {d: [] for d in range(dmin, dmax + 1)}
    for z in _collect(L, tuple(anchor), height, dmin, dmax, 0, workers):
        out[-square(L, z)].append(z)
    return out


def enum_isotropic_primitive(L: QuadLattice, w: EnumWindow, workers: int | None = None) -> list[Vec]:
    """Primitive isotropic z with 0 < q(h,z) <= H, sorted."""
    _check_window(L, w.anchor)
    if w.square != 0:
        raise DomainError("isotropic enumeration needs square 0")
    return _collect(L, w.anchor, w.height, 0, 0, 1, workers)


def height(L: QuadLattice, anchor: Sequence[int], z: Sequence[int]) -> int:
    return abs(eval_form(L, anchor, z))
