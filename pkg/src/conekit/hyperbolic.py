"""Hyperboloid-model geometry on the projectivized positive cone.

Incidence questions (on a wall, isotropic, primitive) are settled exactly
before anything is converted to floats; only distances are floating point.

Cusp height convention: for a primitive isotropic ``c`` pairing positively
with the anchor, the height of a normalized point ``x`` is
``beta_c(x) = 1 / q(x, c)``. It grows as ``x`` goes into the cusp and is a
monotone reparametrization of the Busemann function.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .enumeration import EnumWindow, enum_isotropic_primitive, enum_negative_range
from .errors import DomainError
from .lattice import (QuadLattice, Vec, content, eval_form, mat_inverse, mat_mul,
                      orthogonal_complement, square, transpose)
from .parallel import default_workers

NORM_TOL = 1e-12
GEODESIC_TOL = 1e-9


def _gram(L: QuadLattice) -> np.ndarray:
    return np.array(L.gram, dtype=float)


@dataclass(frozen=True)
class HPoint:
    coords: np.ndarray = field(compare=False)

    @classmethod
    def from_vector(cls, L: QuadLattice, v: Sequence, anchor: Sequence | None = None) -> "HPoint":
        """Normalize a positive vector; exact positivity check for rational input."""
        if all(isinstance(x, (int, Fraction)) for x in v):
            q = square(L, v)
            if q <= 0:
                raise DomainError(f"vector {tuple(v)} is not positive")
            sign = 1
            if anchor is not None and eval_form(L, v, anchor) < 0:
                sign = -1
            arr = np.array([float(x) for x in v]) * sign / math.sqrt(q)
            return cls(arr)
        arr = np.asarray(v, dtype=float)
        q = arr @ _gram(L) @ arr
        if q <= 0:
            raise DomainError("vector is not positive")
        arr = arr / math.sqrt(q)
        if anchor is not None and arr @ _gram(L) @ np.asarray(anchor, float) < 0:
            arr = -arr
        return cls(arr)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _coords(x) -> np.ndarray:
    return x.coords if isinstance(x, HPoint) else np.asarray(x, dtype=float)


def h_distance(L: QuadLattice, x, y) -> float:
    G = _gram(L)
    c = _coords(x) @ G @ _coords(y)
    if c <= 0:
        raise DomainError("points lie in different components of the positive cone")
    return math.acosh(max(c, 1.0))


def wall_distance(L: QuadLattice, x, z: Sequence[int]) -> float:
    z = tuple(getattr(z, "vector", z))
    qzz = square(L, z)
    if qzz >= 0:
        raise DomainError(f"wall vector {z} must have negative square")
    p = _coords(x) @ _gram(L) @ np.array(z, dtype=float)
    return math.asinh(abs(p) / math.sqrt(-qzz))


def tangent_frame(L: QuadLattice, center) -> np.ndarray:
    """Rows: a basis of center⊥ orthonormal for ``-q``."""
    G = _gram(L)
    c = _coords(center)
    frame: list[np.ndarray] = []
    for i in range(L.rank):
        v = np.zeros(L.rank)
        v[i] = 1.0
        v = v - (v @ G @ c) * c
        for e in frame:
            v = v + (v @ G @ e) * e  # q(e, e) = -1
        n = -(v @ G @ v)
        if n > 1e-9:
            frame.append(v / math.sqrt(n))
        if len(frame) == L.rank - 1:
            break
    return np.array(frame)


def sample_ball(L: QuadLattice, center, R: float, N: int, seed: int) -> list[HPoint]:
    """N points of the hyperbolic ball B(center, R), uniform for hyperbolic volume.

    Radius by rejection against the density ``sinh(r)^(n-1)``, direction
    uniform on the unit sphere of the tangent space, both drawn from
    ``numpy.random.default_rng(seed)``. Generation is serial, so output does
    not depend on worker count.
    """
    if R <= 0 or N < 1:
        raise DomainError("sample_ball needs R > 0 and N >= 1")
    c = _coords(center)
    frame = tangent_frame(L, c)
    n = L.rank - 1
    rng = np.random.default_rng(seed)
    pts: list[HPoint] = []
    top = math.sinh(R)
    while len(pts) < N:
        r = R * rng.random()
        if rng.random() > (math.sinh(r) / top) ** (n - 1):
            continue
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        p = math.cosh(r) * c + math.sinh(r) * (u @ frame)
        if h_distance(L, c, p) <= R:
            pts.append(HPoint(p))
    return pts


# ---------------------------------------------------------------------------
# density probe
# ---------------------------------------------------------------------------

def linear_schedule(slope: int = 1, offset: int = 0) -> Callable[[int], int]:
    def schedule(D: int) -> int:
        return slope * D + offset
    schedule.description = f"H(D) = {slope}*D + {offset}"
    return schedule


@dataclass
class DensityReport:
    anchor: Vec
    radius: float
    samples: int
    seed: int
    curve: list[tuple[int, float, int]]  # (D, f(D), wall_count)
    windows: list[tuple[int, int]]       # (D, height)
    flags: list[str]
    lattice: QuadLattice

    @property
    def values(self) -> list[float]:
        return [f for _, f, _ in self.curve]

    def csv(self) -> str:
        lines = ["D,f_D,wall_count"]
        for D, f, n in self.curve:
            lines.append(f"{D},{'inf' if math.isinf(f) else repr(f)},{n}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"lattice": self.lattice.to_dict(), "anchor": list(self.anchor),
                "radius": self.radius, "samples": self.samples, "seed": self.seed,
                "curve": [{"D": D, "f_D": None if math.isinf(f) else f, "wall_count": n}
                          for D, f, n in self.curve],
                "windows": [{"D": D, "height": H} for D, H in self.windows],
                "flags": self.flags}


def _min_distances(G, pts: np.ndarray, walls: np.ndarray, norms: np.ndarray, workers: int):
    """Per-sample min over walls of asinh(|q(x,z)|/|z|), chunked over walls."""
    if len(walls) == 0:
        return np.full(len(pts), np.inf)
    gz = walls @ G  # rows q(., z)
    chunks = [slice(i, i + 4096) for i in range(0, len(walls), 4096)]

    def run(sl):
        vals = np.abs(pts @ gz[sl].T) / norms[sl]
        return vals.min(axis=1)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mins = list(pool.map(run, chunks))
    else:
        mins = [run(sl) for sl in chunks]
    return np.arcsinh(np.min(np.vstack(mins), axis=0))


def density_probe(L: QuadLattice, d_schedule: Sequence[int], window_schedule=None,
                  anchor: Sequence[int] | None = None, radius: float = 1.5, N: int = 2000,
                  seed: int = 7, workers: int | None = None) -> DensityReport:
    """Covering-radius proxy f(D) = max over samples of the distance to the nearest wall.

    Walls for step D are all primitive z with -D <= q(z,z) < 0 and height at
    most window_schedule(D); the wall sets are nested so f is nonincreasing.
    """
    L.require_hyperbolic()
    from .orbits import default_anchor
    h = tuple(anchor) if anchor is not None else default_anchor(L)
    Ds = sorted(set(int(d) for d in d_schedule))
    if not Ds or Ds[0] < 1:
        raise DomainError("d_schedule must contain positive integers")
    window_schedule = window_schedule or linear_schedule()
    heights = [int(window_schedule(D)) for D in Ds]
    if any(b < a for a, b in zip(heights, heights[1:])):
        raise DomainError("window schedule must be nondecreasing")
    workers = workers or default_workers()
    flags = []
    if L.rank - 1 < 3:
        flags.append("outside_theorem_regime: hyperbolic dimension < 3")
    center = HPoint.from_vector(L, h)
    pts = np.array([p.coords for p in sample_ball(L, center, radius, N, seed)])
    G = _gram(L)
    by_d = enum_negative_range(L, h, heights[-1], Ds[-1], workers=workers)
    # entry step of each wall: first D with d <= D and height <= H(D)
    buckets: list[list[Vec]] = [[] for _ in Ds]
    for d, zs in by_d.items():
        for z in zs:
            ht = abs(eval_form(L, h, z))
            k = next(i for i, (D, H) in enumerate(zip(Ds, heights)) if d <= D and ht <= H) \
                if any(d <= D and ht <= H for D, H in zip(Ds, heights)) else None
            if k is not None:
                buckets[k].append(z)
    running = np.full(len(pts), np.inf)
    curve = []
    count = 0
    for D, zs in zip(Ds, buckets):
        if zs:
            arr = np.array(sorted(zs), dtype=float)
            norms = np.sqrt(np.array([-square(L, z) for z in sorted(zs)], dtype=float))
            running = np.minimum(running, _min_distances(G, pts, arr, norms, workers))
            count += len(zs)
        curve.append((D, float(running.max()), count))
    if count == 0:
        flags.append("no_walls")
    return DensityReport(h, radius, N, seed, curve, list(zip(Ds, heights)), flags, L)


# ---------------------------------------------------------------------------
# closed geodesics
# ---------------------------------------------------------------------------

def pell_fundamental(D: int) -> tuple[int, int]:
    """Least x, y > 0 with x^2 - D y^2 = 1 (continued fraction of sqrt(D))."""
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise DomainError(f"{D} is a perfect square")
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - D * q * q != 1:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


def _icbrt(n: int) -> int:
    x = int(round(abs(n) ** (1 / 3)))
    while x ** 3 > abs(n):
        x -= 1
    while (x + 1) ** 3 <= abs(n):
        x += 1
    return x if n >= 0 else -x


def fundamental_unit_norm_one(disc: int) -> tuple[int, int]:
    """Least t, u > 0 with t^2 - disc u^2 = 4 (disc a nonsquare discriminant)."""
    if disc % 4 == 0:
        x, y = pell_fundamental(disc // 4)
        return 2 * x, y
    if disc % 4 != 1:
        raise DomainError(f"{disc} is not a discriminant")
    x1, y1 = pell_fundamental(disc)
    # unit index of Z[sqrt(disc)] in the order of discriminant disc divides 3
    t0 = _icbrt(2 * x1)
    for t in range(max(t0 - 2, 3), t0 + 3):
        if t ** 3 - 3 * t == 2 * x1:
            u2, r = divmod(t * t - 4, disc)
            u = math.isqrt(u2)
            if r == 0 and u * u == u2:
                return t, u
    return 2 * x1, 2 * y1


@dataclass
class GeodesicReport:
    plane: QuadLattice
    wall: Vec
    basis: list[Vec]
    gram: tuple                 # complement Gram [[a, b], [b, c]]
    automorph: tuple            # 2x2, acting on complement coordinates
    trace: int
    discriminant: int
    length: float
    lambda_max: float
    translation_length: float   # arccosh(q(x, g x)) on a normalized x
    cusp_clearance: float | None = None

    @property
    def ambient_automorph(self) -> tuple:
        """The automorph extended to the plane lattice (fixing the wall vector), rational."""
        cols = [list(self.basis[0]), list(self.basis[1]), list(self.wall)]
        M = transpose(tuple(tuple(c) for c in cols))
        g = self.automorph
        big = ((g[0][0], g[0][1], 0), (g[1][0], g[1][1], 0), (0, 0, 1))
        return mat_mul(mat_mul(M, big), mat_inverse(M))

    def to_dict(self) -> dict:
        return {"plane": self.plane.to_dict(), "wall": list(self.wall),
                "complement_basis": [list(v) for v in self.basis],
                "complement_gram": [list(r) for r in self.gram],
                "automorph": [list(r) for r in self.automorph],
                "trace": self.trace, "discriminant": self.discriminant,
                "length": self.length, "lambda_max": self.lambda_max,
                "translation_length": self.translation_length,
                "cusp_clearance": self.cusp_clearance}


def binary_automorph(gram: Sequence[Sequence[int]]) -> tuple[tuple, int, int]:
    """Fundamental proper automorph of an anisotropic indefinite binary form.

    Returns ``(g, t, disc)``; ``g`` has trace ``t`` and preserves ``gram``.
    """
    a, b, c = gram[0][0], gram[0][1], gram[1][1]
    g0 = math.gcd(math.gcd(a, 2 * b), c)
    A, B, C = a // g0, 2 * b // g0, c // g0
    disc = B * B - 4 * A * C
    if disc <= 0:
        raise DomainError("complement form is not indefinite")
    r = math.isqrt(disc)
    if r * r == disc:
        raise DomainError("complement is isotropic: the line is cusp-bounded, no closed geodesic")
    t, u = fundamental_unit_norm_one(disc)
    g = (((t - B * u) // 2, -C * u), (A * u, (t + B * u) // 2))
    return g, t, disc


def _positive_in(gram) -> tuple[int, int]:
    for bound in range(1, 50):
        for v in product(range(-bound, bound + 1), repeat=2):
            if v != (0, 0) and gram[0][0] * v[0] ** 2 + 2 * gram[0][1] * v[0] * v[1] \
                    + gram[1][1] * v[1] ** 2 > 0:
                return v
    raise DomainError("no small positive vector in the complement")


def closed_geodesic_length(P: QuadLattice, z: Sequence[int]) -> GeodesicReport:
    z = tuple(z)
    if P.rank != 3 or not P.is_hyperbolic:
        raise DomainError("plane lattice must have rank 3 and signature (1, 2)")
    if square(P, z) >= 0:
        raise DomainError(f"wall vector {z} must be negative")
    basis, gram = orthogonal_complement(P, z)
    g, t, disc = binary_automorph(gram)
    Gn = np.array(gram, dtype=float)
    gm = np.array(g, dtype=float)
    if mat_mul(mat_mul(transpose(g), gram), g) != gram:
        raise ArithmeticError("automorph does not preserve the complement form")
    lam = np.sort(np.abs(np.linalg.eigvals(gm)))
    lambda_max = float(lam[-1])
    length = math.acosh(t / 2)
    v = np.array(_positive_in(gram), dtype=float)
    v /= math.sqrt(v @ Gn @ v)
    translation = math.acosh(max(1.0, v @ Gn @ (gm @ v)))
    return GeodesicReport(P, z, basis, gram, g, t, disc, length, lambda_max, translation)


def geodesic_frame(rep: GeodesicReport, anchor: Sequence[int] | None = None):
    """(e1, e2) in plane coordinates with x(s) = cosh(s) e1 + sinh(s) e2 and g x(s) = x(s + length)."""
    P = rep.plane
    G = _gram(P)
    B = np.array(rep.basis, dtype=float).T  # columns: complement basis
    Gn = np.array(rep.gram, dtype=float)
    v = np.array(_positive_in(rep.gram), dtype=float)
    v /= math.sqrt(v @ Gn @ v)
    e1 = B @ v
    if anchor is not None and e1 @ G @ np.array(anchor, float) < 0:
        e1, v = -e1, -v
    gv = np.array(rep.automorph, dtype=float) @ v
    e2 = (B @ gv - math.cosh(rep.length) * e1) / math.sinh(rep.length)
    return e1, e2


@dataclass
class CuspReport:
    compact: bool
    cusps: list[Vec]
    threshold: float | None                 # t*
    per_geodesic: list[dict]
    message: str = ""

    def to_dict(self) -> dict:
        return {"compact": self.compact, "cusps": [list(c) for c in self.cusps],
                "threshold": self.threshold, "geodesics": self.per_geodesic,
                "message": self.message}


def cusp_clearance(P: QuadLattice, geodesics: Sequence[GeodesicReport], window: EnumWindow,
                   samples_per_period: int = 256) -> CuspReport:
    """Cusp heights along one period of each closed geodesic and the compact-core threshold."""
    if P.rank != 3 or not P.is_hyperbolic:
        raise DomainError("plane lattice must have rank 3 and signature (1, 2)")
    cusps = enum_isotropic_primitive(P, EnumWindow(window.anchor, window.height, 0))
    if not cusps:
        return CuspReport(True, [], None, [],
                          "no cusps in the window: quotient compact, core = everything")
    G = _gram(P)
    C = np.array(cusps, dtype=float) @ G  # rows q(., c)
    s = np.linspace(0.0, 1.0, samples_per_period, endpoint=False)
    per = []
    for rep in geodesics:
        e1, e2 = geodesic_frame(rep, window.anchor)
        ss = s * rep.length
        xs = np.cosh(ss)[:, None] * e1 + np.sinh(ss)[:, None] * e2
        pair = xs @ C.T
        if np.any(pair <= 0):
            raise ArithmeticError("cusp pairing not positive along the geodesic")
        beta = 1.0 / pair
        deepest = beta.max(axis=1)  # per sample, max over cusps
        per.append({"wall": list(rep.wall), "length": rep.length,
                    "max_height": float(deepest.max()),
                    "min_height": float(deepest.min())})
        rep.cusp_clearance = float(deepest.max())
    t_star = max(p["max_height"] for p in per) if per else None
    for p in per:
        p["margin"] = t_star - p["min_height"]
        p["meets_core"] = p["min_height"] <= t_star
    return CuspReport(False, cusps, t_star, per)
