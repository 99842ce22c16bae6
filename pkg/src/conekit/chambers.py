"""Wall-and-chamber structure of the positive cone, relative to a finite window.

Walls are orthogonals ``z⊥`` of primitive negative vectors. A chamber is
recorded as a rational interior point together with its sign vector over
the arrangement's wall list. Face decisions are exact:

* an exact LP with a uniform slack decides whether the open polyhedral cone
  ``{y in w⊥ : s_z q(y, z) > 0}`` is nonempty, and
* the maximum of ``q(y, y)`` over the closed cone, sliced by
  ``q(y, p) = 1``, is found by enumerating active sets (``q`` is strictly
  concave on the slice, so the maximizer is the stationary point of the
  active set that is tight there).

A wall is a face when both succeed with a positive maximum; the witness is
a positive rational point of the open cone and is re-checked exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Sequence

from . import lp
from .enumeration import EnumWindow, enum_negative_primitive
from .errors import DomainError
from .lattice import (Isometry, QuadLattice, Vec, canonical_sign, content, divisibility,
                      eval_form, identity, mat_inverse, square)
from .orbits import CAPPED, COMPLETE, GroupSpec, _UnionFind, group_elements
from .parallel import default_workers


@dataclass(frozen=True, order=True)
class Wall:
    vector: Vec
    square: int
    divisibility: int

    @classmethod
    def of(cls, L: QuadLattice, z: Sequence[int]) -> "Wall":
        z = tuple(z)
        q = square(L, z)
        if q >= 0:
            raise DomainError(f"wall vector {z} must have negative square, got {q}")
        return cls(z, q, divisibility(L, z))

    @property
    def key(self) -> str:
        return ",".join(map(str, self.vector))

    def to_dict(self) -> dict:
        return {"vector": list(self.vector), "square": self.square,
                "divisibility": self.divisibility}


@dataclass
class Arrangement:
    lattice: QuadLattice
    anchor: tuple
    walls: tuple[Wall, ...]
    windows: list[dict]
    window_anchor: Vec
    perturbation: dict | None = None
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {w.vector: i for i, w in enumerate(self.walls)}

    def index(self, w) -> int:
        v = w.vector if isinstance(w, Wall) else tuple(w)
        if v not in self._index:
            c = canonical_sign(self.lattice, v, self.window_anchor)
            if c not in self._index:
                raise DomainError(f"{v} is not a wall of the arrangement")
            v = c
        return self._index[v]

    def canonical(self, z: Sequence[int]) -> Vec:
        return canonical_sign(self.lattice, z, self.window_anchor)

    def __contains__(self, z) -> bool:
        try:
            self.index(z)
        except DomainError:
            return False
        return True

    def to_dict(self) -> dict:
        return {"lattice": self.lattice.to_dict(), "anchor": _vec_out(self.anchor),
                "window_anchor": list(self.window_anchor), "windows": self.windows,
                "perturbation": self.perturbation, "wall_count": len(self.walls),
                "walls": [w.to_dict() for w in self.walls]}


@dataclass(frozen=True)
class Chamber:
    point: tuple
    signs: tuple[int, ...]

    def signs_by_wall(self, A: Arrangement) -> dict[str, str]:
        return {w.key: "+" if s > 0 else "-" for w, s in zip(A.walls, self.signs)}

    def to_dict(self, A: Arrangement) -> dict:
        return {"point": _vec_out(self.point), "signs": self.signs_by_wall(A)}


@dataclass
class FaceResult:
    wall: Wall
    is_face: bool
    witness: tuple | None = None
    max_square: Fraction | None = None  # max of q(y,y) on the slice q(y,p)=1

    def __bool__(self) -> bool:
        return self.is_face

    def to_dict(self) -> dict:
        return {"wall": list(self.wall.vector), "is_face": self.is_face,
                "witness": None if self.witness is None else _vec_out(self.witness)}


def _vec_out(v) -> list:
    out = []
    for x in v:
        x = Fraction(x)
        out.append(int(x) if x.denominator == 1 else str(x))
    return out


def _as_rational(v: Sequence) -> tuple:
    return tuple(Fraction(x) for x in v)


def _moment_curve(n: int, t: int) -> tuple:
    return tuple(t ** i for i in range(n))


def _perturb_anchor(L: QuadLattice, h: Sequence, walls: Sequence[Wall]):
    h = _as_rational(h)
    pair = [eval_form(L, h, w.vector) for w in walls]
    if all(pair):
        return h, None
    for t in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29):
        v = _moment_curve(L.rank, t)
        vp = [eval_form(L, v, w.vector) for w in walls]
        if any(p == 0 and q == 0 for p, q in zip(pair, vp)):
            continue
        eps = Fraction(1, 2)
        for _ in range(200):
            p = tuple(a + eps * b for a, b in zip(h, v))
            ok = square(L, p) > 0 and eval_form(L, p, h) > 0
            if ok:
                for a, b in zip(pair, vp):
                    s = a + eps * b
                    if s == 0 or (a != 0 and (s > 0) != (a > 0)):
                        ok = False
                        break
            if ok:
                return p, {"direction": list(v), "epsilon": str(eps)}
            eps /= 2
    raise DomainError("could not perturb the anchor off the walls")


def build_arrangement(L: QuadLattice, d_list: Sequence[int], window: EnumWindow,
                      group: GroupSpec | None = None, anchor: Sequence | None = None,
                      workers: int | None = None) -> Arrangement:
    """Walls of squares ``-d`` (d in d_list) inside the window, optionally closed under a group.

    ``anchor`` (rational, positive) defaults to the window anchor and is
    perturbed off the walls if needed.
    """
    L.require_hyperbolic()
    h = window.anchor
    vecs = set()
    for d in sorted(set(d_list)):
        vecs.update(enum_negative_primitive(L, EnumWindow(h, window.height, d), workers=workers))
    if group is not None and not group.is_empty:
        group.check(L)
        cap = group.policy.height_cap if group.policy.height_cap is not None else window.height
        frontier = sorted(vecs)
        while frontier:
            nxt = []
            for z in frontier:
                for g in group.generators:
                    w = canonical_sign(L, g(z), h)
                    if abs(eval_form(L, h, w)) <= cap and w not in vecs:
                        vecs.add(w)
                        nxt.append(w)
            frontier = sorted(nxt)
    walls = tuple(sorted(Wall.of(L, z) for z in vecs))
    start = _as_rational(anchor if anchor is not None else h)
    if square(L, start) <= 0:
        raise DomainError(f"arrangement anchor {_vec_out(start)} is not positive")
    point, perturbation = _perturb_anchor(L, start, walls)
    windows = [{"anchor": list(h), "height": window.height,
                "squares": [-d for d in sorted(set(d_list))]}]
    if group is not None:
        windows[0]["group"] = group.name
    return Arrangement(L, point, walls, windows, h, perturbation)


def locate_chamber(A: Arrangement, x: Sequence) -> Chamber:
    L = A.lattice
    x = _as_rational(x)
    if len(x) != L.rank:
        raise DomainError(f"point has length {len(x)}, lattice rank is {L.rank}")
    if square(L, x) <= 0:
        raise DomainError(f"point {_vec_out(x)} is not positive")
    if eval_form(L, x, A.anchor) <= 0:
        raise DomainError(f"point {_vec_out(x)} lies in the opposite component of the positive cone")
    signs = []
    for w in A.walls:
        p = eval_form(L, x, w.vector)
        if p == 0:
            raise DomainError(f"point lies on wall ({w.key})")
        signs.append(1 if p > 0 else -1)
    return Chamber(x, tuple(signs))


def _project(L: QuadLattice, p: Sequence, w: Sequence) -> tuple:
    """Orthogonal projection of ``p`` onto ``w⊥``."""
    f = Fraction(eval_form(L, p, w), square(L, w))
    return tuple(a - f * b for a, b in zip(p, w))


def _strict_point(L: QuadLattice, w: Vec, normals: list, p: tuple):
    """Max-slack point of ``{y in w⊥ : q(y, n) > 0 for n in normals, q(y, p) > 0}``."""
    r = L.rank
    G = L.gram
    row = lambda v: [sum(G[i][j] * v[j] for j in range(r)) for i in range(r)]
    A_ub, b_ub = [], []
    for n in list(normals) + [p]:
        A_ub.append([-a for a in row(n)] + [1])
        b_ub.append(0)
    res = lp.maximize([0] * r + [1], A_ub, b_ub, [row(w) + [0]], [0],
                      [(-1, 1)] * r + [(-1, 1)])
    if not res.feasible or res.x[-1] <= 0:
        return None
    return tuple(res.x[:r])


def _slice_max(L: QuadLattice, w: Vec, normals: list, p: tuple):
    """Max of q(y,y) over {y in w⊥, q(y,p)=1, q(y,n) >= 0}; returns (value, argmax) or None."""
    r = L.rank
    best = None
    idx = range(len(normals))
    for k in range(0, r - 1):
        for sub in combinations(idx, k):
            vecs = [w, p] + [normals[i] for i in sub]
            gram = [[eval_form(L, a, b) for b in vecs] for a in vecs]
            try:
                inv = mat_inverse(gram)
            except DomainError:
                continue
            rhs = [0, 1] + [0] * k
            mu = [sum(inv[i][j] * rhs[j] for j in range(len(vecs))) for i in range(len(vecs))]
            y = tuple(sum(mu[i] * vecs[i][c] for i in range(len(vecs))) for c in range(r))
            if any(eval_form(L, y, n) < 0 for n in normals):
                continue
            val = mu[1]  # q(y,y) = mu . rhs
            if best is None or val > best[0]:
                best = (val, y)
    return best


def is_face(A: Arrangement, C: Chamber, w) -> FaceResult:
    L = A.lattice
    i = A.index(w)
    wall = A.walls[i]
    z = wall.vector
    normals = [tuple(s * c for c in u.vector)
               for j, (u, s) in enumerate(zip(A.walls, C.signs)) if j != i]
    p = _project(L, C.point, z)
    best = _slice_max(L, z, normals, p)
    if best is None or best[0] <= 0:
        return FaceResult(wall, False, max_square=None if best is None else best[0])
    if all(eval_form(L, best[1], n) > 0 for n in normals):
        return FaceResult(wall, True, _clear_denominators(best[1]), best[0])
    strict = _strict_point(L, z, normals, p)
    if strict is None:
        return FaceResult(wall, False, max_square=best[0])
    ymax = best[1]
    eps = Fraction(1)
    for _ in range(400):
        y = tuple(a + eps * b for a, b in zip(ymax, strict))
        if square(L, y) > 0 and all(eval_form(L, y, n) > 0 for n in normals):
            y = _clear_denominators(y)
            return FaceResult(wall, True, y, best[0])
        eps /= 2
    raise ArithmeticError("face witness construction did not converge")


def _clear_denominators(v: tuple) -> tuple:
    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    num = [int(Fraction(x) * den) for x in v]
    c = content(num) or 1
    return tuple(Fraction(x // c) for x in num)


def check_face_witness(A: Arrangement, C: Chamber, face: FaceResult) -> bool:
    """Exact re-validation of a face witness against every wall."""
    if not face.is_face or face.witness is None:
        return False
    L = A.lattice
    y = face.witness
    if square(L, y) <= 0 or eval_form(L, y, A.anchor) <= 0:
        return False
    i = A.index(face.wall)
    for j, (u, s) in enumerate(zip(A.walls, C.signs)):
        val = eval_form(L, y, u.vector)
        if j == i:
            if val != 0:
                return False
        elif val * s <= 0:
            return False
    return True


def faces(A: Arrangement, C: Chamber, workers: int | None = None) -> list[FaceResult]:
    workers = workers or default_workers()
    if workers > 1 and len(A.walls) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda w: is_face(A, C, w), A.walls))
    else:
        results = [is_face(A, C, w) for w in A.walls]
    return results


def cross_wall(A: Arrangement, C: Chamber, w) -> Chamber:
    L = A.lattice
    face = is_face(A, C, w)
    if not face:
        raise DomainError(f"wall ({face.wall.key}) is not a face of the chamber")
    i = A.index(w)
    z = face.wall.vector
    s = C.signs[i]
    new_signs = tuple(-x if j == i else x for j, x in enumerate(C.signs))
    eps = Fraction(1)
    y = face.witness
    for _ in range(400):
        x = tuple(a + s * eps * b for a, b in zip(y, z))
        if square(L, x) > 0 and eval_form(L, x, A.anchor) > 0:
            try:
                ch = locate_chamber(A, x)
            except DomainError:
                ch = None
            if ch is not None and ch.signs == new_signs:
                return ch
        eps /= 2
    raise ArithmeticError("could not step across the wall")


def _inward_normals(A: Arrangement, C: Chamber, face_list: list[FaceResult]) -> list[Vec]:
    out = []
    for f in face_list:
        s = C.signs[A.index(f.wall)]
        out.append(tuple(s * x for x in f.wall.vector))
    return out


def chamber_stabilizer(A: Arrangement, C: Chamber, G: GroupSpec, word_cap: int | None = None,
                       face_list: list[FaceResult] | None = None):
    """Group words (length <= cap) mapping the chamber's face half-spaces to themselves."""
    L = A.lattice
    G.check(L)
    if face_list is None:
        face_list = [f for f in faces(A, C) if f]
    normals = set(_inward_normals(A, C, face_list))
    p = C.point

    def keeps(g: Isometry) -> bool:
        if eval_form(L, g(p), p) <= 0:
            return False
        return all(g(n) in normals for n in normals)

    e = Isometry(identity(L.rank))
    if G.is_empty:
        return [e], False
    elements, capped = group_elements(G, word_cap)
    stab = [g for _, g in elements if keeps(g)]
    return sorted(stab, key=lambda g: (not g.is_identity(), g.matrix)), capped


@dataclass
class FaceOrbitReport:
    faces: list[FaceResult]
    orbits: list[list[Vec]]
    stabilizer: list[Isometry]
    status: str
    caps: dict

    @property
    def orbit_count(self) -> int:
        return len(self.orbits)

    def to_dict(self) -> dict:
        return {"face_count": len(self.faces), "orbit_count": self.orbit_count,
                "orbits": [[list(v) for v in o] for o in self.orbits],
                "stabilizer_size": len(self.stabilizer),
                "stabilizer": [g.tolist() for g in self.stabilizer],
                "faces": [f.to_dict() for f in self.faces],
                "status": self.status, "caps": self.caps}


def face_orbit_count(A: Arrangement, C: Chamber, G: GroupSpec, word_cap: int | None = None,
                     workers: int | None = None) -> FaceOrbitReport:
    """Faces of C partitioned under the stabilizer words found within the cap."""
    face_list = [f for f in faces(A, C, workers) if f]
    stab, capped = chamber_stabilizer(A, C, G, word_cap, face_list)
    uf = _UnionFind()
    vecs = [f.wall.vector for f in face_list]
    for v in vecs:
        uf.add(v)
    for g in stab:
        for v in vecs:
            img = A.canonical(g(v))
            if img in uf.parent:
                uf.union(v, img)
    groups: dict = {}
    for v in sorted(vecs):
        groups.setdefault(uf.find(v), []).append(v)
    orbits = sorted(groups.values())
    W = G.policy.word_cap if word_cap is None else word_cap
    caps = {"word_cap": W, "group": G.name, "windows": A.windows}
    return FaceOrbitReport(face_list, orbits, stab, CAPPED if capped else COMPLETE, caps)


def chamber_equivalent(A: Arrangement, C1: Chamber, C2: Chamber, G: GroupSpec,
                       word_cap: int | None = None) -> Isometry | None:
    """A group word mapping C1's point into C2 (same window sign vector), if one is within the cap."""
    L = A.lattice
    if C1.signs == C2.signs:
        return Isometry(identity(L.rank))
    if G.is_empty:
        return None
    G.check(L)
    elements, _ = group_elements(G, word_cap)
    for _, g in sorted(elements, key=lambda e: (len(e[0]), e[0])):
        x = g(C1.point)
        if eval_form(L, x, A.anchor) <= 0:
            continue
        try:
            ch = locate_chamber(A, x)
        except DomainError:
            continue
        if ch.signs == C2.signs:
            return g
    return None
