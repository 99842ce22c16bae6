"""Generator-modeled arithmetic groups and orbit decomposition of walls.

A group is given by explicit integral isometries. Orbit identification is a
breadth-first closure over wall vectors (``±z`` identified) that only keeps
images whose height ``|q(h, z)|`` stays under the height cap, so merges are
certified exactly while separation is only an upper bound unless the
invariants (square, divisibility) differ.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .enumeration import EnumWindow, enum_negative_primitive
from .errors import DomainError
from .lattice import (Isometry, QuadLattice, Vec, canonical_sign, content, divisibility,
                      eval_form, identity, is_isometry, reflection, reflection_is_integral,
                      square)

COMPLETE = "complete_within_window"
CAPPED = "capped"


@dataclass(frozen=True)
class ClosurePolicy:
    word_cap: int = 4
    height_cap: int | None = None
    max_nodes: int = 200_000
    anchor: Vec | None = None

    def to_dict(self) -> dict:
        return {"word_cap": self.word_cap, "height_cap": self.height_cap,
                "max_nodes": self.max_nodes,
                "anchor": None if self.anchor is None else list(self.anchor)}


@dataclass(frozen=True)
class GroupSpec:
    generators: tuple[Isometry, ...]
    name: str = "group"
    policy: ClosurePolicy = field(default_factory=ClosurePolicy)

    @classmethod
    def from_matrices(cls, L: QuadLattice, matrices: Iterable, name: str = "group",
                      policy: ClosurePolicy | None = None) -> "GroupSpec":
        """Validate the matrices and close the list under inverses."""
        gens = set()
        for m in matrices:
            g = m if isinstance(m, Isometry) else Isometry(m)
            if not is_isometry(L, g):
                raise DomainError(f"generator {g.tolist()} is not an isometry of the lattice")
            gens.add(g)
            gens.add(g.inverse())
        gens.discard(Isometry(identity(L.rank)))
        return cls(tuple(sorted(gens, key=lambda g: g.matrix)), name, policy or ClosurePolicy())

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def with_policy(self, **changes) -> "GroupSpec":
        p = self.policy
        data = {**p.__dict__, **changes}
        return GroupSpec(self.generators, self.name, ClosurePolicy(**data))

    def check(self, L: QuadLattice) -> None:
        for g in self.generators:
            if not is_isometry(L, g):
                raise DomainError(f"generator {g.tolist()} is not an isometry of the lattice")

    def to_dict(self) -> dict:
        return {"name": self.name, "generator_count": len(self.generators),
                "generators": [g.tolist() for g in self.generators],
                "policy": self.policy.to_dict()}


def reflection_group(L: QuadLattice, d_list: Sequence[int], window: EnumWindow,
                     word_cap: int = 4, height_cap: int | None = None,
                     workers: int | None = None) -> GroupSpec:
    """Group generated by the integral reflections in the window's negative vectors."""
    L.require_hyperbolic()
    gens = []
    for d in sorted(set(d_list)):
        w = EnumWindow(window.anchor, window.height, d)
        for z in enum_negative_primitive(L, w, workers=workers):
            if reflection_is_integral(L, z):
                gens.append(reflection(L, z))
    name = "reflections(d={}, H={})".format(",".join(map(str, sorted(set(d_list)))), window.height)
    policy = ClosurePolicy(word_cap=word_cap,
                           height_cap=window.height if height_cap is None else height_cap,
                           anchor=window.anchor)
    return GroupSpec.from_matrices(L, gens, name, policy)


@dataclass
class OrbitClass:
    representative: Vec
    members: list[Vec]           # input vectors in this class
    extra: list[Vec]             # vectors reached by the search but not in the input
    invariants: tuple[int, int]  # (square, divisibility)

    @property
    def members_found(self) -> int:
        return len(self.members) + len(self.extra)

    def to_dict(self) -> dict:
        return {"representative": list(self.representative),
                "members_found": self.members_found,
                "input_members": [list(v) for v in self.members],
                "new_vectors": [list(v) for v in self.extra],
                "invariants": {"square": self.invariants[0],
                               "divisibility": self.invariants[1]}}


@dataclass
class OrbitReport:
    classes: list[OrbitClass]
    status: str
    caps: dict

    def __len__(self) -> int:
        return len(self.classes)

    def class_of(self, v: Sequence[int]) -> int:
        v = tuple(v)
        for i, c in enumerate(self.classes):
            if v in c.members or v in c.extra or tuple(-x for x in v) in c.members:
                return i
        raise KeyError(v)

    def to_dict(self) -> dict:
        return {"status": self.status, "class_count": len(self.classes),
                "caps": self.caps, "classes": [c.to_dict() for c in self.classes]}


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller key becomes root so the result is order independent
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def default_anchor(L: QuadLattice) -> Vec:
    """A small positive lattice vector, found in a fixed search order."""
    L.require_hyperbolic()
    n = L.rank
    candidates = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    candidates += [tuple(int(j in (i, k)) for j in range(n))
                   for i in range(n) for k in range(i + 1, n)]
    for v in candidates:
        if square(L, v) > 0:
            return v
    from itertools import product
    for b in range(1, 6):
        for v in product(range(-b, b + 1), repeat=n):
            if square(L, v) > 0 and next(x for x in v if x) > 0:
                return v
    raise DomainError("no small positive vector found")


def orbit_decompose(L: QuadLattice, vectors: Iterable[Sequence[int]], G: GroupSpec) -> OrbitReport:
    """Partition wall vectors into classes connected by generator moves under the caps."""
    G.check(L)
    vectors = [tuple(v) for v in vectors]
    anchor = G.policy.anchor
    if anchor is None and vectors:
        anchor = default_anchor(L)
    for v in vectors:
        if not any(v):
            raise DomainError("zero vector in orbit input")
        if content(v) != 1:
            raise DomainError(f"vector {v} is not primitive")
    canon = {v: canonical_sign(L, v, anchor) for v in vectors}
    inputs = sorted(set(canon.values()))
    hcap = G.policy.height_cap
    if hcap is None:
        hcap = max((abs(eval_form(L, anchor, v)) for v in inputs), default=0)

    uf = _UnionFind()
    seen = set(inputs)
    for v in inputs:
        uf.add(v)
    queue = deque(inputs)
    escaped = 0
    capped = False
    while queue:
        v = queue.popleft()
        for g in G.generators:
            w = canonical_sign(L, g(v), anchor)
            if abs(eval_form(L, anchor, w)) > hcap:
                escaped += 1
                continue
            if w not in seen:
                if len(seen) >= G.policy.max_nodes:
                    capped = True
                    continue
                seen.add(w)
                uf.add(w)
                queue.append(w)
            uf.union(v, w)

    groups: dict = {}
    for v in sorted(seen):
        groups.setdefault(uf.find(v), []).append(v)
    input_set = set(inputs)
    classes = []
    for root, members in groups.items():
        ins = [v for v in members if v in input_set]
        if not ins:
            continue
        invs = {(square(L, v), divisibility(L, v)) for v in members}
        if len(invs) != 1:
            raise DomainError(f"orbit invariants disagree inside a class: {sorted(invs)}")
        classes.append(OrbitClass(min(members), ins,
                                  [v for v in members if v not in input_set], invs.pop()))
    classes.sort(key=lambda c: (-c.invariants[0], c.invariants[1], c.representative))
    caps = {"height_cap": hcap, "max_nodes": G.policy.max_nodes, "nodes": len(seen),
            "escaped_images": escaped, "group": G.name,
            "anchor": None if anchor is None else list(anchor)}
    return OrbitReport(classes, CAPPED if capped else COMPLETE, caps)


def group_elements(G: GroupSpec, word_cap: int | None = None,
                   max_elements: int = 100_000) -> tuple[list[tuple[tuple[int, ...], Isometry]], bool]:
    """Distinct elements of word length <= cap, each with a shortest word.

    Returns ``(elements, capped)``; ``capped`` is set when ``max_elements``
    cut the search short.
    """
    W = G.policy.word_cap if word_cap is None else word_cap
    n = G.generators[0].rank if G.generators else None
    if n is None:
        return [], False
    e = Isometry(identity(n))
    found = {e: ()}
    layer = [e]
    capped = False
    for _ in range(W):
        nxt = []
        for g in layer:
            for i, s in enumerate(G.generators):
                h = g @ s
                if h not in found:
                    if len(found) >= max_elements:
                        capped = True
                        break
                    found[h] = found[g] + (i,)
                    nxt.append(h)
        layer = nxt
        if not layer:
            break
    return [(w, g) for g, w in found.items()], capped


def stabilizer_search(L: QuadLattice, target, G: GroupSpec, semantics: str = "vector",
                      word_cap: int | None = None) -> list[Isometry]:
    """Group elements of word length <= cap fixing the target.

    ``target`` is a lattice vector (``semantics`` "vector": ``g t = t``;
    "wall": ``g t = ±t``) or a predicate on isometries.
    """
    G.check(L)
    if callable(target):
        keep: Callable[[Isometry], bool] = target
    else:
        t = tuple(target)
        neg = tuple(-x for x in t)
        if semantics == "vector":
            keep = lambda g: g(t) == t
        elif semantics == "wall":
            keep = lambda g: g(t) in (t, neg)
        else:
            raise ValueError(f"unknown semantics {semantics!r}")
    e = Isometry(identity(L.rank))
    if G.is_empty:
        return [e]
    elements, _ = group_elements(G, word_cap)
    out = [g for _, g in elements if keep(g)]
    return sorted(out, key=lambda g: (not g.is_identity(), g.matrix))
