"""Picard sublattices, the projectivity test, and projective deformation targets.

Period points are represented only through their Picard sublattices: a
primitive sublattice ``N`` of the ambient lattice, stored by an HNF basis
(rows) and its induced Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .errors import DomainError
from .lattice import (QuadLattice, Vec, hnf, rank_of, restrict_gram, saturate,
                      signature_of_gram)


@dataclass(frozen=True)
class PicardSpec:
    ambient: QuadLattice
    basis: tuple[Vec, ...]
    gram: tuple

    @classmethod
    def saturated(cls, L: QuadLattice, vectors: Iterable[Sequence[int]]) -> "PicardSpec":
        vectors = [tuple(int(x) for x in v) for v in vectors]
        for v in vectors:
            if len(v) != L.rank:
                raise DomainError(f"class {v} has wrong length for rank {L.rank}")
        basis = tuple(saturate(vectors, L.rank))
        return cls(L, basis, restrict_gram(L, basis))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def signature(self) -> tuple[int, int, int]:
        return signature_of_gram(self.gram) if self.basis else (0, 0, 0)

    def contains(self, v: Sequence[int]) -> bool:
        return rank_of(list(self.basis) + [tuple(v)]) == self.rank

    def to_dict(self) -> dict:
        return {"rank": self.rank, "basis": [list(b) for b in self.basis],
                "gram": [list(r) for r in self.gram], "signature": list(self.signature)}


def picard_closure(L: QuadLattice, z_list: Sequence[Sequence[int]]) -> PicardSpec:
    """Smallest primitive sublattice containing every class in ``z_list``."""
    if not z_list or not any(any(z) for z in z_list):
        raise DomainError("picard_closure needs at least one nonzero class")
    return PicardSpec.saturated(L, z_list)


def is_projective_type(N: PicardSpec) -> bool:
    """True iff the form on N takes a positive value (some n_pos > 0)."""
    return N.signature[0] >= 1


def has_positive_vector(gram: Sequence[Sequence[int]], bound: int) -> bool:
    """Brute-force search for a vector of positive square with coordinates in [-bound, bound]."""
    n = len(gram)
    for v in product(range(-bound, bound + 1), repeat=n):
        if sum(v[i] * gram[i][j] * v[j] for i in range(n) for j in range(n)) > 0:
            return True
    return False


def _fits(sig: tuple[int, int, int], target: int) -> bool:
    pos, neg, _ = sig
    return pos <= 1 and neg <= target - 1


def deformation_target(L: QuadLattice, N: PicardSpec, search_bound: int = 1) -> PicardSpec:
    """Primitive N' ⊇ N of rank rank(L) - 2 and signature (1, rank(N') - 1).

    Candidates are the basis vectors of L in index order, then vectors with
    entries in ``[-search_bound, search_bound]``; each step saturates and
    backtracks when the signature can no longer extend.
    """
    L.require_nondegenerate()
    target = L.rank - 2
    if target < 1:
        raise DomainError("ambient lattice rank must be at least 3")
    if N.rank > target:
        raise DomainError(f"Picard rank {N.rank} exceeds rank(L) - 2 = {target}")
    if not _fits(N.signature, target):
        raise DomainError(f"sublattice signature {N.signature} cannot extend to (1, {target - 1})")
    n = L.rank
    candidates = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    for v in product(range(-search_bound, search_bound + 1), repeat=n):
        if any(v) and next(x for x in v if x) > 0 and v not in candidates:
            candidates.append(v)

    visited: set = set()

    def extend(current: tuple[Vec, ...]):
        if current in visited:
            return None
        visited.add(current)
        spec = PicardSpec(L, current, restrict_gram(L, current))
        sig = spec.signature
        if spec.rank == target:
            return spec if sig == (1, target - 1, 0) else None
        for c in candidates:
            if spec.rank and spec.contains(c):
                continue
            basis = tuple(saturate(list(current) + [c], n))
            gram = restrict_gram(L, basis)
            if _fits(signature_of_gram(gram), target):
                found = extend(basis)
                if found is not None:
                    return found
        return None

    result = extend(tuple(hnf(N.basis)))
    if result is None:
        raise DomainError(f"no projective extension found with search bound {search_bound}")
    return result
