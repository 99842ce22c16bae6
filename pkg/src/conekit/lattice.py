"""Exact arithmetic on integral quadratic lattices.

Vectors are tuples of Python ints (or Fractions for rational points) and
matrices are tuples of row tuples. A matrix ``M`` acts on column vectors,
so the image of ``x`` is ``M x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd
from typing import Iterable, Sequence

from .errors import DomainError

Vec = tuple
Matrix = tuple


# ---------------------------------------------------------------------------
# small exact linear algebra
# ---------------------------------------------------------------------------

def as_vec(v: Iterable) -> Vec:
    return tuple(v)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(m: Matrix, v: Sequence) -> Vec:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def content(v: Sequence[int]) -> int:
    """gcd of the entries (0 for the zero vector)."""
    return reduce(gcd, (abs(int(x)) for x in v), 0)


def det(m: Matrix) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    result = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            result = -result
        p = a[col][col]
        result *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return result


def mat_inverse(m: Matrix) -> Matrix:
    """Inverse over the rationals (Gauss-Jordan)."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise DomainError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def int_inverse(m: Matrix) -> Matrix:
    """Inverse of a unimodular integer matrix, as an integer matrix."""
    inv = mat_inverse(m)
    if any(x.denominator != 1 for row in inv for x in row):
        raise DomainError("matrix is not invertible over the integers")
    return tuple(tuple(int(x) for x in row) for row in inv)


def _column_reduce(rows: Sequence[Sequence[int]], ncols: int):
    """Unimodular column reduction.

    Returns ``(A, U, rank)`` where ``A = rows * U`` is in column echelon form:
    the first ``rank`` columns carry the pivots and the rest are zero. The
    trailing ``ncols - rank`` columns of ``U`` span the integer kernel.
    """
    a = [list(map(int, r)) for r in rows]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(dst, src, f):
        # col[dst] -= f * col[src]
        for row in a:
            row[dst] -= f * row[src]
        for row in u:
            row[dst] -= f * row[src]

    def colswap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    pc = 0
    for r in range(len(a)):
        if pc >= ncols:
            break
        while True:
            nz = [k for k in range(pc, ncols) if a[r][k] != 0]
            if not nz:
                break
            k = min(nz, key=lambda k: abs(a[r][k]))
            if k != pc:
                colswap(pc, k)
            done = True
            for k in range(pc + 1, ncols):
                if a[r][k]:
                    colop(k, pc, a[r][k] // a[r][pc])
                    if a[r][k]:
                        done = False
            if done:
                break
        if any(a[r][k] for k in range(pc, ncols)):
            if a[r][pc] < 0:
                for row in a:
                    row[pc] = -row[pc]
                for row in u:
                    row[pc] = -row[pc]
            pc += 1
    return a, u, pc


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[Vec]:
    """HNF basis of ``{x in Z^ncols : rows . x = 0}``."""
    _, u, rank = _column_reduce(rows, ncols)
    basis = [tuple(u[i][k] for i in range(ncols)) for k in range(rank, ncols)]
    return hnf(basis)


def hnf(vectors: Iterable[Sequence[int]]) -> list[Vec]:
    """Row Hermite normal form of the lattice spanned by ``vectors``.

    Zero rows are dropped; pivots are positive and entries above a pivot
    lie in ``[0, pivot)``.
    """
    rows = [list(map(int, v)) for v in vectors]
    if not rows:
        return []
    n = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < n:
        while True:
            nz = [r for r in rows if r[col] != 0]
            if len(nz) <= 1:
                break
            p = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not p:
                    f = r[col] // p[col]
                    for j in range(n):
                        r[j] -= f * p[j]
        nz = [r for r in rows if r[col] != 0]
        if nz:
            p = nz[0]
            if p[col] < 0:
                p[:] = [-x for x in p]
            rows.remove(p)
            out.append(p)
        rows = [r for r in rows if any(r)]
        col += 1
    # reduce above pivots
    for i, r in enumerate(out):
        pcol = next(j for j, x in enumerate(r) if x)
        for prev in out[:i]:
            f = prev[pcol] // r[pcol]
            if f:
                for j in range(n):
                    prev[j] -= f * r[j]
    return [tuple(r) for r in out]


def saturate(vectors: Sequence[Sequence[int]], ncols: int) -> list[Vec]:
    """HNF basis of ``span_Q(vectors) ∩ Z^ncols``."""
    vectors = [v for v in vectors if any(v)]
    if not vectors:
        return []
    annihilator = integer_kernel(vectors, ncols)
    if not annihilator:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    return integer_kernel(annihilator, ncols)


def rank_of(vectors: Sequence[Sequence]) -> int:
    a = [[Fraction(x) for x in v] for v in vectors]
    if not a:
        return 0
    rank = 0
    ncols = len(a[0])
    for col in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(rank + 1, len(a)):
            f = a[r][col] / a[rank][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def signature_of_gram(gram: Matrix) -> tuple[int, int, int]:
    """(n_pos, n_neg, n_zero) by exact Lagrange congruence-diagonalization."""
    a = [[Fraction(x) for x in row] for row in gram]
    pos = neg = 0
    while a:
        m = len(a)
        i = next((k for k in range(m) if a[k][k] != 0), None)
        if i is None:
            pair = next(((k, l) for k in range(m) for l in range(m) if a[k][l] != 0), None)
            if pair is None:
                return pos, neg, m
            k, l = pair
            # x_k <- x_k + x_l makes the (k, k) entry 2 a[k][l]
            for c in range(m):
                a[k][c] += a[l][c]
            for r in range(m):
                a[r][k] += a[r][l]
            i = k
        p = a[i][i]
        if p > 0:
            pos += 1
        else:
            neg += 1
        keep = [k for k in range(m) if k != i]
        a = [[a[r][c] - a[r][i] * a[i][c] / p for c in keep] for r in keep]
    return pos, neg, 0


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadLattice:
    gram: Matrix
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        g = as_matrix(self.gram)
        object.__setattr__(self, "gram", tuple(tuple(int(x) for x in row) for row in g))
        n = len(g)
        if n == 0 or any(len(row) != n for row in g):
            raise DomainError("Gram matrix must be square and nonempty")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise DomainError("Gram matrix must be symmetric")

    @classmethod
    def diag(cls, *entries: int, label: str | None = None) -> "QuadLattice":
        n = len(entries)
        gram = tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n))
        return cls(gram, label or "diag:" + ",".join(map(str, entries)))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def determinant(self) -> int:
        return int(det(self.gram))

    @cached_property
    def signature(self) -> tuple[int, int, int]:
        return signature_of_gram(self.gram)

    @property
    def is_hyperbolic(self) -> bool:
        return self.signature == (1, self.rank - 1, 0)

    def require_nondegenerate(self) -> None:
        if self.determinant == 0:
            raise DomainError(f"lattice {self.label or ''} is degenerate".replace("  ", " "))

    def require_hyperbolic(self) -> None:
        if not self.is_hyperbolic:
            raise DomainError(
                f"lattice must have signature (1, {self.rank - 1}), got {self.signature[:2]}"
                + (" with a kernel" if self.signature[2] else ""))

    def pairing_row(self, z: Sequence) -> Vec:
        """The row vector ``z^T G``."""
        return mat_vec(self.gram, z)

    def to_dict(self) -> dict:
        return {"label": self.label, "rank": self.rank, "gram": [list(r) for r in self.gram]}


def _check_dim(L: QuadLattice, *vs: Sequence) -> None:
    for v in vs:
        if len(v) != L.rank:
            raise DomainError(f"vector {tuple(v)} has length {len(v)}, lattice rank is {L.rank}")


def eval_form(L: QuadLattice, x: Sequence, y: Sequence):
    _check_dim(L, x, y)
    g = L.gram
    return sum(x[i] * sum(g[i][j] * y[j] for j in range(L.rank) if g[i][j])
               for i in range(L.rank) if x[i])


def square(L: QuadLattice, x: Sequence):
    return eval_form(L, x, x)


def signature(L: QuadLattice | Matrix) -> tuple[int, int, int]:
    if isinstance(L, QuadLattice):
        return L.signature
    return signature_of_gram(as_matrix(L))


def is_primitive(x: Sequence[int]) -> bool:
    c = content(x)
    if c == 0:
        raise DomainError("zero vector has no primitivity")
    return c == 1


def primitive_part(x: Sequence[int]) -> Vec:
    c = content(x)
    if c == 0:
        raise DomainError("zero vector")
    return tuple(int(v) // c for v in x)


def divisibility(L: QuadLattice, z: Sequence[int]) -> int:
    """gcd of the pairings of ``z`` with the lattice."""
    _check_dim(L, z)
    if not any(z):
        raise DomainError("divisibility of the zero vector is undefined")
    d = content(L.pairing_row(z))
    if d == 0:
        raise DomainError(f"vector {tuple(z)} lies in the kernel of the form")
    return d


def canonical_sign(L: QuadLattice, z: Sequence, anchor: Sequence | None = None) -> Vec:
    """Representative of ``±z``: positive pairing with ``anchor``, else lex-larger."""
    z = tuple(z)
    neg = tuple(-x for x in z)
    if anchor is not None:
        p = eval_form(L, anchor, z)
        if p > 0:
            return z
        if p < 0:
            return neg
    return max(z, neg)


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    matrix: Matrix

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(int(x) for x in r) for r in self.matrix))

    def __call__(self, v: Sequence) -> Vec:
        return mat_vec(self.matrix, v)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(mat_mul(self.matrix, other.matrix))

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def inverse(self) -> "Isometry":
        return Isometry(int_inverse(self.matrix))

    def determinant(self) -> int:
        return int(det(self.matrix))

    def is_identity(self) -> bool:
        return self.matrix == identity(self.rank)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.matrix]


def is_isometry(L: QuadLattice, m) -> bool:
    if isinstance(m, Isometry):
        m = m.matrix
    m = as_matrix(m)
    if len(m) != L.rank or any(len(r) != L.rank for r in m):
        return False
    return mat_mul(mat_mul(transpose(m), L.gram), m) == L.gram


def reflection(L: QuadLattice, z: Sequence[int]) -> Isometry:
    """Integer matrix of ``x -> x - 2 q(x,z)/q(z,z) z``."""
    _check_dim(L, z)
    qzz = square(L, z)
    if qzz == 0:
        raise DomainError(f"cannot reflect in isotropic vector {tuple(z)}")
    gz = L.pairing_row(z)
    rows = []
    for i in range(L.rank):
        row = []
        for j in range(L.rank):
            num = 2 * z[i] * gz[j]
            if num % qzz:
                raise DomainError(f"reflection in {tuple(z)} is not integral")
            row.append(int(i == j) - num // qzz)
        rows.append(tuple(row))
    return Isometry(tuple(rows))


def reflection_is_integral(L: QuadLattice, z: Sequence[int]) -> bool:
    qzz = square(L, z)
    return qzz != 0 and all((2 * zi * gj) % qzz == 0 for zi in z for gj in L.pairing_row(z))


# ---------------------------------------------------------------------------
# sublattices and the positive cone
# ---------------------------------------------------------------------------

def restrict_gram(L: QuadLattice, basis: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(eval_form(L, u, v) for v in basis) for u in basis)


def orthogonal_complement(L: QuadLattice, z: Sequence[int]) -> tuple[list[Vec], Matrix]:
    """HNF basis of ``{x : q(x, z) = 0}`` and its induced Gram matrix."""
    _check_dim(L, z)
    if not any(z):
        raise DomainError("orthogonal complement of the zero vector")
    basis = integer_kernel([L.pairing_row(z)], L.rank)
    return basis, restrict_gram(L, basis)


def same_positive_component(L: QuadLattice, x: Sequence, y: Sequence) -> bool:
    L.require_hyperbolic()
    for v in (x, y):
        if square(L, v) <= 0:
            raise DomainError(f"vector {tuple(v)} is not positive")
    return eval_form(L, x, y) > 0
