"""Lie algebras over the rationals, given by structure constants.

An algebra of dimension n stores brackets of basis pairs [x_i, x_j] for
1 <= i < j <= n only; antisymmetry is implicit.  The Jacobi identity is
validated on every basis triple at construction time, which is the central
safety net for everything built on top (wrong extension data typically
fails exactly here).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .exactla import (
    Matrix,
    Scalar,
    Subspace,
    Vector,
    frac,
    nullspace,
    vec_add,
    vec_is_zero,
    vec_scale,
)

BracketTable = Mapping[tuple[int, int], Mapping[int, Scalar]]


class JacobiViolation(Exception):
    """The Jacobi identity fails on a basis triple."""

    def __init__(self, triple: tuple[int, int, int], residual: Vector):
        self.triple = triple
        self.residual = residual
        super().__init__(f"Jacobi identity fails on basis triple {triple}; "
                         f"residual {residual}")


class NotAnIdeal(Exception):
    """A subspace passed where an ideal is required is not bracket-closed."""


@dataclass(frozen=True)
class LieAlgebra:
    """Finite-dimensional Lie algebra with exact rational structure constants.

    ``table[(i, j)]`` (0-based, i < j) is the coordinate vector of
    [x_i, x_j] in the ambient basis.
    """

    dim: int
    table: tuple[tuple[tuple[int, int], Vector], ...]
    name: Optional[str] = None

    def bracket_basis(self, i: int, j: int) -> Vector:
        """[x_i, x_j] for 0-based indices, any order."""
        if i == j:
            return self.zero_vector()
        sign = 1
        if i > j:
            i, j = j, i
            sign = -1
        for (a, b), v in self.table:
            if (a, b) == (i, j):
                return v if sign == 1 else vec_scale(Fraction(-1), v)
        return self.zero_vector()

    def zero_vector(self) -> Vector:
        return tuple(Fraction(0) for _ in range(self.dim))

    def basis_vector(self, i: int) -> Vector:
        return tuple(Fraction(1 if k == i else 0) for k in range(self.dim))

    def with_name(self, name: str) -> "LieAlgebra":
        return LieAlgebra(self.dim, self.table, name)


def _normalize_table(dim: int, brackets: BracketTable) -> tuple[tuple[tuple[int, int], Vector], ...]:
    """1-based sparse bracket input to the internal 0-based dense-vector table."""
    items = []
    for (i, j), coeffs in brackets.items():
        if not (1 <= i < j <= dim):
            raise ValueError(f"bracket indices must satisfy 1 <= i < j <= dim, got ({i},{j})")
        v = [Fraction(0)] * dim
        for k, c in coeffs.items():
            if not (1 <= k <= dim):
                raise ValueError(f"bracket target index {k} out of range")
            v[k - 1] = frac(c)
        if not vec_is_zero(tuple(v)):
            items.append(((i - 1, j - 1), tuple(v)))
    items.sort(key=lambda kv: kv[0])
    return tuple(items)


def make_algebra(dim: int, brackets: BracketTable, name: Optional[str] = None,
                 skip_jacobi: bool = False) -> LieAlgebra:
    """Construct a Lie algebra and validate Jacobi on all basis triples.

    ``skip_jacobi`` exists only so tests and the CLI can load deliberately
    broken tables; everything else must leave it False.
    """
    alg = LieAlgebra(dim, _normalize_table(dim, brackets), name)
    if not skip_jacobi:
        validate_jacobi(alg)
    return alg


def validate_jacobi(alg: LieAlgebra) -> None:
    """Raise :class:`JacobiViolation` on the first failing basis triple."""
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            for k in range(j + 1, alg.dim):
                r1 = bracket(alg, alg.bracket_basis(i, j), alg.basis_vector(k))
                r2 = bracket(alg, alg.bracket_basis(j, k), alg.basis_vector(i))
                r3 = bracket(alg, alg.bracket_basis(k, i), alg.basis_vector(j))
                residual = vec_add(vec_add(r1, r2), r3)
                if not vec_is_zero(residual):
                    raise JacobiViolation((i + 1, j + 1, k + 1), residual)


def bracket(alg: LieAlgebra, u: Vector, v: Vector) -> Vector:
    """Bilinear extension of the structure constants to arbitrary vectors."""
    if len(u) != alg.dim or len(v) != alg.dim:
        raise ValueError("vector length mismatch")
    out = [Fraction(0)] * alg.dim
    for (i, j), w in alg.table:
        c = u[i] * v[j] - u[j] * v[i]
        if c != 0:
            for k in range(alg.dim):
                if w[k] != 0:
                    out[k] += c * w[k]
    return tuple(out)


@dataclass(frozen=True)
class Ideal:
    """An ideal of ``parent``: a subspace closed under bracketing."""

    parent: LieAlgebra
    space: Subspace

    @property
    def dim(self) -> int:
        return self.space.dim

    def contains(self, v: Vector) -> bool:
        return self.space.contains(v)


def _span_closure_is_ideal(alg: LieAlgebra, space: Subspace) -> bool:
    return all(space.contains(bracket(alg, alg.basis_vector(i), w))
               for i in range(alg.dim) for w in space.basis)


def ideal_from_vectors(alg: LieAlgebra, vectors: Sequence[Vector]) -> Ideal:
    space = Subspace.from_vectors(alg.dim, vectors)
    if not _span_closure_is_ideal(alg, space):
        raise NotAnIdeal("subspace is not closed under bracketing")
    return Ideal(alg, space)


def product_space(alg: LieAlgebra, a: Subspace, b: Subspace) -> Subspace:
    """span{[u, v] : u in a, v in b}."""
    vectors = [bracket(alg, u, v) for u in a.basis for v in b.basis]
    return Subspace.from_vectors(alg.dim, vectors)


def derived_subalgebra(alg: LieAlgebra) -> Ideal:
    """[L, L], returned with its canonical reduced basis."""
    full = Subspace.full(alg.dim)
    return Ideal(alg, product_space(alg, full, full))


def derived_series(alg: LieAlgebra) -> list[Ideal]:
    """L >= [L,L] >= [[L,L],[L,L]] >= ..., down to stabilization."""
    series = [Ideal(alg, Subspace.full(alg.dim))]
    while True:
        prev = series[-1].space
        nxt = product_space(alg, prev, prev)
        if nxt.dim == prev.dim:
            break
        series.append(Ideal(alg, nxt))
        if nxt.dim == 0:
            break
    return series


def lower_central_series(alg: LieAlgebra) -> list[Ideal]:
    """L >= [L,L] >= [L,[L,L]] >= ..., down to stabilization."""
    full = Subspace.full(alg.dim)
    series = [Ideal(alg, full)]
    while True:
        prev = series[-1].space
        nxt = product_space(alg, full, prev)
        if nxt.dim == prev.dim:
            break
        series.append(Ideal(alg, nxt))
        if nxt.dim == 0:
            break
    return series


def is_solvable(alg: LieAlgebra) -> bool:
    return derived_series(alg)[-1].dim == 0


def is_nilpotent(alg: LieAlgebra) -> bool:
    return lower_central_series(alg)[-1].dim == 0


def center(alg: LieAlgebra) -> Ideal:
    """{v : [v, x_i] = 0 for all i}, via the stacked adjoint system."""
    if alg.dim == 0:
        return Ideal(alg, Subspace.zero(0))
    stacked = adjoint_matrix(alg, alg.basis_vector(0))
    for i in range(1, alg.dim):
        stacked = stacked.vstack(adjoint_matrix(alg, alg.basis_vector(i)))
    # rows express [x_i, v]; the kernel over v is the center
    return Ideal(alg, nullspace(stacked))


def adjoint_matrix(alg: LieAlgebra, v: Vector) -> Matrix:
    """Matrix of u -> [v, u] in the ambient basis."""
    cols = [bracket(alg, v, alg.basis_vector(j)) for j in range(alg.dim)]
    return Matrix.from_columns(cols)


def restricted_adjoint(alg: LieAlgebra, v: Vector) -> Matrix:
    """Matrix of u -> [v, u] restricted to the derived algebra.

    Well-defined because [L, L] is an ideal; expressed in the canonical
    echelon basis of the derived algebra.
    """
    der = derived_subalgebra(alg)
    return restrict_operator(adjoint_matrix(alg, v), der.space)


def restrict_operator(op: Matrix, space: Subspace) -> Matrix:
    """Matrix of an operator restricted to an invariant subspace, in the
    subspace's echelon basis."""
    cols = []
    for b in space.basis:
        img = op.apply(b)
        coords = space.coordinates(img)
        if coords is None:
            raise ValueError("subspace is not invariant under the operator")
        cols.append(coords)
    return Matrix.from_columns(cols) if cols else Matrix.zero(0, 0)


def direct_sum(a: LieAlgebra, b: LieAlgebra, name: Optional[str] = None) -> LieAlgebra:
    """Blockwise direct sum; the first summand keeps the low indices."""
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (i, j), v in a.table:
        brackets[(i + 1, j + 1)] = {k + 1: c for k, c in enumerate(v) if c != 0}
    off = a.dim
    for (i, j), v in b.table:
        brackets[(i + 1 + off, j + 1 + off)] = {k + 1 + off: c for k, c in enumerate(v) if c != 0}
    return make_algebra(a.dim + b.dim, brackets, name)


def complement_coordinates(space: Subspace) -> list[int]:
    """Ambient coordinates not used as pivots by the echelon basis."""
    pivots = []
    for row in space.basis:
        pivots.append(next(i for i, x in enumerate(row) if x != 0))
    return [i for i in range(space.ambient_dim) if i not in pivots]


def quotient(alg: LieAlgebra, ideal: Ideal, name: Optional[str] = None) -> LieAlgebra:
    """Quotient algebra on the complement coordinates of the ideal."""
    if not _span_closure_is_ideal(alg, ideal.space):
        raise NotAnIdeal("quotient requires an ideal")
    comp = complement_coordinates(ideal.space)
    proj = _projection_to_complement(ideal.space, comp)
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for a_idx, i in enumerate(comp):
        for b_idx, j in enumerate(comp[a_idx + 1:], start=a_idx + 1):
            w = bracket(alg, alg.basis_vector(i), alg.basis_vector(j))
            coords = proj(w)
            entry = {k + 1: c for k, c in enumerate(coords) if c != 0}
            if entry:
                brackets[(a_idx + 1, b_idx + 1)] = entry
    return make_algebra(len(comp), brackets, name)


def _projection_to_complement(space: Subspace, comp: list[int]):
    """Project ambient vectors onto the complement coordinates modulo the
    subspace (reduce against the echelon basis, read off free slots)."""
    pivots = [next(i for i, x in enumerate(row) if x != 0) for row in space.basis]

    def project(v: Vector) -> Vector:
        w = list(v)
        for row, p in zip(space.basis, pivots):
            if w[p] != 0:
                f = w[p]
                for i in range(len(w)):
                    w[i] -= f * row[i]
        return tuple(w[i] for i in comp)

    return project


def subalgebra(alg: LieAlgebra, space: Subspace, name: Optional[str] = None) -> LieAlgebra:
    """The algebra structure induced on a bracket-closed subspace, expressed
    in the subspace's canonical echelon basis."""
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, u in enumerate(space.basis):
        for j in range(i + 1, space.dim):
            w = bracket(alg, u, space.basis[j])
            coords = space.coordinates(w)
            if coords is None:
                raise NotAnIdeal("subspace is not closed under bracketing")
            entry = {k + 1: c for k, c in enumerate(coords) if c != 0}
            if entry:
                brackets[(i + 1, j + 1)] = entry
    return make_algebra(space.dim, brackets, name)


def quotient_map_matrix(alg: LieAlgebra, ideal: Ideal) -> Matrix:
    """Matrix of the projection L -> L/I in the complement coordinates."""
    comp = complement_coordinates(ideal.space)
    proj = _projection_to_complement(ideal.space, comp)
    cols = [proj(alg.basis_vector(j)) for j in range(alg.dim)]
    return Matrix.from_columns(cols)


def induced_operator_on_quotient(alg: LieAlgebra, op: Matrix, ideal: Ideal) -> Matrix:
    """Matrix of the operator induced on L/I; requires op(I) <= I."""
    for b in ideal.space.basis:
        if not ideal.space.contains(op.apply(b)):
            raise NotAnIdeal("operator does not preserve the ideal")
    comp = complement_coordinates(ideal.space)
    proj = _projection_to_complement(ideal.space, comp)
    cols = [proj(op.apply(alg.basis_vector(j))) for j in comp]
    return Matrix.from_columns(cols) if cols else Matrix.zero(0, 0)


# ---------------------------------------------------------------------------
# stock algebras
# ---------------------------------------------------------------------------

def abelian(n: int, name: Optional[str] = None) -> LieAlgebra:
    return make_algebra(n, {}, name or f"r{n}")


def heisenberg3() -> LieAlgebra:
    """Heisenberg algebra: [x2, x3] = x1."""
    return make_algebra(3, {(2, 3): {1: 1}}, "h3")


def filiform4() -> LieAlgebra:
    """Four-dimensional filiform algebra: [x2, x4] = x1, [x3, x4] = x2."""
    return make_algebra(4, {(2, 4): {1: 1}, (3, 4): {2: 1}}, "g4")


def r_plus_heisenberg() -> LieAlgebra:
    """Direct sum of the Heisenberg algebra and a line: [x2, x3] = x1."""
    return direct_sum(heisenberg3(), abelian(1), "r_plus_h3")
