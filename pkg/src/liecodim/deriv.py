"""Derivation algebras, inner derivations, and first cohomology.

A derivation of L is a linear map d with d([x,y]) = [d(x),y] + [x,d(y)].
The full derivation space is the kernel of one linear system (one block of
n equations per basis pair i < j, n^2 unknowns); inner derivations are the
span of the adjoint matrices.  First cohomology is realized as a concrete
transversal of the inner derivations inside the full space, chosen
deterministically from echelon data, so every class has one distinguished
matrix representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactla import Matrix, Subspace, Vector, nullspace, vec_is_zero, vec_sub
from .liealg import (
    Ideal,
    LieAlgebra,
    adjoint_matrix,
    bracket,
    derived_subalgebra,
    induced_operator_on_quotient,
)


class NotADerivation(Exception):
    def __init__(self, pair: tuple[int, int], residual: Vector):
        self.pair = pair
        self.residual = residual
        super().__init__(
            f"Leibniz identity fails on basis pair {pair}; residual {residual}")


class IdealNotInvariant(Exception):
    pass


def leibniz_system(alg: LieAlgebra) -> Matrix:
    """Linear system whose kernel (in row-major matrix coordinates) is the
    space of derivations."""
    n = alg.dim
    rows: list[Vector] = []
    for i in range(n):
        for j in range(i + 1, n):
            cij = alg.bracket_basis(i, j)
            # rows for: sum_k c_ij^k d(x_k) - [d(x_i), x_j] - [x_i, d(x_j)] = 0
            for r in range(n):
                coeff = [Fraction(0)] * (n * n)
                # d(x_k) contributes d_{r k}
                for k in range(n):
                    if cij[k] != 0:
                        coeff[r * n + k] += cij[k]
                # [d(x_i), x_j] = sum_s d_{s i} [x_s, x_j]
                for s in range(n):
                    w = alg.bracket_basis(s, j)
                    if w[r] != 0:
                        coeff[s * n + i] -= w[r]
                # [x_i, d(x_j)] = sum_s d_{s j} [x_i, x_s]
                for s in range(n):
                    w = alg.bracket_basis(i, s)
                    if w[r] != 0:
                        coeff[s * n + j] -= w[r]
                rows.append(tuple(coeff))
    if not rows:
        rows = [tuple(Fraction(0) for _ in range(n * n))]
    return Matrix(len(rows), n * n, tuple(rows))


def is_derivation(alg: LieAlgebra, d: Matrix) -> bool:
    return leibniz_residual(alg, d) is None


def leibniz_residual(alg: LieAlgebra, d: Matrix) -> Optional[tuple[tuple[int, int], Vector]]:
    """First basis pair violating Leibniz, with its residual, else None."""
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            lhs = d.apply(alg.bracket_basis(i, j))
            rhs_1 = bracket(alg, d.apply(alg.basis_vector(i)), alg.basis_vector(j))
            rhs_2 = bracket(alg, alg.basis_vector(i), d.apply(alg.basis_vector(j)))
            residual = vec_sub(lhs, tuple(a + b for a, b in zip(rhs_1, rhs_2)))
            if not vec_is_zero(residual):
                return (i + 1, j + 1), residual
    return None


@dataclass(frozen=True)
class DerivationSpace:
    """Der, ad, and a distinguished cohomology transversal for one algebra.

    ``full`` and ``inner`` live in row-major matrix coordinates.  The
    transversal keeps exactly the full-space coefficients that are not
    consumed by the echelon pivots of the inner space, so representatives
    are unique and reproducible.
    """

    algebra: LieAlgebra
    full: Subspace
    inner: Subspace
    complement: Subspace
    _inner_pivot_data: tuple[tuple[Vector, int], ...]

    @property
    def dim_full(self) -> int:
        return self.full.dim

    @property
    def dim_inner(self) -> int:
        return self.inner.dim

    @property
    def dim_h1(self) -> int:
        return self.full.dim - self.inner.dim

    def matrix_from_flat(self, v: Vector) -> Matrix:
        n = self.algebra.dim
        return Matrix.unflatten(v, n, n)

    def h1_basis_matrices(self) -> list[Matrix]:
        return [self.matrix_from_flat(v) for v in self.complement.basis]


@dataclass(frozen=True)
class CohomologyClass:
    """A cohomology class held by its distinguished transversal representative."""

    space: DerivationSpace
    representative: Matrix

    def is_zero(self) -> bool:
        return self.representative.is_zero()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CohomologyClass):
            return NotImplemented
        return (self.space.algebra is other.space.algebra
                and self.representative == other.representative)


def derivation_space(alg: LieAlgebra) -> DerivationSpace:
    """Compute Der, ad and the cohomology transversal of an algebra."""
    full = nullspace(leibniz_system(alg))
    inner_vectors = [adjoint_matrix(alg, alg.basis_vector(i)).flatten()
                     for i in range(alg.dim)]
    inner = Subspace.from_vectors(alg.dim ** 2, inner_vectors)
    pivot_data = tuple(
        (row, next(i for i, x in enumerate(row) if x != 0)) for row in inner.basis)
    complement_vectors = [
        _reduce_against_pivots(v, pivot_data) for v in full.basis]
    complement = Subspace.from_vectors(alg.dim ** 2, complement_vectors)
    space = DerivationSpace(alg, full, inner, complement, pivot_data)
    if space.dim_h1 != complement.dim:
        raise AssertionError("internal: transversal dimension mismatch")
    return space


def _reduce_against_pivots(v: Vector,
                           pivot_data: tuple[tuple[Vector, int], ...]) -> Vector:
    w = list(v)
    for row, p in pivot_data:
        if w[p] != 0:
            f = w[p]
            for i in range(len(w)):
                w[i] -= f * row[i]
    return tuple(w)


def project_to_h1(space: DerivationSpace, d: Matrix) -> CohomologyClass:
    """Unique transversal representative of d modulo inner derivations.

    Requires d to be a derivation; raises :class:`NotADerivation` otherwise.
    """
    violation = leibniz_residual(space.algebra, d)
    if violation is not None:
        raise NotADerivation(*violation)
    reduced = _reduce_against_pivots(d.flatten(), space._inner_pivot_data)
    rep = space.matrix_from_flat(reduced)
    if not space.complement.contains(reduced):
        raise AssertionError("internal: projected representative left the transversal")
    return CohomologyClass(space, rep)


def is_outer(space: DerivationSpace, d: Matrix) -> bool:
    """True iff d is a derivation whose class modulo ad is nonzero."""
    return not project_to_h1(space, d).is_zero()


def induced_quotient_map(alg: LieAlgebra, d: Matrix, ideal: Ideal) -> Matrix:
    """Matrix induced by d on L/I, in the complement coordinates.

    d must preserve the ideal; for I = [L, L] this holds automatically for
    every derivation, by Leibniz.
    """
    try:
        return induced_operator_on_quotient(alg, d, ideal)
    except Exception as exc:  # noqa: BLE001 - translate to the documented error
        raise IdealNotInvariant(str(exc)) from exc


def derived_invariance_holds(alg: LieAlgebra, d: Matrix) -> bool:
    """d([L,L]) <= [L,L]; a Leibniz consequence, kept re-checkable."""
    der = derived_subalgebra(alg)
    return all(der.space.contains(d.apply(b)) for b in der.space.basis)
