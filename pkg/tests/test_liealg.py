"""Structure-constant algebras: construction, series, centers, quotients."""

from fractions import Fraction

import pytest

from liecodim.exactla import Matrix, Subspace
from liecodim.liealg import (
    Ideal,
    JacobiViolation,
    LieAlgebra,
    abelian,
    adjoint_matrix,
    bracket,
    center,
    derived_series,
    derived_subalgebra,
    direct_sum,
    filiform4,
    heisenberg3,
    is_nilpotent,
    is_solvable,
    lower_central_series,
    make_algebra,
    quotient,
    r_plus_heisenberg,
    restricted_adjoint,
    subalgebra,
    validate_jacobi,
)
from liecodim.ext import extend_by_derivation

from oracles import jacobi_residual

F = Fraction


def vec(*xs):
    return tuple(F(x) for x in xs)


CATALOG = [abelian(1), abelian(2), abelian(3), abelian(4),
           heisenberg3(), r_plus_heisenberg(), filiform4()]


class TestConstruction:
    def test_heisenberg(self):
        h3 = make_algebra(3, {(2, 3): {1: 1}})
        assert h3.bracket_basis(1, 2) == vec(1, 0, 0)

    def test_filiform(self):
        g4 = make_algebra(4, {(2, 4): {1: 1}, (3, 4): {2: 1}})
        assert g4.bracket_basis(1, 3) == vec(1, 0, 0, 0)
        assert g4.bracket_basis(2, 3) == vec(0, 1, 0, 0)

    def test_two_dim_solvable_is_fine(self):
        make_algebra(2, {(1, 2): {1: 1}})

    def test_jacobi_violation_reported(self):
        bad = {(1, 2): {3: 1}, (1, 3): {1: 1}, (2, 3): {2: 1}}
        residual = jacobi_residual(bad, 3, 1, 2, 3)
        assert residual != [F(0)] * 3  # oracle: genuinely violating table
        with pytest.raises(JacobiViolation) as err:
            make_algebra(3, bad)
        assert err.value.triple == (1, 2, 3)
        assert list(err.value.residual) == residual

    def test_skip_jacobi_for_negative_paths(self):
        bad = {(1, 2): {3: 1}, (1, 3): {1: 1}, (2, 3): {2: 1}}
        alg = make_algebra(3, bad, skip_jacobi=True)
        with pytest.raises(JacobiViolation):
            validate_jacobi(alg)

    def test_bad_indices_rejected(self):
        with pytest.raises(ValueError):
            make_algebra(2, {(2, 1): {1: 1}})


class TestBracket:
    def test_heisenberg_defining_bracket(self):
        h3 = heisenberg3()
        assert bracket(h3, h3.basis_vector(1), h3.basis_vector(2)) == vec(1, 0, 0)

    def test_alternating(self):
        h3 = heisenberg3()
        u = vec(1, 2, 3)
        assert bracket(h3, u, u) == vec(0, 0, 0)

    def test_antisymmetry(self):
        h3 = heisenberg3()
        assert bracket(h3, h3.basis_vector(2), h3.basis_vector(1)) == vec(-1, 0, 0)


class TestSeries:
    def test_heisenberg_derived(self):
        der = derived_subalgebra(heisenberg3())
        assert der.space == Subspace.from_vectors(3, [vec(1, 0, 0)])

    def test_abelian_derived_zero(self):
        assert derived_subalgebra(abelian(4)).dim == 0

    def test_filiform_derived(self):
        der = derived_subalgebra(filiform4())
        assert der.space == Subspace.from_vectors(
            4, [vec(1, 0, 0, 0), vec(0, 1, 0, 0)])

    def test_heisenberg_series_dims(self):
        h3 = heisenberg3()
        assert [i.dim for i in derived_series(h3)] == [3, 1, 0]
        assert is_solvable(h3) and is_nilpotent(h3)

    def test_abelian_series(self):
        assert [i.dim for i in derived_series(abelian(5))] == [5, 0]

    def test_extension_solvable_not_nilpotent(self):
        # adjoin a generator acting by the nilpotent-plus-scalar form
        d = Matrix.from_rows([[2, 0, 0], [0, 1, 1], [0, 0, 1]])
        ext = extend_by_derivation(heisenberg3(), d)
        assert is_solvable(ext)
        assert not is_nilpotent(ext)
        assert lower_central_series(ext)[-1].dim == 3


class TestCenter:
    def test_heisenberg_center(self):
        assert center(heisenberg3()).space == Subspace.from_vectors(
            3, [vec(1, 0, 0)])

    def test_abelian_center_everything(self):
        assert center(abelian(3)).dim == 3

    def test_filiform_center(self):
        assert center(filiform4()).space == Subspace.from_vectors(
            4, [vec(1, 0, 0, 0)])

    def test_inner_dimension_count(self):
        for alg in CATALOG:
            inner = Subspace.from_vectors(alg.dim ** 2, [
                adjoint_matrix(alg, alg.basis_vector(i)).flatten()
                for i in range(alg.dim)])
            assert inner.dim == alg.dim - center(alg).dim


class TestAdjoint:
    def test_heisenberg_ad_x2(self):
        h3 = heisenberg3()
        expected = Matrix.zero(3, 3)
        expected = Matrix.from_rows([[0, 0, 1], [0, 0, 0], [0, 0, 0]])
        assert adjoint_matrix(h3, h3.basis_vector(1)) == expected

    def test_central_vector_acts_trivially(self):
        h3 = heisenberg3()
        assert adjoint_matrix(h3, h3.basis_vector(0)).is_zero()

    def test_filiform_restricted_adjoint(self):
        g4 = filiform4()
        restricted = restricted_adjoint(g4, g4.basis_vector(3))
        assert restricted == Matrix.from_rows([[0, -1], [0, 0]])
        assert restricted @ restricted == Matrix.zero(2, 2)


class TestSumsAndQuotients:
    def test_direct_sum_line_plus_heisenberg(self):
        alg = r_plus_heisenberg()
        assert alg.dim == 4
        assert alg.table == ((((1, 2), vec(1, 0, 0, 0))),)

    def test_quotient_by_center_is_abelian(self):
        h3 = heisenberg3()
        q = quotient(h3, center(h3))
        assert q.dim == 2 and not q.table

    def test_quotient_by_zero_ideal(self):
        h3 = heisenberg3()
        q = quotient(h3, Ideal(h3, Subspace.zero(3)))
        assert q.table == h3.table

    def test_quotient_derived_compatibility(self):
        for alg in (heisenberg3(), filiform4(), r_plus_heisenberg()):
            der = derived_subalgebra(alg)
            pieces = derived_series(alg)
            if len(pieces) < 2 or pieces[1].dim == 0:
                continue
            inner_ideal = Ideal(alg, derived_subalgebra(
                subalgebra(alg, der.space)).space)
            # (L/I)' = image of L' for I inside L'
            center_ideal = center(alg)
            if not der.space.contains_subspace(center_ideal.space):
                continue
            q = quotient(alg, center_ideal)
            q_der = derived_subalgebra(q)
            assert q_der.dim <= der.dim

    def test_derived_is_ideal(self):
        for alg in CATALOG:
            der = derived_subalgebra(alg)
            for i in range(alg.dim):
                for w in der.space.basis:
                    assert der.space.contains(
                        bracket(alg, alg.basis_vector(i), w))

    def test_subalgebra_structure(self):
        g4 = filiform4()
        der = derived_subalgebra(g4)
        sub = subalgebra(g4, der.space)
        assert sub.dim == 2 and not sub.table  # abelian kernel
