"""Derivation spaces, inner derivations, and cohomology transversals."""

import random
from fractions import Fraction

import pytest

from liecodim.deriv import (
    NotADerivation,
    derivation_space,
    derived_invariance_holds,
    induced_quotient_map,
    is_derivation,
    is_outer,
    project_to_h1,
)
from liecodim.exactla import Matrix, Subspace
from liecodim.liealg import (
    Ideal,
    abelian,
    adjoint_matrix,
    derived_subalgebra,
    filiform4,
    heisenberg3,
    r_plus_heisenberg,
    center,
)

F = Fraction


def h3_general_derivation(a, b, c, e, f, g) -> Matrix:
    return Matrix.from_rows([[a + b, f, g], [0, a, c], [0, e, b]])


class TestDimensions:
    def test_heisenberg(self):
        sp = derivation_space(heisenberg3())
        assert (sp.dim_full, sp.dim_inner, sp.dim_h1) == (6, 2, 4)

    def test_abelian_full_matrix_space(self):
        sp = derivation_space(abelian(3))
        assert (sp.dim_full, sp.dim_inner, sp.dim_h1) == (9, 0, 9)

    def test_line_plus_heisenberg(self):
        sp = derivation_space(r_plus_heisenberg())
        assert sp.dim_h1 == 8

    def test_filiform(self):
        sp = derivation_space(filiform4())
        assert sp.dim_h1 == 4


class TestShapes:
    def test_heisenberg_general_form(self):
        """Every derivation is [[a+b, f, g], [0, a, c], [0, e, b]]."""
        sp = derivation_space(heisenberg3())
        probes = [(1, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0),
                  (0, 0, 0, 1, 0, 0), (0, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 1),
                  (2, -1, 3, 5, -2, 7)]
        for args in probes:
            m = h3_general_derivation(*map(F, args))
            assert sp.full.contains(m.flatten())
        expected = Subspace.from_vectors(9, [
            h3_general_derivation(*map(F, p)).flatten() for p in probes])
        assert expected == sp.full

    def test_heisenberg_transversal_kills_inner_slots(self):
        """The distinguished representatives zero the (1,2) and (1,3) slots."""
        sp = derivation_space(heisenberg3())
        for m in sp.h1_basis_matrices():
            assert m.entries[0][1] == 0 and m.entries[0][2] == 0

    def test_line_plus_heisenberg_transversal_shape(self):
        sp = derivation_space(r_plus_heisenberg())

        def shaped(a, b, c, e, f, g, h, k):
            z = F(0)
            return Matrix.from_rows([
                [a + b, z, z, k], [z, a, e, z], [z, f, b, z], [z, g, h, c]])

        probes = [tuple(F(x) for x in p) for p in (
            (1, 0, 0, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0, 0, 0),
            (0, 0, 1, 0, 0, 0, 0, 0), (0, 0, 0, 1, 0, 0, 0, 0),
            (0, 0, 0, 0, 1, 0, 0, 0), (0, 0, 0, 0, 0, 1, 0, 0),
            (0, 0, 0, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 0, 0, 1))]
        expected = Subspace.from_vectors(
            16, [shaped(*p).flatten() for p in probes])
        assert expected == sp.complement

    def test_filiform_transversal_shape(self):
        sp = derivation_space(filiform4())

        def shaped(a, b, c, e):
            z = F(0)
            return Matrix.from_rows([
                [a + 2 * b, z, e, z], [z, a + b, z, z],
                [z, z, a, c], [z, z, z, b]])

        expected = Subspace.from_vectors(16, [
            shaped(F(1), F(0), F(0), F(0)).flatten(),
            shaped(F(0), F(1), F(0), F(0)).flatten(),
            shaped(F(0), F(0), F(1), F(0)).flatten(),
            shaped(F(0), F(0), F(0), F(1)).flatten()])
        assert expected == sp.complement

    def test_inner_space_is_adjoint_span(self):
        h3 = heisenberg3()
        sp = derivation_space(h3)
        assert sp.inner == Subspace.from_vectors(9, [
            adjoint_matrix(h3, h3.basis_vector(1)).flatten(),
            adjoint_matrix(h3, h3.basis_vector(2)).flatten()])

    def test_leibniz_holds_on_full_basis(self):
        for alg in (heisenberg3(), r_plus_heisenberg(), filiform4()):
            sp = derivation_space(alg)
            for v in sp.full.basis:
                assert is_derivation(alg, sp.matrix_from_flat(v))


class TestProjection:
    def test_inner_projects_to_zero(self):
        h3 = heisenberg3()
        sp = derivation_space(h3)
        cls = project_to_h1(sp, adjoint_matrix(h3, (F(2), F(-1), F(3))))
        assert cls.is_zero()

    def test_upper_slots_are_quotiented_away(self):
        sp = derivation_space(heisenberg3())
        with_fg = h3_general_derivation(F(1), F(2), F(0), F(0), F(5), F(-7))
        without = h3_general_derivation(F(1), F(2), F(0), F(0), F(0), F(0))
        assert project_to_h1(sp, with_fg) == project_to_h1(sp, without)

    def test_inner_shift_preserves_class(self):
        h3 = heisenberg3()
        sp = derivation_space(h3)
        d = h3_general_derivation(F(1), F(2), F(3), F(0), F(0), F(0))
        shifted = d + adjoint_matrix(h3, h3.basis_vector(1))
        assert project_to_h1(sp, d) == project_to_h1(sp, shifted)

    def test_rejects_non_derivations(self):
        sp = derivation_space(heisenberg3())
        bad = Matrix.from_rows([[0, 0, 0], [1, 0, 0], [0, 0, 0]])
        with pytest.raises(NotADerivation):
            project_to_h1(sp, bad)

    def test_projection_linear_and_idempotent(self):
        rng = random.Random(3)
        h3 = heisenberg3()
        sp = derivation_space(h3)
        for _ in range(30):
            args = [F(rng.randint(-4, 4)) for _ in range(6)]
            d = h3_general_derivation(*args)
            rep = project_to_h1(sp, d).representative
            assert project_to_h1(sp, rep).representative == rep
            d2 = h3_general_derivation(*[F(rng.randint(-4, 4))
                                         for _ in range(6)])
            lhs = project_to_h1(sp, d + d2).representative
            rhs = rep + project_to_h1(sp, d2).representative
            assert lhs == rhs

    def test_kernel_is_exactly_inner(self):
        h3 = heisenberg3()
        sp = derivation_space(h3)
        rng = random.Random(5)
        for _ in range(20):
            u = tuple(F(rng.randint(-3, 3)) for _ in range(3))
            assert project_to_h1(sp, adjoint_matrix(h3, u)).is_zero()
        d = Matrix.diagonal([2, 1, 1])
        assert not project_to_h1(sp, d).is_zero()


class TestOuter:
    def test_adjoint_is_not_outer(self):
        h3 = heisenberg3()
        sp = derivation_space(h3)
        assert not is_outer(sp, adjoint_matrix(h3, h3.basis_vector(2)))

    def test_diagonal_derivation_is_outer(self):
        sp = derivation_space(heisenberg3())
        assert is_outer(sp, Matrix.diagonal([2, 1, 1]))

    def test_zero_is_not_outer(self):
        sp = derivation_space(heisenberg3())
        assert not is_outer(sp, Matrix.zero(3, 3))


class TestInducedMaps:
    def test_heisenberg_quotient_block(self):
        h3 = heisenberg3()
        d = h3_general_derivation(F(1), F(2), F(3), F(4), F(0), F(0))
        induced = induced_quotient_map(h3, d, derived_subalgebra(h3))
        assert induced == Matrix.from_rows([[1, 3], [4, 2]])

    def test_identity_induces_identity(self):
        h3 = heisenberg3()
        induced = induced_quotient_map(
            h3, Matrix.identity(3), derived_subalgebra(h3))
        assert induced == Matrix.identity(2)

    def test_double_extension_induced_map(self):
        """The z-action on (R*y + Heisenberg)/[H,H] has a zero tail row."""
        k = r_plus_heisenberg()
        a, b, c, e, h = F(1), F(-1), F(2), F(3), F(5)
        d = Matrix.from_rows([
            [a + b, 0, 0, h], [0, a, c, 0], [0, e, b, 0], [0, 0, 0, 0]])
        der_h_in_k = Ideal(k, Subspace.from_vectors(
            4, [(F(1), F(0), F(0), F(0))]))
        induced = induced_quotient_map(k, d, der_h_in_k)
        assert induced == Matrix.from_rows(
            [[a, c, 0], [e, b, 0], [0, 0, 0]])

    def test_derived_always_invariant(self):
        rng = random.Random(9)
        for alg in (heisenberg3(), r_plus_heisenberg(), filiform4()):
            sp = derivation_space(alg)
            for _ in range(20):
                coeffs = [F(rng.randint(-3, 3)) for _ in sp.full.basis]
                flat = [F(0)] * alg.dim ** 2
                for cf, basis_vec in zip(coeffs, sp.full.basis):
                    for i, x in enumerate(basis_vec):
                        flat[i] += cf * x
                d = sp.matrix_from_flat(tuple(flat))
                assert derived_invariance_holds(alg, d)

    def test_commutator_closure(self):
        for alg in (heisenberg3(), filiform4()):
            sp = derivation_space(alg)
            mats = [sp.matrix_from_flat(v) for v in sp.full.basis]
            for i, d1 in enumerate(mats):
                for d2 in mats[i + 1:]:
                    assert is_derivation(alg, d1 @ d2 - d2 @ d1)

    def test_inner_dim_matches_center(self):
        for alg in (heisenberg3(), r_plus_heisenberg(), filiform4(),
                    abelian(3)):
            sp = derivation_space(alg)
            assert sp.dim_inner == alg.dim - center(alg).dim
