"""Extensions, membership conditions, decomposability, witnesses."""

import random
from fractions import Fraction

import pytest

from liecodim.deriv import NotADerivation, derivation_space
from liecodim.exactla import Matrix, NotInvertible, Subspace
from liecodim.ext import (
    ExtensionSpec,
    IdentityFails,
    LieCSpec,
    NotAutomorphism,
    PreconditionViolated,
    assemble_extension_witness,
    build_double_extension,
    change_of_basis,
    check_codim1_condition,
    check_codim2_condition,
    decompose_inner_extension,
    double_extension_matrix,
    extend_by_derivation,
    is_decomposable_double,
    lie_c_iso_check,
    verify_iso_witness_full,
    verify_weak_similarity_witness,
    witness_from_triple,
)
from liecodim.liealg import (
    abelian,
    adjoint_matrix,
    bracket,
    derived_subalgebra,
    direct_sum,
    filiform4,
    heisenberg3,
    make_algebra,
    r_plus_heisenberg,
)

F = Fraction


def vec(*xs):
    return tuple(F(x) for x in xs)


def rp_shape(a, b, c, e, f, g, h, k):
    z = F(0)
    return Matrix.from_rows([
        [a + b, z, z, k], [z, a, e, z], [z, f, b, z], [z, g, h, c]])


class TestExtendByDerivation:
    def test_abelian_with_diagonal(self):
        d = Matrix.diagonal([1, 1, F(1, 2)])
        ext = extend_by_derivation(abelian(3), d)
        assert ext.dim == 4
        assert check_codim1_condition(abelian(3), d).member

    def test_zero_derivation_gives_direct_sum(self):
        ext = extend_by_derivation(heisenberg3(), Matrix.zero(3, 3))
        assert ext.table == direct_sum(heisenberg3(), abelian(1)).table

    def test_named_family_brackets(self):
        ext = extend_by_derivation(heisenberg3(), Matrix.diagonal([2, 1, 1]))
        # [x4, x1] = 2 x1, [x4, x2] = x2, [x4, x3] = x3 (stored as i < j)
        assert ext.bracket_basis(0, 3) == vec(-2, 0, 0, 0)
        assert ext.bracket_basis(1, 3) == vec(0, -1, 0, 0)
        assert ext.bracket_basis(2, 3) == vec(0, 0, -1, 0)
        assert ext.bracket_basis(1, 2) == vec(1, 0, 0, 0)

    def test_rejects_non_derivation(self):
        with pytest.raises(NotADerivation):
            extend_by_derivation(
                heisenberg3(),
                Matrix.from_rows([[0, 0, 0], [1, 0, 0], [0, 0, 0]]))


class TestCodimOneCondition:
    def test_heisenberg_invertible_block(self):
        d = Matrix.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]])
        verdict = check_codim1_condition(heisenberg3(), d)
        assert verdict.member
        assert verdict.lower_block_rank == 2

    def test_inner_derivations_never_members(self):
        h3 = heisenberg3()
        rng = random.Random(1)
        for _ in range(20):
            u = tuple(F(rng.randint(-3, 3)) for _ in range(3))
            verdict = check_codim1_condition(h3, adjoint_matrix(h3, u))
            assert not verdict.member

    def test_abelian_reads_invertibility(self):
        assert check_codim1_condition(
            abelian(3), Matrix.diagonal([1, 2, 3])).member
        assert not check_codim1_condition(
            abelian(3), Matrix.diagonal([1, 2, 0])).member

    def test_derived_algebra_identity(self):
        """The derived algebra of the extension is d(K) + [K, K]."""
        rng = random.Random(4)
        for alg in (heisenberg3(), r_plus_heisenberg(), filiform4(),
                    abelian(3)):
            sp = derivation_space(alg)
            for _ in range(15):
                flat = [F(0)] * alg.dim ** 2
                for b in sp.full.basis:
                    c = F(rng.randint(-2, 2))
                    for i, x in enumerate(b):
                        flat[i] += c * x
                d = sp.matrix_from_flat(tuple(flat))
                ext = extend_by_derivation(alg, d)
                der_ext = derived_subalgebra(ext)
                expected = Subspace.from_vectors(alg.dim, [
                    d.column(j) for j in range(alg.dim)] + list(
                        derived_subalgebra(alg).space.basis))
                padded = Subspace.from_vectors(ext.dim, [
                    v + (F(0),) for v in expected.basis])
                assert der_ext.space == padded

    def test_member_extension_has_full_codim_one(self):
        d = Matrix.diagonal([2, 1, 1])
        ext = extend_by_derivation(heisenberg3(), d)
        assert derived_subalgebra(ext).dim == ext.dim - 1


class TestDoubleExtension:
    def test_tail_chain_member(self):
        h = abelian(2)
        d_on_h = Matrix.from_rows([[1, 0], [0, 0]])
        zy = vec(0, 1)
        ext = build_double_extension(h, Matrix.zero(2, 2), d_on_h, zy)
        assert ext.dim == 4
        d_full = double_extension_matrix(h, d_on_h, zy)
        assert check_codim2_condition(h, Matrix.zero(2, 2), d_full).member

    def test_trivial_double_extension(self):
        h = heisenberg3()
        ext = build_double_extension(
            h, Matrix.zero(3, 3), Matrix.zero(3, 3), vec(0, 0, 0))
        # only the Heisenberg bracket survives: a direct sum with a plane
        assert ext.table == direct_sum(h, abelian(2)).table

    def test_heisenberg_indecomposable_form(self):
        h = heisenberg3()
        d_on_h = Matrix.diagonal([0, 1, -1])
        ext = build_double_extension(h, Matrix.zero(3, 3), d_on_h, vec(1, 0, 0))
        assert ext.dim == 5
        d_full = double_extension_matrix(h, d_on_h, vec(1, 0, 0))
        assert check_codim2_condition(h, Matrix.zero(3, 3), d_full).member

    def test_inner_pair_is_never_member(self):
        h = heisenberg3()
        d_prime = adjoint_matrix(h, h.basis_vector(1))
        k = extend_by_derivation(h, d_prime)
        u = vec(0, 1, 1, 0)
        d_full = adjoint_matrix(k, u)
        assert all(d_full.entries[3][j] == 0 for j in range(4))
        verdict = check_codim2_condition(
            h, d_prime, d_full)
        assert not verdict.member

    def test_membership_rank_two_examples(self):
        h = abelian(2)
        good = double_extension_matrix(
            h, Matrix.from_rows([[1, 0], [0, 0]]), vec(0, 1))
        assert check_codim2_condition(h, Matrix.zero(2, 2), good).member
        bad = double_extension_matrix(
            h, Matrix.from_rows([[1, 0], [0, 0]]), vec(1, 0))
        assert not check_codim2_condition(h, Matrix.zero(2, 2), bad).member


class TestDecomposability:
    def test_abelian_nonsingular_decomposable(self):
        h = abelian(3)
        spec = ExtensionSpec(h, Matrix.zero(3, 3),
                             Matrix.diagonal([1, 2, 3]), vec(0, 0, 1))
        cert = is_decomposable_double(h, spec)
        assert cert.decomposable
        assert cert.center_preimage is not None

    def test_heisenberg_offdiagonal_indecomposable(self):
        h = heisenberg3()
        spec = ExtensionSpec(h, Matrix.zero(3, 3),
                             Matrix.diagonal([0, 1, -1]), vec(1, 0, 0))
        assert not is_decomposable_double(h, spec).decomposable

    def test_zero_bracket_always_decomposable(self):
        h = heisenberg3()
        spec = ExtensionSpec(h, Matrix.zero(3, 3),
                             Matrix.diagonal([0, 1, -1]), vec(0, 0, 0))
        assert is_decomposable_double(h, spec).decomposable

    def test_abelian_agreement_suite(self):
        rng = random.Random(17)
        for n in (2, 3):
            h = abelian(n)
            for _ in range(200):
                d_on_h = Matrix.from_rows(
                    [[F(rng.randint(-3, 3)) for _ in range(n)]
                     for _ in range(n)])
                zy = tuple(F(rng.randint(-3, 3)) for _ in range(n))
                spec = ExtensionSpec(h, Matrix.zero(n, n), d_on_h, zy)
                cert = is_decomposable_double(h, spec)
                d_full = double_extension_matrix(h, d_on_h, zy)
                if d_full.rank() == n:
                    assert cert.decomposable == (d_on_h.det() != 0)


class TestFullWitness:
    def test_identity(self):
        h3 = heisenberg3()
        assert verify_iso_witness_full(h3, h3, Matrix.identity(3))

    def test_singular_rejected(self):
        h3 = heisenberg3()
        with pytest.raises(NotInvertible):
            verify_iso_witness_full(h3, h3, Matrix.zero(3, 3))

    def test_sign_flip_relating_parameter_signs(self):
        """diag(-1,-1,1,1,-1) carries the rotation-pair family at (lam, c)
        onto the one at (-lam, -c)."""
        base = r_plus_heisenberg()
        lam, c = F(2), F(3)
        d1 = rp_shape(lam, lam, c, F(1), F(-1), F(0), F(0), F(0))
        d2 = rp_shape(-lam, -lam, -c, F(1), F(-1), F(0), F(0), F(0))
        l1 = extend_by_derivation(base, d1)
        l2 = extend_by_derivation(base, d2)
        t = Matrix.diagonal([-1, -1, 1, 1, -1])
        assert verify_iso_witness_full(l1, l2, t)

    def test_wrong_target_fails(self):
        base = r_plus_heisenberg()
        d1 = rp_shape(F(2), F(2), F(3), F(1), F(-1), F(0), F(0), F(0))
        d2 = rp_shape(F(2), F(2), F(5), F(1), F(-1), F(0), F(0), F(0))
        l1 = extend_by_derivation(base, d1)
        l2 = extend_by_derivation(base, d2)
        t = Matrix.diagonal([-1, -1, 1, 1, -1])
        assert not verify_iso_witness_full(l1, l2, t)


class TestTripleWitness:
    def test_inner_shift(self):
        h3 = heisenberg3()
        d2 = Matrix.diagonal([2, 1, 1])
        u = vec(0, 1, -2)
        d1 = d2 + adjoint_matrix(h3, u)
        t, ok = witness_from_triple(
            h3, d1, d2, Matrix.identity(3), F(1), u)
        assert ok
        assert t == assemble_extension_witness(Matrix.identity(3), F(1), u)

    def test_reciprocal_parameter_fold(self):
        """sigma = (pair rotation) + tail scaling links the diagonal family
        at (alpha, beta) with the one at (1/alpha, beta/alpha)."""
        base = r_plus_heisenberg()
        alpha, beta = F(2), F(3)
        d1 = rp_shape(F(1), alpha, beta, 0, 0, 0, 0, 0)
        d2 = rp_shape(F(1), 1 / alpha, beta / alpha, 0, 0, 0, 0, 0)
        sigma = Matrix.from_rows([
            [1, 0, 0, 0],
            [0, 0, -1, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1 / alpha]])
        t, ok = witness_from_triple(base, d1, d2, sigma, alpha, vec(0, 0, 0, 0))
        assert ok
        l1 = extend_by_derivation(base, d1)
        l2 = extend_by_derivation(base, d2)
        assert verify_iso_witness_full(l1, l2, t)

    def test_identity_failure_reported(self):
        h3 = heisenberg3()
        d1 = Matrix.diagonal([2, 1, 1])
        d2 = Matrix.diagonal([3, 2, 1])
        with pytest.raises(IdentityFails):
            witness_from_triple(h3, d1, d2, Matrix.identity(3), F(1),
                                vec(0, 0, 0))

    def test_non_automorphism_rejected(self):
        h3 = heisenberg3()
        sigma = Matrix.diagonal([1, 1, 2])  # det scaling breaks the bracket
        with pytest.raises(NotAutomorphism):
            witness_from_triple(h3, Matrix.diagonal([2, 1, 1]),
                                Matrix.diagonal([2, 1, 1]), sigma, F(1),
                                vec(0, 0, 0))


class TestInnerExtensionCollapse:
    def test_basis_change_reaches_direct_sum(self):
        rng = random.Random(31)
        for alg in (heisenberg3(), r_plus_heisenberg(), filiform4()):
            for _ in range(10):
                u = tuple(F(rng.randint(-3, 3)) for _ in range(alg.dim))
                rewritten, split = decompose_inner_extension(alg, u)
                assert rewritten.table == split.table


class TestWeakSimilarity:
    def test_identity_pair(self):
        a = Matrix.diagonal([1, 2])
        b = Matrix.from_rows([[0, 1], [0, 0]])
        assert verify_weak_similarity_witness(
            (a, b), (a, b), Matrix.identity(2), Matrix.identity(2))

    def test_generate_then_verify(self):
        rng = random.Random(41)
        for _ in range(20):
            n = rng.choice([2, 3])
            a = Matrix.from_rows([[F(rng.randint(-3, 3)) for _ in range(n)]
                                  for _ in range(n)])
            b = Matrix.from_rows([[F(rng.randint(-3, 3)) for _ in range(n)]
                                  for _ in range(n)])
            while True:
                s = Matrix.from_rows([[F(rng.randint(-2, 2))
                                       for _ in range(n)] for _ in range(n)])
                if s.det() != 0:
                    break
            while True:
                coeffs = Matrix.from_rows(
                    [[F(rng.randint(-2, 2)) for _ in range(2)]
                     for _ in range(2)])
                if coeffs.det() != 0:
                    break
            al, be = coeffs.entries[0]
            ga, de = coeffs.entries[1]
            s_inv = s.inverse()
            pair2 = (s_inv @ (a.scale(al) + b.scale(be)) @ s,
                     s_inv @ (a.scale(ga) + b.scale(de)) @ s)
            assert verify_weak_similarity_witness((a, b), pair2, s, coeffs)

    def test_requires_invertible_components(self):
        a = Matrix.diagonal([1, 2])
        with pytest.raises(NotInvertible):
            verify_weak_similarity_witness(
                (a, a), (a, a), Matrix.zero(2, 2), Matrix.identity(2))


def _commuting_outer_pair(rng, n):
    """A random commuting, non-proportional matrix pair spanning R^n."""
    while True:
        d = Matrix.from_rows([[F(rng.randint(-2, 2)) for _ in range(n)]
                              for _ in range(n)])
        c0, c1 = F(rng.randint(-2, 2)), F(rng.randint(1, 2))
        d_prime = Matrix.identity(n).scale(c0) + d.scale(c1) @ d
        span = Subspace.from_vectors(
            n * n, [d.flatten(), d_prime.flatten()])
        cover = Subspace.from_vectors(n, [d.column(j) for j in range(n)]
                                      + [d_prime.column(j) for j in range(n)])
        if (span.dim == 2 and cover.dim == n
                and not d.is_zero() and not d_prime.is_zero()):
            return d, d_prime


class TestPairExtensionIso:
    def test_identity_witness(self):
        rng = random.Random(53)
        d, d_prime = _commuting_outer_pair(rng, 2)
        spec = LieCSpec(2, d, d_prime)
        assert lie_c_iso_check(spec, spec, Matrix.identity(2),
                               Matrix.identity(2))

    def test_scaled_pair(self):
        rng = random.Random(59)
        d, d_prime = _commuting_outer_pair(rng, 3)
        spec1 = LieCSpec(3, d.scale(2), d_prime.scale(2))
        spec2 = LieCSpec(3, d, d_prime)
        coeffs = Matrix.from_rows([[0, 2], [2, 0]])
        assert lie_c_iso_check(spec1, spec2, Matrix.identity(3), coeffs)

    def test_proportional_pair_rejected(self):
        d = Matrix.diagonal([1, 2])
        with pytest.raises(PreconditionViolated):
            LieCSpec(2, d, d.scale(3)).build()
        with pytest.raises(PreconditionViolated):
            lie_c_iso_check(LieCSpec(2, d, Matrix.from_rows([[0, 1], [0, 0]])),
                            LieCSpec(2, d, d.scale(3)),
                            Matrix.identity(2), Matrix.identity(2))

    def test_noncommuting_pair_rejected(self):
        a = Matrix.from_rows([[0, 1], [0, 0]])
        b = Matrix.from_rows([[0, 0], [1, 0]])
        with pytest.raises(PreconditionViolated):
            LieCSpec(2, a, b)


class TestChangeOfBasis:
    def test_roundtrip(self):
        h3 = heisenberg3()
        p = Matrix.from_rows([[1, 1, 0], [0, 1, 0], [0, 0, 2]])
        moved = change_of_basis(h3, p)
        back = change_of_basis(moved, p.inverse())
        assert back.table == h3.table
