"""One- and two-step extensions of nilpotent algebras, membership
conditions, decomposability, and witness-based isomorphism checks.

An extension by a derivation d adjoins one generator y acting by
[y, x] = d(x).  The double extension adjoins z on top of R*y + H, with the
bracket [z, y] stored explicitly as a vector in H.  Membership of the
result in the class "derived algebra has full expected dimension" is
decided by several independently implemented conditions whose agreement is
asserted at runtime; a disagreement is an internal contradiction, never a
user error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .exactla import (
    Matrix,
    NotInvertible,
    Subspace,
    Vector,
    solve,
    vec_is_zero,
)
from .deriv import NotADerivation, leibniz_residual
from .liealg import (
    Ideal,
    LieAlgebra,
    adjoint_matrix,
    bracket,
    center,
    complement_coordinates,
    derived_subalgebra,
    direct_sum,
    induced_operator_on_quotient,
    is_solvable,
    make_algebra,
    quotient_map_matrix,
)


class ConditionDisagreement(Exception):
    """Independently implemented equivalent conditions disagreed.

    This is an internal consistency trap; it must be unreachable.
    """


class NotAutomorphism(Exception):
    pass


class IdentityFails(Exception):
    def __init__(self, residual: Matrix):
        self.residual = residual
        super().__init__("witness identity does not hold exactly")


class PreconditionViolated(Exception):
    pass


@dataclass(frozen=True)
class ExtensionSpec:
    """Extension data: a base algebra plus one derivation, or a pair for the
    double extension with its explicit [z, y] vector."""

    base: LieAlgebra
    derivation: Matrix
    second: Optional[Matrix] = None
    bracket_zy: Optional[Vector] = None

    def is_double(self) -> bool:
        return self.second is not None


@dataclass(frozen=True)
class IsoWitness:
    """An isomorphism witness: either a full matrix T on the extensions, a
    triple (sigma, alpha, u) on the base, or (sigma, 2x2 coefficients) for
    pair extensions."""

    kind: str  # 'full' | 'triple' | 'pair'
    matrix: Optional[Matrix] = None
    sigma: Optional[Matrix] = None
    alpha: Optional[Fraction] = None
    u: Optional[Vector] = None
    coeffs: Optional[Matrix] = None


def _require_derivation(alg: LieAlgebra, d: Matrix) -> None:
    violation = leibniz_residual(alg, d)
    if violation is not None:
        raise NotADerivation(*violation)


def extend_by_derivation(K: LieAlgebra, d: Matrix,
                         name: Optional[str] = None) -> LieAlgebra:
    """The (dim K + 1)-dimensional algebra with new generator y, [y, x] = d(x).

    Jacobi is re-validated on the result; the solvability dimension bound
    dim [L, L] <= dim L - 1 is asserted afterwards.
    """
    n = K.dim
    if d.rows != n or d.cols != n:
        raise ValueError("derivation matrix has wrong shape")
    _require_derivation(K, d)
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (i, j), v in K.table:
        brackets[(i + 1, j + 1)] = {k + 1: c for k, c in enumerate(v) if c != 0}
    for j in range(n):
        col = d.column(j)
        entry = {k + 1: -c for k, c in enumerate(col) if c != 0}
        if entry:
            brackets[(j + 1, n + 1)] = entry  # [x_j, y] = -d(x_j)
    L = make_algebra(n + 1, brackets, name)
    if is_solvable(L):
        assert derived_subalgebra(L).dim <= L.dim - 1
    return L


@dataclass(frozen=True)
class CodimOneVerdict:
    """All evaluated membership conditions for a single extension, plus the
    common verdict (derived algebra of the extension is the whole base)."""

    member: bool
    span_inclusion: bool
    lower_block_rank: int
    lower_block_full: bool
    quotient_invertible: bool


def _adapted_basis_transform(K: LieAlgebra, ideal: Ideal) -> Matrix:
    """Basis change putting the ideal on the leading coordinates."""
    comp = complement_coordinates(ideal.space)
    cols = list(ideal.space.basis) + [K.basis_vector(i) for i in comp]
    return Matrix.from_columns(cols)


def check_codim1_condition(K: LieAlgebra, d: Matrix) -> CodimOneVerdict:
    """Decide whether R*y extended by d has derived algebra equal to K.

    Three conditions are evaluated independently (a span inclusion, the
    rank of the lower block of d in a basis adapted to [K, K], and the
    invertibility of the map induced on K/[K, K]); their agreement is
    asserted before the verdict is returned.
    """
    _require_derivation(K, d)
    n = K.dim
    der = derived_subalgebra(K)
    m = der.dim

    # span inclusion: complement directions of [K,K] lie in d(K) + [K,K]
    image_plus_derived = Subspace.from_vectors(
        n, [d.column(j) for j in range(n)] + list(der.space.basis))
    comp = complement_coordinates(der.space)
    cond_span = all(image_plus_derived.contains(K.basis_vector(i)) for i in comp)

    # lower-block rank in an adapted basis (abelian case reads rank d = n)
    p = _adapted_basis_transform(K, der)
    d_adapted = p.inverse() @ d @ p
    lower = d_adapted.submatrix(range(m, n), range(n))
    rank = lower.rank()
    cond_rank = rank == n - m

    # induced map on K/[K,K] is invertible
    induced = induced_operator_on_quotient(K, d, der)
    cond_quot = induced.rows == 0 or induced.det() != 0

    if not (cond_span == cond_rank == cond_quot):
        raise ConditionDisagreement(
            f"span={cond_span} rank={cond_rank} quotient={cond_quot}")
    return CodimOneVerdict(cond_span, cond_span, rank, cond_rank, cond_quot)


def double_extension_matrix(H: LieAlgebra, d_on_h: Matrix, bracket_zy: Vector) -> Matrix:
    """Assemble the action of z on R*y + H: d_on_h on H, bracket_zy as the
    image of y, zero row for y (the image lies inside H)."""
    n = H.dim
    if d_on_h.rows != n or d_on_h.cols != n or len(bracket_zy) != n:
        raise ValueError("double extension data has wrong shape")
    rows = []
    for i in range(n):
        rows.append(d_on_h.entries[i] + (bracket_zy[i],))
    rows.append(tuple(Fraction(0) for _ in range(n + 1)))
    return Matrix(n + 1, n + 1, tuple(rows))


def build_double_extension(H: LieAlgebra, d_prime: Matrix, d_on_h: Matrix,
                           bracket_zy: Vector, name: Optional[str] = None) -> LieAlgebra:
    """R*z extended over (R*y extended over H): a (dim H + 2)-dim algebra.

    d_prime is the action of y on H; d_on_h with bracket_zy gives the
    action of z (z maps the intermediate algebra into H).  Jacobi is
    re-validated on the assembled algebra.
    """
    K = extend_by_derivation(H, d_prime)
    d_full = double_extension_matrix(H, d_on_h, bracket_zy)
    return extend_by_derivation(K, d_full, name)


@dataclass(frozen=True)
class CodimTwoVerdict:
    member: bool
    span_inclusion: bool
    quotient_images_cover: bool


def check_codim2_condition(H: LieAlgebra, d_prime: Matrix,
                           d_full: Matrix) -> CodimTwoVerdict:
    """Decide whether the double extension has derived algebra equal to H.

    ``d_full`` is the (n+1)-square action of z on R*y + H with zero y-row.
    Two conditions are evaluated independently: a span inclusion inside H,
    and coverage of H/[H,H] by the images of the two induced quotient
    maps.  Their agreement is asserted.
    """
    n = H.dim
    _require_derivation(H, d_prime)
    K = extend_by_derivation(H, d_prime)
    _require_derivation(K, d_full)
    if any(d_full.entries[n][j] != 0 for j in range(n + 1)):
        raise ValueError("the action of z must map everything into H")

    der_h = derived_subalgebra(H)
    # condition: complement of [H,H] inside d(K) + d'(H) + [H,H]
    image_vectors = [d_full.column(j)[:n] for j in range(n + 1)]
    image_vectors += [d_prime.column(j) for j in range(n)]
    span = Subspace.from_vectors(n, image_vectors + list(der_h.space.basis))
    comp = complement_coordinates(der_h.space)
    cond_span = all(span.contains(H.basis_vector(i)) for i in comp)

    # condition: images of the induced maps cover H/[H,H]
    der_h_in_k = Ideal(K, Subspace.from_vectors(
        n + 1, [v + (Fraction(0),) for v in der_h.space.basis]))
    q_k = quotient_map_matrix(K, der_h_in_k)
    d_tilde_image = [q_k.apply(d_full.column(j)) for j in range(n + 1)]
    q_h_dim = q_k.rows
    dprime_ext = double_extension_matrix(H, d_prime, tuple(Fraction(0)
                                                           for _ in range(n)))
    dprime_tilde_image = [q_k.apply(dprime_ext.column(j)) for j in range(n + 1)]
    h_image = [q_k.apply(H.basis_vector(i) + (Fraction(0),)) for i in range(n)]
    covered = Subspace.from_vectors(q_h_dim, d_tilde_image + dprime_tilde_image)
    cond_quot = all(covered.contains(v) for v in h_image)

    if cond_span != cond_quot:
        raise ConditionDisagreement(f"span={cond_span} quotient images={cond_quot}")
    return CodimTwoVerdict(cond_span, cond_span, cond_quot)


@dataclass(frozen=True)
class DecomposabilityCertificate:
    decomposable: bool
    center_preimage: Optional[Vector]  # x' in Z(H) with d(x') = [z, y]


def is_decomposable_double(H: LieAlgebra, spec: ExtensionSpec) -> DecomposabilityCertificate:
    """Decide decomposability of a double extension in normalized form.

    Preconditions: the intermediate derivation has been normalized away
    (``spec.second`` acts on H, ``spec.derivation`` is the y-action and
    must be zero here).  The criterion is membership of [z, y] in the image
    of the center of H under the z-action; for abelian H the result is
    cross-checked against invertibility of that action.
    """
    if spec.second is None or spec.bracket_zy is None:
        raise PreconditionViolated("double extension data required")
    if not spec.derivation.is_zero():
        raise PreconditionViolated("intermediate derivation must be normalized to zero")
    d_on_h = spec.second
    zy = spec.bracket_zy
    z_h = center(H)
    cols = [d_on_h.apply(b) for b in z_h.space.basis]
    preimage_coords = None
    if cols:
        system = Matrix.from_columns(cols)
        preimage_coords = solve(system, zy)
    decomposable = (vec_is_zero(zy) or
                    (preimage_coords is not None))
    certificate = None
    if decomposable and preimage_coords:
        certificate = tuple(
            sum(preimage_coords[k] * z_h.space.basis[k][i]
                for k in range(len(preimage_coords)))
            for i in range(H.dim))
    elif decomposable:
        certificate = tuple(Fraction(0) for _ in range(H.dim))

    if not H.table:
        # Abelian base: once the extension really has full derived algebra,
        # decomposability is equivalent to the z-action being nonsingular.
        d_full = double_extension_matrix(H, d_on_h, zy)
        member = d_full.rank() == H.dim
        if member:
            nonsingular = d_on_h.det() != 0
            if nonsingular != decomposable:
                raise ConditionDisagreement(
                    f"center-image test={decomposable} nonsingular={nonsingular}")
    return DecomposabilityCertificate(decomposable, certificate)


def verify_iso_witness_full(L1: LieAlgebra, L2: LieAlgebra, T: Matrix) -> bool:
    """Exact check that T transports brackets: T[u,v]_1 = [Tu, Tv]_2."""
    if L1.dim != L2.dim or T.rows != L1.dim or T.cols != L1.dim:
        raise ValueError("dimension mismatch")
    if T.det() == 0:
        raise NotInvertible("witness matrix is singular")
    for i in range(L1.dim):
        for j in range(i + 1, L1.dim):
            lhs = T.apply(L1.bracket_basis(i, j))
            rhs = bracket(L2, T.column(i), T.column(j))
            if lhs != rhs:
                return False
    return True


def assemble_extension_witness(sigma: Matrix, alpha: Fraction, u: Vector) -> Matrix:
    """Full witness on the extensions from base data: x -> sigma(x) on the
    base, y -> alpha*y + u on the new generator."""
    n = sigma.rows
    rows = []
    for i in range(n):
        rows.append(sigma.entries[i] + (u[i],))
    rows.append(tuple(Fraction(0) for _ in range(n)) + (alpha,))
    return Matrix(n + 1, n + 1, tuple(rows))


def witness_from_triple(K: LieAlgebra, d1: Matrix, d2: Matrix, sigma: Matrix,
                        alpha: Fraction, u: Vector) -> tuple[Matrix, bool]:
    """Check sigma d1 sigma^-1 = alpha d2 + ad_u and assemble the full
    isomorphism between the two extensions.

    Raises :class:`NotAutomorphism` if sigma does not preserve brackets,
    :class:`IdentityFails` with the exact residual if the identity is off.
    The assembled witness is cross-validated on the full extensions.
    """
    if alpha == 0:
        raise PreconditionViolated("alpha must be nonzero")
    if not verify_iso_witness_full(K, K, sigma):
        raise NotAutomorphism("sigma does not preserve the brackets")
    lhs = sigma @ d1 @ sigma.inverse()
    rhs = d2.scale(alpha) + adjoint_matrix(K, u)
    if lhs != rhs:
        raise IdentityFails(lhs - rhs)
    T = assemble_extension_witness(sigma, alpha, u)
    L1 = extend_by_derivation(K, d1)
    L2 = extend_by_derivation(K, d2)
    ok = verify_iso_witness_full(L1, L2, T)
    if not ok:
        raise ConditionDisagreement("triple identity held but the assembled witness failed")
    return T, ok


def decompose_inner_extension(K: LieAlgebra, u: Vector) -> tuple[LieAlgebra, LieAlgebra]:
    """Extend K by the inner derivation ad_u, rewrite y -> y - u, and return
    (rewritten algebra, direct sum with a line) for bit-exact comparison."""
    d = adjoint_matrix(K, u)
    L = extend_by_derivation(K, d)
    n = K.dim
    cols = [L.basis_vector(i) for i in range(n)]
    cols.append(tuple(-u[i] for i in range(n)) + (Fraction(1),))
    rewritten = change_of_basis(L, Matrix.from_columns(cols))
    return rewritten, direct_sum(K, make_algebra(1, {}))


def change_of_basis(alg: LieAlgebra, P: Matrix) -> LieAlgebra:
    """Structure constants of the same algebra in the basis given by the
    columns of P."""
    if P.det() == 0:
        raise NotInvertible("basis change must be invertible")
    p_inv = P.inverse()
    brackets: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            w = p_inv.apply(bracket(alg, P.column(i), P.column(j)))
            entry = {k + 1: c for k, c in enumerate(w) if c != 0}
            if entry:
                brackets[(i + 1, j + 1)] = entry
    return make_algebra(alg.dim, brackets, alg.name)


def verify_weak_similarity_witness(pair1: tuple[Matrix, Matrix],
                                   pair2: tuple[Matrix, Matrix],
                                   S: Matrix, coeffs: Matrix) -> bool:
    """Exact check of the pair identity
    (A', B') = S^-1 (alpha*A + beta*B, gamma*A + delta*B) S
    with coeffs = [[alpha, beta], [gamma, delta]] invertible."""
    if coeffs.rows != 2 or coeffs.cols != 2:
        raise ValueError("coefficient matrix must be 2x2")
    if S.det() == 0 or coeffs.det() == 0:
        raise NotInvertible("witness components must be invertible")
    a, b = pair1
    a2, b2 = pair2
    al, be = coeffs.entries[0]
    ga, de = coeffs.entries[1]
    s_inv = S.inverse()
    first = s_inv @ (a.scale(al) + b.scale(be)) @ S
    second = s_inv @ (a.scale(ga) + b.scale(de)) @ S
    return first == a2 and second == b2


@dataclass(frozen=True)
class LieCSpec:
    """A pair extension of an abelian algebra with [z, y] = 0: the data is
    just the two commuting matrices (z-action, y-action)."""

    n: int
    d: Matrix        # action of z
    d_prime: Matrix  # action of y

    def __post_init__(self) -> None:
        if self.d @ self.d_prime != self.d_prime @ self.d:
            raise PreconditionViolated("pair actions must commute")

    def build(self) -> LieAlgebra:
        from .liealg import abelian

        h = abelian(self.n)
        return build_double_extension(
            h, self.d_prime, self.d, tuple(Fraction(0) for _ in range(self.n)))


def _is_proportional(a: Matrix, b: Matrix) -> bool:
    flat_a, flat_b = a.flatten(), b.flatten()
    return Subspace.from_vectors(len(flat_a), [flat_a, flat_b]).dim <= 1


def lie_c_iso_check(spec1: LieCSpec, spec2: LieCSpec,
                    sigma: Matrix, coeffs: Matrix) -> bool:
    """Verify a pair-extension isomorphism witness two independent ways.

    The matrix condition (sigma conjugation equals the coefficient mix of
    the target pair) and the assembled algebra-level isomorphism are both
    evaluated; agreement is asserted.  Preconditions: both pairs outer
    (nonzero) and non-proportional.
    """
    for spec in (spec1, spec2):
        if spec.d.is_zero() or spec.d_prime.is_zero():
            raise PreconditionViolated("pair must consist of outer (nonzero) actions")
        if _is_proportional(spec.d, spec.d_prime):
            raise PreconditionViolated("pair must be non-proportional")
    if spec1.n != spec2.n:
        raise ValueError("dimension mismatch")
    if sigma.det() == 0 or coeffs.det() == 0:
        raise NotInvertible("witness components must be invertible")

    al, be = coeffs.entries[0]
    ga, de = coeffs.entries[1]
    s_inv = sigma.inverse()
    cond = (sigma @ spec1.d @ s_inv == spec2.d.scale(ga) + spec2.d_prime.scale(al)
            and sigma @ spec1.d_prime @ s_inv == spec2.d.scale(de) + spec2.d_prime.scale(be))

    n = spec1.n
    rows = []
    for i in range(n):
        rows.append(sigma.entries[i] + (Fraction(0), Fraction(0)))
    # basis order of the built algebras: x_1..x_n, y, z;
    # the witness sends y -> delta*z + beta*y and z -> gamma*z + alpha*y
    rows.append(tuple(Fraction(0) for _ in range(n)) + (be, al))
    rows.append(tuple(Fraction(0) for _ in range(n)) + (de, ga))
    t_full = Matrix(n + 2, n + 2, tuple(rows))
    l1 = spec1.build()
    l2 = spec2.build()
    try:
        full = verify_iso_witness_full(l1, l2, t_full)
    except NotInvertible:
        full = False
    if cond != full:
        raise ConditionDisagreement(f"matrix condition={cond} full witness={full}")
    return cond
