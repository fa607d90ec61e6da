"""Catalog-driven classification of one- and two-step extensions.

For each catalog base algebra the classification sweep enumerates rational
points in cohomology coordinates, filters them by the membership (and, for
the two-step drivers, indecomposability and outerness) conditions,
canonicalizes the survivors into named family templates, and compares the
discovered family set against the built-in golden list.  Points whose
spectra leave the supported field (real irrational eigenvalues) are
counted and skipped, never approximated.

The stratum matchers work on exact spectral invariants: eigenvalues of the
relevant blocks, discriminant signs, Jordan chain ranks, and the coupling
slots that survive the basis-change rewrites.  Every matched point carries
canonical parameter values, rational or exact quadratic irrationals.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .canon import (
    AmbiguousMatch,
    ExactScalar,
    FamilyTemplate,
    ParamValue,
    PlacementConstraints,
    param_str,
    proportional_normalize,
    proportional_similar,
)
from .deriv import (
    DerivationSpace,
    _reduce_against_pivots,
    derivation_space,
    project_to_h1,
)
from .exactla import (
    EigenStructure,
    Matrix,
    Poly,
    Subspace,
    UnsupportedSpectrumError,
    Vector,
    eigen_structure,
    nullspace,
)
from .ext import (
    ExtensionSpec,
    build_double_extension,
    check_codim1_condition,
    check_codim2_condition,
    extend_by_derivation,
    is_decomposable_double,
    verify_iso_witness_full,
)
from .liealg import (
    Ideal,
    LieAlgebra,
    abelian,
    adjoint_matrix,
    bracket,
    center,
    complement_coordinates,
    derived_series,
    derived_subalgebra,
    direct_sum,
    filiform4,
    heisenberg3,
    induced_operator_on_quotient,
    is_nilpotent,
    is_solvable,
    lower_central_series,
    r_plus_heisenberg,
    restrict_operator,
    subalgebra,
)


class GoldenMismatch(Exception):
    """The classification sweep disagrees with the built-in golden list."""

    def __init__(self, found, expected, detail=""):
        self.found = set(found)
        self.expected = set(expected)
        super().__init__(f"found families {sorted(found)} but expected "
                         f"{sorted(expected)}{'; ' + detail if detail else ''}")


def _sqrt_fraction(x: Fraction) -> Optional[Fraction]:
    import math

    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def _pivot_sorted(values: Sequence[Fraction]) -> list[Fraction]:
    """Largest absolute value first; ties prefer the positive value."""
    return sorted(values, key=lambda v: (-abs(v), v < 0))


def _inv_q(q2: Fraction) -> ExactScalar:
    return ExactScalar.sqrt(Fraction(1) / q2)


def _is_rational(p: ParamValue) -> bool:
    return isinstance(p, Fraction) or p.is_rational()


def _as_fraction(p: ParamValue) -> Fraction:
    return p if isinstance(p, Fraction) else p.to_fraction()


def _sgn(p: ParamValue) -> int:
    if isinstance(p, Fraction):
        return (p > 0) - (p < 0)
    return p.sign()


def _params_equal(a: Sequence[ParamValue], b: Sequence[ParamValue]) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        xs = x if isinstance(x, ExactScalar) else ExactScalar.of(x)
        ys = y if isinstance(y, ExactScalar) else ExactScalar.of(y)
        if xs != ys:
            return False
    return True


# ---------------------------------------------------------------------------
# rational sampling sequences for template parameters
# ---------------------------------------------------------------------------

def _rational_sequence() -> Iterable[Fraction]:
    seen = set()
    for q in range(1, 30):
        for p in range(1, 30):
            for val in (Fraction(p, q), Fraction(-p, q)):
                if val not in seen:
                    seen.add(val)
                    yield val


def _domain_samples(n_params: int, in_domain, count: int) -> list[tuple[Fraction, ...]]:
    """Deterministic in-domain rational parameter points."""
    if n_params == 0:
        return [()]
    out: list[tuple[Fraction, ...]] = []
    base = list(itertools.islice(_rational_sequence(), 36))
    for point in itertools.product(base, repeat=n_params):
        if in_domain(point):
            out.append(point)
            if len(out) >= count:
                break
    return out


# ---------------------------------------------------------------------------
# sweep spaces (cohomology coordinates)
# ---------------------------------------------------------------------------

@dataclass
class SweepSpace:
    """Coordinates for a classification sweep: a basis of flat (row-major)
    matrices spanning the relevant transversal, with their pivot slots."""

    n: int
    basis_flat: tuple[Vector, ...]
    pivots: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis_flat)

    def to_flat(self, coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
        flat = [Fraction(0)] * (self.n * self.n)
        for c, b in zip(coeffs, self.basis_flat):
            if c != 0:
                for idx, val in enumerate(b):
                    if val != 0:
                        flat[idx] += c * val
        return tuple(flat)

    def to_matrix(self, coeffs: Sequence[Fraction]) -> Matrix:
        return Matrix.unflatten(self.to_flat(coeffs), self.n, self.n)

    def coeffs_of(self, m: Matrix) -> tuple[Fraction, ...]:
        flat = m.flatten()
        coeffs = tuple(flat[p] for p in self.pivots)
        if self.to_flat(coeffs) != flat:
            raise ValueError("matrix does not lie in the sweep space")
        return coeffs


def _sweep_space_ext1(space: DerivationSpace) -> SweepSpace:
    pivots = tuple(next(i for i, x in enumerate(row) if x != 0)
                   for row in space.complement.basis)
    return SweepSpace(space.algebra.dim, space.complement.basis, pivots)


def _sweep_space_ext2(space: DerivationSpace) -> SweepSpace:
    """Transversal of the inner derivations inside the derivations mapping
    everything into the base (zero action row for the adjoined generator)."""
    k = space.algebra
    n = k.dim
    y = n - 1
    row_slots = [y * n + j for j in range(n)]
    if not space.full.basis:
        return SweepSpace(n, (), ())
    constraint = Matrix(len(row_slots), len(space.full.basis), tuple(
        tuple(b[slot] for b in space.full.basis) for slot in row_slots))
    restricted = []
    for coeffs in nullspace(constraint).basis:
        v = [Fraction(0)] * (n * n)
        for c, b in zip(coeffs, space.full.basis):
            if c != 0:
                for idx, val in enumerate(b):
                    if val != 0:
                        v[idx] += c * val
        restricted.append(_reduce_against_pivots(tuple(v), space._inner_pivot_data))
    sub = Subspace.from_vectors(n * n, restricted)
    pivots = tuple(next(i for i, x in enumerate(row) if x != 0) for row in sub.basis)
    return SweepSpace(n, sub.basis, pivots)


# ---------------------------------------------------------------------------
# stratum classifiers (one per catalog base and mode)
# ---------------------------------------------------------------------------

MatchResult = Optional[tuple[str, tuple[ParamValue, ...]]]


def _classify_h3_ext1(flat: Sequence[Fraction]) -> MatchResult:
    """Strata of [[a+b,0,0],[0,a,c],[0,e,b]] with invertible [[a,c],[e,b]]."""
    a, c = flat[4], flat[5]
    e, b = flat[7], flat[8]
    if a * b - c * e == 0:
        return None
    disc = (a - b) ** 2 + 4 * c * e
    if disc > 0:
        r = _sqrt_fraction(disc)
        if r is None:
            raise UnsupportedSpectrumError("real irrational eigenvalue pair")
        lam1, lam2 = _pivot_sorted([(a + b + r) / 2, (a + b - r) / 2])
        return "A", (lam2 / lam1,)
    if disc == 0:
        if c == 0 and e == 0:
            return "A", (Fraction(1),)
        return "B", ()
    p = (a + b) / 2
    q2 = -disc / 4
    return "C", (ExactScalar.of(abs(p)).times(_inv_q(q2)),)


def _classify_rp_ext1(flat: Sequence[Fraction]) -> MatchResult:
    """Strata of [[a+b,0,0,k],[0,a,e,0],[0,f,b,0],[0,g,h,c]] with c != 0 and
    invertible pair block M = [[a,e],[f,b]].

    The coupling parameter k matters exactly when c equals the trace slot
    value a+b (otherwise a basis shear eliminates it); the pair-to-tail
    coupling row (g, h) matters exactly when c is an eigenvalue of M and the
    row leaves the row space of M - c.
    """
    k = flat[3]
    a, e = flat[5], flat[6]
    f, b = flat[9], flat[10]
    g, h, c = flat[13], flat[14], flat[15]
    det_m = a * b - e * f
    if c == 0 or det_m == 0:
        return None
    disc = (a - b) ** 2 + 4 * e * f
    k_active = (k != 0 and c == a + b)

    if disc < 0:
        p = (a + b) / 2
        q2 = -disc / 4
        lam = ExactScalar.of(abs(p)).times(_inv_q(q2))
        if k_active:
            return "H", (lam,)
        sgn = 1 if (p > 0 or (p == 0 and c > 0)) else -1
        cpar = ExactScalar.of(sgn * c).times(_inv_q(q2))
        return "G", (lam, cpar)

    if disc == 0 and not (e == 0 and f == 0):
        lam = (a + b) / 2
        if c == lam:
            d_shift = Matrix.from_rows([
                [a - lam, e, 0], [f, b - lam, 0], [g, h, 0]])
            if d_shift.rank() > 1:  # M - lam has rank 1 for a Jordan pair
                return "F", ()
            return "D", (Fraction(1),)
        if k != 0 and c == 2 * lam:
            return "E", ()
        return "D", (c / lam,)

    if disc == 0:
        lam1 = lam2 = (a + b) / 2
    else:
        r = _sqrt_fraction(disc)
        if r is None:
            raise UnsupportedSpectrumError("real irrational eigenvalue pair")
        lam1, lam2 = _pivot_sorted([(a + b + r) / 2, (a + b - r) / 2])
    if c in (lam1, lam2):
        m_shift = Matrix.from_rows([[a - c, e], [f, b - c]])
        d_shift = Matrix.from_rows([[a - c, e, 0], [f, b - c, 0], [g, h, 0]])
        if d_shift.rank() > m_shift.rank():
            if lam1 == lam2 == c:
                alpha = Fraction(1)
            else:
                alpha = (lam1 if lam2 == c else lam2) / c
            return "C", (alpha,)
    if k_active:
        return "B", (lam2 / lam1,)
    alpha = lam2 / lam1
    beta = c / lam1
    if alpha == -1 and beta < 0:
        beta = -beta  # residual fold: swapping the opposite pair flips beta
    return "A", (alpha, beta)


def _classify_g4_ext1(flat: Sequence[Fraction]) -> MatchResult:
    """Strata of [[a+2b,0,e,0],[0,a+b,0,0],[0,0,a,c],[0,0,0,b]], ab != 0.

    The tail coordinates are ordered (the coupling slot sits strictly above
    the diagonal), so the two tail eigenvalues are never interchangeable and
    the ratio a/b is a full invariant.
    """
    a, c, b = flat[10], flat[11], flat[15]
    if a == 0 or b == 0:
        return None
    if a == b and c != 0:
        return "J", ()
    return "I", (a / b,)


def _classify_h3_ext2(flat: Sequence[Fraction]) -> MatchResult:
    """Strata of [[a+b,0,0,h],[0,a,c,0],[0,e,b,0],[0,0,0,0]] after the
    membership (invertible pair block), outerness and indecomposability
    (a+b = 0, h != 0) filters."""
    a, c = flat[5], flat[6]
    e, b = flat[9], flat[10]
    det_m = a * b - c * e
    if det_m > 0:
        return "G", ()
    if _sqrt_fraction(-det_m) is None:
        raise UnsupportedSpectrumError("real irrational opposite pair")
    return "F", ()


def _complex_params(p: Fraction, q2: Fraction,
                    reals: Sequence[Fraction]) -> tuple[ParamValue, ...]:
    """Scale a complex pair to unit imaginary part, carrying real
    eigenvalues along.  The scalar sign is fixed by the pair's real part,
    falling back to the leading real eigenvalue when that is zero."""
    inv = _inv_q(q2)
    scaled = list(reals)
    if p != 0:
        sgn = 1 if p > 0 else -1
    elif scaled:
        lead = _pivot_sorted(scaled)[0]
        sgn = 1 if lead > 0 else -1
    else:
        sgn = 1
    ordered = _pivot_sorted([sgn * r for r in scaled])
    lam = ExactScalar.of(abs(p)).times(inv)
    return (lam,) + tuple(ExactScalar.of(r).times(inv) for r in ordered)


def _cc_canonical(pairs: Sequence[tuple[Fraction, Fraction]]
                  ) -> tuple[ParamValue, ParamValue, ExactScalar]:
    """Canonical parameters for two complex pair blocks.

    The pair with the larger imaginary part is scaled to unit imaginary
    part (so the other pair keeps q in (0, 1]); the free scalar sign and
    any remaining tie are resolved by lexicographic minimum.
    """
    q2_max = max(q2 for _, q2 in pairs)
    best = None
    for (_, q2_i) in pairs:
        if q2_i != q2_max:
            continue
        inv = _inv_q(q2_i)
        c2 = Fraction(1) / q2_i
        for sgn in (1, -1):
            scaled = []
            for (p, q2) in pairs:
                p_s = ExactScalar.of(sgn * p).times(inv)
                scaled.append((q2 * c2, p_s))
            # normalized (largest) pair first, then smaller imaginary parts
            scaled.sort(key=lambda t: (-t[0], t[1]._cmp_key()))
            key = tuple((q, ps._cmp_key()) for q, ps in scaled)
            if best is None or key < best[0]:
                best = (key, scaled)
    (q2_a, p_a), (q2_b, p_b) = best[1]
    if q2_a != 1:
        raise AssertionError("internal: designated pair not normalized")
    return (p_a, p_b, ExactScalar.sqrt(q2_b))


def _expand_blocks(st: EigenStructure):
    rational = [(ev.value, s) for ev, sizes in st.entries
                if ev.kind == "rational" for s in sizes]
    cplx = [(ev.real_part, ev.imag_sq, s) for ev, sizes in st.entries
            if ev.kind == "complex_pair" for s in sizes]
    return rational, cplx


def _classify_gl2_flat(flat: Sequence[Fraction]) -> MatchResult:
    a, b = flat[0], flat[1]
    c, d = flat[2], flat[3]
    if a * d - b * c == 0:
        return None
    disc = (a - d) ** 2 + 4 * b * c
    if disc > 0:
        r = _sqrt_fraction(disc)
        if r is None:
            raise UnsupportedSpectrumError("real irrational eigenvalue pair")
        lam1, lam2 = _pivot_sorted([(a + d + r) / 2, (a + d - r) / 2])
        return "diag", (lam2 / lam1,)
    if disc == 0:
        if b == 0 and c == 0:
            return "diag", (Fraction(1),)
        return "j2", ()
    p = (a + d) / 2
    q2 = -disc / 4
    return "cplx", (ExactScalar.of(abs(p)).times(_inv_q(q2)),)


def _abelian_ext1_classifier(n: int) -> Callable[[Matrix], MatchResult]:
    def classify(m: Matrix) -> MatchResult:
        if n == 1:
            return ("one", ()) if m.entries[0][0] != 0 else None
        if n == 2:
            if m.det() == 0:
                return None
            return _classify_gl2_flat(m.flatten())
        if m.det() == 0:
            return None
        st = eigen_structure(m)
        rb, cb = _expand_blocks(st)
        if n == 3:
            return _match_gl3(rb, cb)
        if n == 4:
            return _match_gl4(rb, cb)
        raise ValueError(f"no invertible-block templates for dimension {n}")

    return classify


def _match_gl3(rb, cb) -> MatchResult:
    if cb:
        (p, q2, _) = cb[0]
        mu = rb[0][0]
        return "cplx", _complex_params(p, q2, [mu])
    sizes = sorted((s for _, s in rb), reverse=True)
    if sizes == [3]:
        return "j3", ()
    if sizes == [2, 1]:
        lam = next(v for v, s in rb if s == 2)
        mu = next(v for v, s in rb if s == 1)
        return "j2", (mu / lam,)
    vals = _pivot_sorted([v for v, _ in rb])
    return "diag", (vals[1] / vals[0], vals[2] / vals[0])


def _match_gl4(rb, cb) -> MatchResult:
    if not cb:
        sizes = sorted((s for _, s in rb), reverse=True)
        if sizes == [1, 1, 1, 1]:
            vals = _pivot_sorted([v for v, _ in rb])
            piv = vals[0]
            return "diag", (vals[1] / piv, vals[2] / piv, vals[3] / piv)
        if sizes == [2, 1, 1]:
            lam = next(v for v, s in rb if s == 2)
            singles = [v for v, s in rb if s == 1]
            eq = [v for v in singles if v == lam]
            if len(eq) == 2:
                return "j2_eq2", ()
            if len(eq) == 1:
                other = next(v for v in singles if v != lam)
                return "j2_eq1", (other / lam,)
            if singles[0] == singles[1]:
                return "j2_pair", (singles[0] / lam,)
            mu, nu = _pivot_sorted(singles)
            return "j2", (mu / lam, nu / lam)
        if sizes == [2, 2]:
            vals = [v for v, s in rb if s == 2]
            lam1, lam2 = _pivot_sorted(vals)
            if lam1 == lam2:
                return "j2j2_eq", ()
            return "j2j2", (lam2 / lam1,)
        if sizes == [3, 1]:
            lam = next(v for v, s in rb if s == 3)
            mu = next(v for v, s in rb if s == 1)
            if mu == lam:
                return "j3_eq", ()
            return "j3", (mu / lam,)
        return "j4", ()
    pair_sizes = sorted((s for *_, s in cb), reverse=True)
    if pair_sizes == [2]:
        (p, q2, _) = cb[0]
        return "cj", (ExactScalar.of(abs(p)).times(_inv_q(q2)),)
    if pair_sizes == [1]:
        (p, q2, _) = cb[0]
        real_sizes = sorted((s for _, s in rb), reverse=True)
        if real_sizes == [2]:
            lam = rb[0][0]
            return "c_j2", _complex_params(p, q2, [lam])
        mu, nu = [v for v, _ in rb]
        return "c_diag", _complex_params(p, q2, [mu, nu])
    return "cc", _cc_canonical([(p, q2) for (p, q2, _) in cb])


def _classify_abelian_ext2(n: int) -> Callable[[Matrix], MatchResult]:
    """Strata for double extensions of an abelian base, applied after the
    membership, outerness and indecomposability filters."""

    def classify(m: Matrix) -> MatchResult:
        st = eigen_structure(m)
        zero_sizes = st.rational_eigenvalues().get(Fraction(0), ())
        if len(zero_sizes) != 1:
            raise AssertionError("filters should force a single nilpotent chain")
        s = zero_sizes[0]
        rb, cb = _expand_blocks(st)
        nonzero_r = [(v, sz) for v, sz in rb if v != 0]
        if n == 2:
            return ("A", ()) if nonzero_r else ("B", ())
        if n == 3:
            if s == 4:
                return "D", ()
            if s == 3:
                return "C", ()
            if cb:
                (p, q2, _) = cb[0]
                return "E", (ExactScalar.of(abs(p)).times(_inv_q(q2)),)
            if len(nonzero_r) == 1:
                return "B", ()
            lam1, lam2 = _pivot_sorted([v for v, _ in nonzero_r])
            return "A", (lam2 / lam1,)
        raise ValueError(f"no ad-pair templates for abelian dimension {n}")

    return classify


def _ext2_filters(key: str, flat: Sequence[Fraction], size: int) -> dict[str, bool]:
    """Membership, outerness and indecomposability as fast exact tests."""
    n = size - 1
    if key in ("r2", "r3"):
        m = Matrix.unflatten(tuple(flat), size, size)
        member = m.rank() == n
        d_h = m.submatrix(range(n), range(n))
        outer = not d_h.is_zero()
        indecomposable = d_h.det() == 0
        return {"member": member, "outer": outer, "indecomposable": indecomposable}
    if key == "h3":
        a, c = flat[5], flat[6]
        e, b = flat[9], flat[10]
        h = flat[3]
        member = a * b - c * e != 0
        outer = not (a == 0 and b == 0 and c == 0 and e == 0)
        indecomposable = (a + b == 0 and h != 0)
        return {"member": member, "outer": outer, "indecomposable": indecomposable}
    raise ValueError(f"no ad-pair filters for base {key}")


def _ext2_matrix_classifier(key: str) -> Callable[[Matrix], MatchResult]:
    if key == "h3":
        def classify_h3(m: Matrix) -> MatchResult:
            flat = m.flatten()
            if not all(_ext2_filters("h3", flat, 4).values()):
                return None
            return _classify_h3_ext2(flat)

        return classify_h3
    n = {"r2": 2, "r3": 3}[key]
    inner = _classify_abelian_ext2(n)

    def classify(m: Matrix) -> MatchResult:
        if not all(_ext2_filters(key, m.flatten(), n + 1).values()):
            return None
        return inner(m)

    return classify


# ---------------------------------------------------------------------------
# template tables
# ---------------------------------------------------------------------------

def _shape_h3(a, b, c, e) -> Matrix:
    z = Fraction(0)
    return Matrix.from_rows([[a + b, z, z], [z, a, c], [z, e, b]])


def _shape_rp(a, b, c, e, f, g, h, k) -> Matrix:
    z = Fraction(0)
    return Matrix.from_rows([
        [a + b, z, z, k], [z, a, e, z], [z, f, b, z], [z, g, h, c]])


def _shape_g4(a, b, c, e) -> Matrix:
    z = Fraction(0)
    return Matrix.from_rows([
        [a + 2 * b, z, e, z], [z, a + b, z, z], [z, z, a, c], [z, z, z, b]])


def _shape_h3_ext2(a, b, c, e, h) -> Matrix:
    z = Fraction(0)
    return Matrix.from_rows([
        [a + b, z, z, h], [z, a, c, z], [z, e, b, z], [z, z, z, z]])


def _block_matrix(blocks: Sequence[Sequence[Sequence]]) -> Matrix:
    mats = [Matrix.from_rows(b) for b in blocks]
    total = sum(m.rows for m in mats)
    grid = [[Fraction(0)] * total for _ in range(total)]
    off = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                grid[off + i][off + j] = m.entries[i][j]
        off += m.rows
    return Matrix.from_rows(grid)


def _template(name, base, mode, param_names, domain_desc, build, in_domain,
              classifier) -> FamilyTemplate:
    def match(m: Matrix) -> Optional[tuple[ParamValue, ...]]:
        result = classifier(m)
        if result is None or result[0] != name:
            return None
        return result[1]

    def sample(count: int) -> list[tuple[Fraction, ...]]:
        return _domain_samples(len(param_names), in_domain, count)

    return FamilyTemplate(name, base, mode, tuple(param_names), domain_desc,
                          build, in_domain, match, sample)


def _wrap_flat(classifier_flat):
    def classify(m: Matrix) -> MatchResult:
        return classifier_flat(m.flatten())

    return classify


def _rational_point(p) -> bool:
    return all(map(_is_rational, p))


def _h3_ext1_templates() -> tuple[FamilyTemplate, ...]:
    cl = _wrap_flat(_classify_h3_ext1)
    one = Fraction(1)
    return (
        _template(
            "A", "h3", "ext1", ("lam",), "0 < |lam| <= 1",
            lambda p: _shape_h3(one, p[0], 0, 0),
            lambda p: _rational_point(p) and 0 < abs(_as_fraction(p[0])) <= 1,
            cl),
        _template(
            "B", "h3", "ext1", (), "no parameters",
            lambda p: _shape_h3(one, one, one, 0),
            lambda p: True, cl),
        _template(
            "C", "h3", "ext1", ("lam",), "lam >= 0",
            lambda p: _shape_h3(p[0], p[0], one, -one),
            lambda p: _sgn(p[0]) >= 0, cl),
    )


def _rp_ext1_templates() -> tuple[FamilyTemplate, ...]:
    cl = _wrap_flat(_classify_rp_ext1)
    one = Fraction(1)
    z = Fraction(0)

    def a_domain(p) -> bool:
        if not _rational_point(p):
            return False
        al, be = _as_fraction(p[0]), _as_fraction(p[1])
        if not (0 < abs(al) <= 1 and be != 0):
            return False
        return not (al == -1 and be < 0)

    def g_domain(p) -> bool:
        if _sgn(p[0]) < 0 or _sgn(p[1]) == 0:
            return False
        return not (_sgn(p[0]) == 0 and _sgn(p[1]) < 0)

    return (
        _template(
            "A", "r_plus_h3", "ext1", ("alpha", "beta"),
            "0 < |alpha| <= 1, beta != 0",
            lambda p: _shape_rp(one, p[0], p[1], z, z, z, z, z),
            a_domain, cl),
        _template(
            "B", "r_plus_h3", "ext1", ("alpha",),
            "alpha in (-1, 1], alpha != 0",
            lambda p: _shape_rp(one, p[0], one + p[0], z, z, z, z, one),
            lambda p: _rational_point(p) and
            -1 < _as_fraction(p[0]) <= 1 and _as_fraction(p[0]) != 0,
            cl),
        _template(
            "C", "r_plus_h3", "ext1", ("alpha",), "alpha != 0",
            lambda p: _shape_rp(p[0], one, one, z, z, z, one, z),
            lambda p: _sgn(p[0]) != 0, cl),
        _template(
            "D", "r_plus_h3", "ext1", ("beta",), "beta != 0",
            lambda p: _shape_rp(one, one, p[0], z, one, z, z, z),
            lambda p: _sgn(p[0]) != 0, cl),
        _template(
            "E", "r_plus_h3", "ext1", (), "no parameters",
            lambda p: _shape_rp(one, one, 2 * one, z, one, z, z, one),
            lambda p: True, cl),
        _template(
            "F", "r_plus_h3", "ext1", (), "no parameters",
            lambda p: _shape_rp(one, one, one, z, one, z, one, z),
            lambda p: True, cl),
        _template(
            "G", "r_plus_h3", "ext1", ("lam", "c"), "lam >= 0, c > 0",
            lambda p: _shape_rp(p[0], p[0], p[1], one, -one, z, z, z),
            g_domain, cl),
        _template(
            "H", "r_plus_h3", "ext1", ("lam",), "lam > 0",
            lambda p: _shape_rp(p[0], p[0], 2 * p[0], one, -one, z, z, one),
            lambda p: _sgn(p[0]) > 0, cl),
    )


def _g4_ext1_templates() -> tuple[FamilyTemplate, ...]:
    cl = _wrap_flat(_classify_g4_ext1)
    one = Fraction(1)
    z = Fraction(0)
    return (
        _template(
            "I", "g4", "ext1", ("lam",), "lam != 0",
            lambda p: _shape_g4(p[0], one, z, z),
            lambda p: _sgn(p[0]) != 0, cl),
        _template(
            "J", "g4", "ext1", (), "no parameters",
            lambda p: _shape_g4(one, one, one, z),
            lambda p: True, cl),
    )


def _canonical_tail(params: Sequence[ParamValue]) -> bool:
    """Rational values already in pivot order (abs descending, then sign)."""
    if not _rational_point(params):
        return False
    vals = [_as_fraction(x) for x in params]
    return vals == _pivot_sorted(vals)


def _abelian_ext1_templates(n: int) -> tuple[FamilyTemplate, ...]:
    cl = _abelian_ext1_classifier(n)
    one = Fraction(1)

    def nonzero(p) -> bool:
        return all(_sgn(x) != 0 for x in p)

    if n == 1:
        return (_template("one", "r1", "ext1", (), "no parameters",
                          lambda p: Matrix.from_rows([[1]]),
                          lambda p: True, cl),)
    if n == 2:
        return (
            _template("diag", "r2", "ext1", ("alpha",), "0 < |alpha| <= 1",
                      lambda p: Matrix.diagonal([one, p[0]]),
                      lambda p: _rational_point(p) and
                      0 < abs(_as_fraction(p[0])) <= 1, cl),
            _template("j2", "r2", "ext1", (), "no parameters",
                      lambda p: Matrix.from_rows([[1, 1], [0, 1]]),
                      lambda p: True, cl),
            _template("cplx", "r2", "ext1", ("lam",), "lam >= 0",
                      lambda p: Matrix.from_rows([[p[0], 1], [-1, p[0]]]),
                      lambda p: _sgn(p[0]) >= 0, cl),
        )
    if n == 3:
        return (
            _template("diag", "r3", "ext1", ("alpha", "beta"),
                      "0 < |beta| <= |alpha| <= 1",
                      lambda p: Matrix.diagonal([one, p[0], p[1]]),
                      lambda p: nonzero(p) and
                      _canonical_tail([one, p[0], p[1]]), cl),
            _template("j2", "r3", "ext1", ("beta",), "beta != 0",
                      lambda p: _block_matrix([[[1, 1], [0, 1]], [[p[0]]]]),
                      lambda p: _rational_point(p) and nonzero(p), cl),
            _template("j3", "r3", "ext1", (), "no parameters",
                      lambda p: _block_matrix(
                          [[[1, 1, 0], [0, 1, 1], [0, 0, 1]]]),
                      lambda p: True, cl),
            _template("cplx", "r3", "ext1", ("lam", "m"),
                      "lam >= 0; m != 0, m > 0 when lam = 0",
                      lambda p: _block_matrix(
                          [[[p[0], 1], [-1, p[0]]], [[p[1]]]]),
                      lambda p: _sgn(p[0]) >= 0 and _sgn(p[1]) != 0 and
                      not (_sgn(p[0]) == 0 and _sgn(p[1]) < 0), cl),
        )
    if n == 4:
        return _gl4_templates(cl)
    raise ValueError(f"no templates for abelian dimension {n}")


def _gl4_templates(cl) -> tuple[FamilyTemplate, ...]:
    one = Fraction(1)

    def nonzero(p) -> bool:
        return all(_sgn(x) != 0 for x in p)

    def ne_one(p) -> bool:
        return all(not (_is_rational(x) and _as_fraction(x) == 1) for x in p)

    def j2_dom(p) -> bool:
        return (_rational_point(p) and nonzero(p) and ne_one(p)
                and _as_fraction(p[0]) != _as_fraction(p[1])
                and _canonical_tail(p))

    def j2j2_dom(p) -> bool:
        return (_rational_point(p) and nonzero(p) and ne_one(p)
                and abs(_as_fraction(p[0])) <= 1)

    def c_diag_dom(p) -> bool:
        if _sgn(p[0]) < 0 or not nonzero(p[1:]):
            return False
        if not _canonical_tail(p[1:]):
            return False
        return not (_sgn(p[0]) == 0 and _sgn(p[1]) < 0)

    def c_j2_dom(p) -> bool:
        if _sgn(p[0]) < 0 or _sgn(p[1]) == 0:
            return False
        return not (_sgn(p[0]) == 0 and _sgn(p[1]) < 0)

    def cc_dom(p) -> bool:
        if _sgn(p[2]) <= 0:
            return False
        if not all(isinstance(x, Fraction) or True for x in p):
            return False
        a = p[0] if isinstance(p[0], ExactScalar) else ExactScalar.of(p[0])
        b = p[1] if isinstance(p[1], ExactScalar) else ExactScalar.of(p[1])
        q = p[2] if isinstance(p[2], ExactScalar) else ExactScalar.of(p[2])
        if not (a.is_rational() and b.is_rational() and q.is_rational()):
            return False
        pair_data = [(a.to_fraction(), Fraction(1)),
                     (b.to_fraction(), q.to_fraction() ** 2)]
        return _params_equal(_cc_canonical(pair_data), p)

    t = [
        _template("diag", "r4", "ext1", ("alpha", "beta", "gamma"),
                  "0 < |gamma| <= |beta| <= |alpha| <= 1",
                  lambda p: Matrix.diagonal([one, p[0], p[1], p[2]]),
                  lambda p: nonzero(p) and _canonical_tail(
                      [one, p[0], p[1], p[2]]), cl),
        _template("j2", "r4", "ext1", ("alpha", "beta"),
                  "alpha, beta distinct, nonzero, != 1, pivot-ordered",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[p[0]]], [[p[1]]]]),
                  j2_dom, cl),
        _template("j2_eq1", "r4", "ext1", ("alpha",), "alpha != 0, 1",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[1]], [[p[0]]]]),
                  lambda p: _rational_point(p) and nonzero(p) and ne_one(p),
                  cl),
        _template("j2_eq2", "r4", "ext1", (), "no parameters",
                  lambda p: _block_matrix([[[1, 1], [0, 1]], [[1]], [[1]]]),
                  lambda p: True, cl),
        _template("j2_pair", "r4", "ext1", ("alpha",), "alpha != 0, 1",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[p[0]]], [[p[0]]]]),
                  lambda p: _rational_point(p) and nonzero(p) and ne_one(p),
                  cl),
        _template("j2j2", "r4", "ext1", ("alpha",),
                  "0 < |alpha| <= 1, alpha != 1",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[p[0], 1], [0, p[0]]]]),
                  j2j2_dom, cl),
        _template("j2j2_eq", "r4", "ext1", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[1, 1], [0, 1]]]),
                  lambda p: True, cl),
        _template("j3", "r4", "ext1", ("alpha",), "alpha != 0, 1",
                  lambda p: _block_matrix(
                      [[[1, 1, 0], [0, 1, 1], [0, 0, 1]], [[p[0]]]]),
                  lambda p: _rational_point(p) and nonzero(p) and ne_one(p),
                  cl),
        _template("j3_eq", "r4", "ext1", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[1, 1, 0], [0, 1, 1], [0, 0, 1]], [[1]]]),
                  lambda p: True, cl),
        _template("j4", "r4", "ext1", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1],
                        [0, 0, 0, 1]]]),
                  lambda p: True, cl),
        _template("c_diag", "r4", "ext1", ("lam", "m1", "m2"),
                  "lam >= 0; m1, m2 != 0, pivot-ordered",
                  lambda p: _block_matrix(
                      [[[p[0], 1], [-1, p[0]]], [[p[1]]], [[p[2]]]]),
                  c_diag_dom, cl),
        _template("c_j2", "r4", "ext1", ("lam", "m"), "lam >= 0, m != 0",
                  lambda p: _block_matrix(
                      [[[p[0], 1], [-1, p[0]]], [[p[1], 1], [0, p[1]]]]),
                  c_j2_dom, cl),
        _template("cc", "r4", "ext1", ("a", "b", "q"),
                  "first pair normalized, q > 0, lexicographic minimum",
                  lambda p: _block_matrix(
                      [[[p[0], 1], [-1, p[0]]],
                       [[p[1], p[2]], [-p[2], p[1]]]]),
                  cc_dom, cl),
        _template("cj", "r4", "ext1", ("lam",), "lam >= 0",
                  lambda p: Matrix.from_rows([
                      [p[0], 1, 1, 0], [-1, p[0], 0, 1],
                      [0, 0, p[0], 1], [0, 0, -1, p[0]]]),
                  lambda p: _sgn(p[0]) >= 0, cl),
    ]
    return tuple(t)


def _r2_ext2_templates() -> tuple[FamilyTemplate, ...]:
    cl = _ext2_matrix_classifier("r2")
    return (
        _template("A", "r2", "ext2ad", (), "no parameters",
                  lambda p: Matrix.from_rows(
                      [[1, 0, 0], [0, 0, 1], [0, 0, 0]]),
                  lambda p: True, cl),
        _template("B", "r2", "ext2ad", (), "no parameters",
                  lambda p: Matrix.from_rows(
                      [[0, 1, 0], [0, 0, 1], [0, 0, 0]]),
                  lambda p: True, cl),
    )


def _r3_ext2_templates() -> tuple[FamilyTemplate, ...]:
    cl = _ext2_matrix_classifier("r3")
    return (
        _template("A", "r3", "ext2ad", ("lam",), "0 < |lam| <= 1",
                  lambda p: _block_matrix(
                      [[[1]], [[p[0]]], [[0, 1], [0, 0]]]),
                  lambda p: _rational_point(p) and
                  0 < abs(_as_fraction(p[0])) <= 1, cl),
        _template("B", "r3", "ext2ad", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[1, 1], [0, 1]], [[0, 1], [0, 0]]]),
                  lambda p: True, cl),
        _template("C", "r3", "ext2ad", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[1]], [[0, 1, 0], [0, 0, 1], [0, 0, 0]]]),
                  lambda p: True, cl),
        _template("D", "r3", "ext2ad", (), "no parameters",
                  lambda p: _block_matrix(
                      [[[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1],
                        [0, 0, 0, 0]]]),
                  lambda p: True, cl),
        _template("E", "r3", "ext2ad", ("lam",), "lam >= 0",
                  lambda p: _block_matrix(
                      [[[p[0], 1], [-1, p[0]]], [[0, 1], [0, 0]]]),
                  lambda p: _sgn(p[0]) >= 0, cl),
    )


def _h3_ext2_templates() -> tuple[FamilyTemplate, ...]:
    cl = _ext2_matrix_classifier("h3")
    one = Fraction(1)
    return (
        _template("F", "h3", "ext2ad", (), "no parameters",
                  lambda p: _shape_h3_ext2(one, -one, 0, 0, one),
                  lambda p: True, cl),
        _template("G", "h3", "ext2ad", (), "no parameters",
                  lambda p: _shape_h3_ext2(0, 0, one, -one, one),
                  lambda p: True, cl),
    )


# ---------------------------------------------------------------------------
# placement constraints (legality of block arrangements, and which blocks
# may designate the scaling pivot)
# ---------------------------------------------------------------------------

def _structure_from_atoms(rationals: Sequence[Fraction],
                          pairs: Sequence[tuple[Fraction, Fraction]]
                          ) -> EigenStructure:
    """EigenStructure with the given eigenvalues as plain 1-blocks; block
    refinement is irrelevant for scaling-pivot designation."""
    from .exactla import QuadraticEigenvalue

    entries = []
    for v in sorted(set(rationals)):
        mult = sum(1 for x in rationals if x == v)
        entries.append((QuadraticEigenvalue("rational", mult, value=v),
                        tuple([1] * mult)))
    for (p, q2) in sorted(set(pairs)):
        mult = sum(1 for x in pairs if x == (p, q2))
        entries.append((QuadraticEigenvalue("complex_pair", mult,
                                            real_part=p, imag_sq=q2),
                        tuple([1] * mult)))
    dim = len(rationals) + 2 * len(pairs)
    return EigenStructure(dim, tuple(entries))


def _restrict_h3(st: EigenStructure) -> list[EigenStructure]:
    """One separable rational 1-block equal to the trace of the remaining
    two dimensions; the remainder designates the scaling pivot."""
    rational, cplx = _expand_blocks(st)
    out = []
    for i, (nu, s) in enumerate(rational):
        if s != 1:
            continue
        rest_r = [x for j, x in enumerate(rational) if j != i]
        rest_dim = sum(sz for _, sz in rest_r) + 2 * sum(sz for *_, sz in cplx)
        if rest_dim != 2:
            continue
        tr = sum((v * sz for v, sz in rest_r), Fraction(0)) + \
            sum((2 * p * sz for p, _, sz in cplx), Fraction(0))
        if tr != nu:
            continue
        atoms = [v for v, sz in rest_r for _ in range(sz)]
        pairs = [(p, q2) for p, q2, sz in cplx for _ in range(sz)]
        sub = _structure_from_atoms(atoms, pairs)
        if sub not in out:
            out.append(sub)
    return out


def _restrict_rp(st: EigenStructure) -> list[EigenStructure]:
    """A rational trace slot, one extra rational direction, and a free
    2x2 pair part whose trace equals the trace slot; the pair part
    designates the scaling pivot."""
    rational, cplx = _expand_blocks(st)
    atoms: list[Fraction] = []
    for v, s in rational:
        atoms.extend([v] * s)
    pairs = [(p, q2) for p, q2, s in cplx for _ in range(s)]
    out: list[EigenStructure] = []
    if len(atoms) + 2 * len(pairs) != 4:
        return out
    if pairs:
        if len(pairs) != 1 or len(atoms) != 2:
            return out
        p, q2 = pairs[0]
        for i, nu in enumerate(atoms):
            if nu == 2 * p:
                sub = _structure_from_atoms([], [(p, q2)])
                if sub not in out:
                    out.append(sub)
        return out
    for i, nu in enumerate(atoms):
        for j in range(4):
            if j == i:
                continue
            rest = [atoms[k] for k in range(4) if k not in (i, j)]
            if sum(rest, Fraction(0)) == nu:
                sub = _structure_from_atoms(rest, [])
                if sub not in out:
                    out.append(sub)
    return out


def _restrict_g4(st: EigenStructure) -> list[EigenStructure]:
    """All rational, spectrum {a+2b, a+b, a, b}; the fixed tail slot b
    designates the scaling pivot."""
    rational, cplx = _expand_blocks(st)
    if cplx:
        return []
    values = [v for v, s in rational for _ in range(s)]
    if len(values) != 4:
        return []
    out: list[EigenStructure] = []
    for a in set(values):
        for b in set(values):
            pool = list(values)
            ok = True
            for x in (a + 2 * b, a + b, a, b):
                if x in pool:
                    pool.remove(x)
                else:
                    ok = False
                    break
            if ok:
                sub = _structure_from_atoms([b], [])
                if sub not in out:
                    out.append(sub)
    return out


def _restrict_full(st: EigenStructure) -> list[EigenStructure]:
    return [st]


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass
class CatalogEntry:
    """One base algebra with everything its classifications need."""

    key: str
    algebra: LieAlgebra
    placement: PlacementConstraints
    ext1_templates: tuple[FamilyTemplate, ...]
    ext2_templates: tuple[FamilyTemplate, ...]
    ext1_classifier: Callable[[Matrix], MatchResult]
    ext2_classifier: Optional[Callable[[Matrix], MatchResult]]
    ext2_filter_key: Optional[str]

    def ext1_known(self) -> set[str]:
        return {t.name for t in self.ext1_templates}

    def ext2_known(self) -> set[str]:
        return {t.name for t in self.ext2_templates}

    def supports_ext2(self) -> bool:
        return bool(self.ext2_templates)


@lru_cache(maxsize=None)
def catalog() -> dict[str, CatalogEntry]:
    entries: dict[str, CatalogEntry] = {}

    def add(key, algebra, restrict, ext1_templates, ext1_classifier,
            ext2_templates=(), ext2_classifier=None, ext2_filter_key=None):
        if not is_nilpotent(algebra):
            raise AssertionError(f"catalog base {key} must be nilpotent")
        entries[key] = CatalogEntry(
            key, algebra, PlacementConstraints(key, restrict),
            tuple(ext1_templates), tuple(ext2_templates),
            ext1_classifier, ext2_classifier, ext2_filter_key)

    add("r1", abelian(1, "r1"), _restrict_full, _abelian_ext1_templates(1),
        _abelian_ext1_classifier(1))
    add("r2", abelian(2, "r2"), _restrict_full, _abelian_ext1_templates(2),
        _abelian_ext1_classifier(2),
        _r2_ext2_templates(), _ext2_matrix_classifier("r2"), "r2")
    add("r3", abelian(3, "r3"), _restrict_full, _abelian_ext1_templates(3),
        _abelian_ext1_classifier(3),
        _r3_ext2_templates(), _ext2_matrix_classifier("r3"), "r3")
    add("r4", abelian(4, "r4"), _restrict_full, _abelian_ext1_templates(4),
        _abelian_ext1_classifier(4))
    add("h3", heisenberg3(), _restrict_h3, _h3_ext1_templates(),
        _wrap_flat(_classify_h3_ext1),
        _h3_ext2_templates(), _ext2_matrix_classifier("h3"), "h3")
    add("r_plus_h3", r_plus_heisenberg(), _restrict_rp, _rp_ext1_templates(),
        _wrap_flat(_classify_rp_ext1))
    add("g4", filiform4(), _restrict_g4, _g4_ext1_templates(),
        _wrap_flat(_classify_g4_ext1))
    return entries


@lru_cache(maxsize=None)
def _entry_spaces(key: str) -> tuple[DerivationSpace, SweepSpace,
                                     Optional[SweepSpace]]:
    entry = catalog()[key]
    ext1_space = derivation_space(entry.algebra)
    sweep1 = _sweep_space_ext1(ext1_space)
    sweep2 = None
    if entry.supports_ext2():
        k = direct_sum(entry.algebra, abelian(1))
        sweep2 = _sweep_space_ext2(derivation_space(k))
    return ext1_space, sweep1, sweep2


# ---------------------------------------------------------------------------
# random automorphisms (for conjugation sampling and stability tests)
# ---------------------------------------------------------------------------

def _random_fraction(rng: random.Random, allow_zero=True) -> Fraction:
    while True:
        v = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        if allow_zero or v != 0:
            return v


def _random_invertible(rng: random.Random, n: int) -> Matrix:
    while True:
        m = Matrix.from_rows([[_random_fraction(rng) for _ in range(n)]
                              for _ in range(n)])
        if m.det() != 0:
            return m


def _random_block_triangular(rng: random.Random, n: int) -> Matrix:
    """Invertible [[A, 0], [v, f]] preserving the leading coordinate block."""
    a = _random_invertible(rng, n - 1)
    v = [_random_fraction(rng) for _ in range(n - 1)]
    f = _random_fraction(rng, allow_zero=False)
    rows = [a.entries[i] + (Fraction(0),) for i in range(n - 1)]
    rows.append(tuple(v) + (f,))
    return Matrix.from_rows(rows)


def random_automorphism(key: str, rng: random.Random,
                        preserve_base: bool = False) -> Matrix:
    """A random automorphism of the catalog algebra.

    With ``preserve_base`` the subalgebra spanned by all but the last
    coordinate stays invariant, so conjugation preserves the restricted
    coordinate shape used by the two-step sweeps.
    """
    entry = catalog()[key]
    alg = entry.algebra
    n = alg.dim
    if key in ("r1", "r2", "r3", "r4"):
        sigma = (_random_block_triangular(rng, n) if preserve_base and n > 1
                 else _random_invertible(rng, n))
    elif key == "h3":
        while True:
            a, b, c, d = (_random_fraction(rng) for _ in range(4))
            if a * d - b * c != 0:
                break
        det = a * d - b * c
        p, q = _random_fraction(rng), _random_fraction(rng)
        sigma = Matrix.from_rows([
            [det, p, q],
            [0, a, b],
            [0, c, d]])
    elif key == "r_plus_h3":
        while True:
            a, b, c, d = (_random_fraction(rng) for _ in range(4))
            if a * d - b * c != 0:
                break
        det = a * d - b * c
        p, q = _random_fraction(rng), _random_fraction(rng)
        s1, s2 = (Fraction(0), Fraction(0)) if preserve_base else (
            _random_fraction(rng), _random_fraction(rng))
        e = _random_fraction(rng)
        f = _random_fraction(rng, allow_zero=False)
        sigma = Matrix.from_rows([
            [det, p, q, e],
            [0, a, b, 0],
            [0, c, d, 0],
            [0, s1, s2, f]])
    elif key == "g4":
        a4 = _random_fraction(rng, allow_zero=False)
        e3 = _random_fraction(rng, allow_zero=False)
        col4 = (_random_fraction(rng), _random_fraction(rng),
                _random_fraction(rng), a4)
        col3 = (_random_fraction(rng), _random_fraction(rng), e3, Fraction(0))
        x2 = bracket(alg, col3, col4)
        x1 = bracket(alg, x2, col4)
        sigma = Matrix.from_columns([x1, x2, col3, col4])
    else:
        raise ValueError(f"no automorphism generator for {key}")
    if not verify_iso_witness_full(alg, alg, sigma):
        raise AssertionError("internal: generated map is not an automorphism")
    return sigma


def conjugate_in_shape(key: str, mode: str, m: Matrix,
                       rng: random.Random) -> Matrix:
    """A random same-class representative: conjugate by an automorphism, add
    an inner derivation, rescale, and project back to the transversal."""
    entry = catalog()[key]
    ext1_space, _, _ = _entry_spaces(key)
    if mode == "ext1":
        sigma = random_automorphism(key, rng)
        alg = entry.algebra
        conj = sigma @ m @ sigma.inverse()
        u = tuple(_random_fraction(rng) for _ in range(alg.dim))
        shifted = conj + adjoint_matrix(alg, u)
        c = _random_fraction(rng, allow_zero=False)
        return project_to_h1(ext1_space, shifted.scale(c)).representative
    k_alg = direct_sum(entry.algebra, abelian(1))
    space = derivation_space(k_alg)
    if key == "h3":
        sigma = random_automorphism("r_plus_h3", rng, preserve_base=True)
    else:
        sigma = _random_block_triangular(rng, k_alg.dim)
    conj = sigma @ m @ sigma.inverse()
    u = tuple(_random_fraction(rng) for _ in range(k_alg.dim))
    shifted = conj + adjoint_matrix(k_alg, u)
    c = _random_fraction(rng, allow_zero=False)
    return project_to_h1(space, shifted.scale(c)).representative


# ---------------------------------------------------------------------------
# grids and sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Deterministic sweep description.

    When the full Cartesian grid over the value set fits the budget it is
    enumerated exhaustively; otherwise the sweep takes a structured union of
    template instantiations, random in-shape conjugates of them, all points
    supported on at most two coordinates, and seeded random dense points.
    """

    num_max: int = 3
    den_max: int = 3
    cartesian_budget: int = 100_000
    n_random: int = 200
    n_template_samples: int = 24
    n_conjugates: int = 3
    seed: int = 20250801

    def values(self) -> list[Fraction]:
        return sorted({Fraction(p, q)
                       for p in range(-self.num_max, self.num_max + 1)
                       for q in range(1, self.den_max + 1)})

    def doubled(self) -> "GridSpec":
        return GridSpec(self.num_max * 2, self.den_max * 2,
                        self.cartesian_budget, self.n_random * 2,
                        self.n_template_samples * 2, self.n_conjugates,
                        self.seed)

    def describe(self) -> str:
        return (f"values p/q with |p|<={self.num_max}, 1<=q<={self.den_max}; "
                f"cartesian budget {self.cartesian_budget}; "
                f"{self.n_random} random points; "
                f"{self.n_template_samples} samples per template; "
                f"seed {self.seed}")

    @staticmethod
    def parse(text: str) -> "GridSpec":
        spec = GridSpec()
        if not text:
            return spec
        kwargs = {}
        for part in text.split(","):
            name, _, value = part.partition("=")
            field_name = {
                "num": "num_max", "den": "den_max",
                "budget": "cartesian_budget", "random": "n_random",
                "samples": "n_template_samples", "conj": "n_conjugates",
                "seed": "seed"}.get(name.strip())
            if field_name is None:
                raise ValueError(f"unknown grid field {name!r}")
            kwargs[field_name] = int(value)
        base = {f: getattr(spec, f) for f in (
            "num_max", "den_max", "cartesian_budget", "n_random",
            "n_template_samples", "n_conjugates", "seed")}
        base.update(kwargs)
        return GridSpec(**base)


def sweep_points(key: str, mode: str, grid: GridSpec) -> list[tuple[Fraction, ...]]:
    """The deterministic list of coefficient tuples for one sweep."""
    entry = catalog()[key]
    _, sweep1, sweep2 = _entry_spaces(key)
    sweep = sweep1 if mode == "ext1" else sweep2
    if sweep is None:
        raise ValueError(f"{key} has no {mode} classification")
    dim = sweep.dim
    vals = grid.values()
    if len(vals) ** dim <= grid.cartesian_budget:
        return [tuple(p) for p in itertools.product(vals, repeat=dim)]

    points: list[tuple[Fraction, ...]] = []
    seen: set[tuple[Fraction, ...]] = set()

    def push(coeffs: tuple[Fraction, ...]) -> None:
        if coeffs not in seen:
            seen.add(coeffs)
            points.append(coeffs)

    templates = entry.ext1_templates if mode == "ext1" else entry.ext2_templates
    rng = random.Random(grid.seed)
    for t in templates:
        for params in t.sample(grid.n_template_samples):
            push(sweep.coeffs_of(t.build(params)))
    for t in templates:
        for params in t.sample(max(1, grid.n_conjugates)):
            m = t.build(params)
            for _ in range(grid.n_conjugates):
                rep = conjugate_in_shape(key, mode, m, rng)
                try:
                    push(sweep.coeffs_of(rep))
                except ValueError:
                    continue
    zero = Fraction(0)
    nonzero_vals = [v for v in vals if v != 0]
    for i in range(dim):
        for v in nonzero_vals:
            coeffs = [zero] * dim
            coeffs[i] = v
            push(tuple(coeffs))
    for i in range(dim):
        for j in range(i + 1, dim):
            for v1 in nonzero_vals:
                for v2 in nonzero_vals:
                    coeffs = [zero] * dim
                    coeffs[i], coeffs[j] = v1, v2
                    push(tuple(coeffs))
    for _ in range(grid.n_random):
        push(tuple(rng.choice(vals) for _ in range(dim)))
    return points


# ---------------------------------------------------------------------------
# fingerprints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fingerprint:
    """Basis-independent isomorphism invariants of a solvable algebra.

    The spectral component is the proportional normal form of the map the
    distinguished generator induces on (derived algebra)/(its derived
    algebra); for derived codimension two, the pencil component records the
    factorization shape of the determinant of the induced operator pencil,
    which is invariant under basis mixing of the two generators.
    """

    derived_dims: tuple[int, ...]
    lower_central_dims: tuple[int, ...]
    center_dim: int
    der_dim: int
    h1_dim: int
    spectral: str
    pencil_shape: tuple = ()

    def as_dict(self) -> dict:
        return {
            "derived_dims": list(self.derived_dims),
            "lower_central_dims": list(self.lower_central_dims),
            "center_dim": self.center_dim,
            "der_dim": self.der_dim,
            "h1_dim": self.h1_dim,
            "spectral": self.spectral,
            "pencil_shape": [list(x) for x in self.pencil_shape],
        }


def _poly_add(p: Poly, q: Poly) -> Poly:
    size = max(len(p), len(q))
    return tuple((p[i] if i < len(p) else Fraction(0)) +
                 (q[i] if i < len(q) else Fraction(0)) for i in range(size))


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            if b != 0:
                out[i + j] += a * b
    return tuple(out)


def _poly_det(entries: list[list[Poly]]) -> Poly:
    n = len(entries)
    if n == 1:
        return entries[0][0]
    total: Poly = (Fraction(0),)
    for i in range(n):
        minor = [[entries[r][c] for c in range(1, n)]
                 for r in range(n) if r != i]
        term = _poly_mul(entries[i][0], _poly_det(minor))
        if i % 2:
            term = tuple(-c for c in term)
        total = _poly_add(total, term)
    return total


def _trim(p: Poly) -> Poly:
    last = 0
    for i, c in enumerate(p):
        if c != 0:
            last = i
    return tuple(p[:last + 1])


def _abelianized_action(L: LieAlgebra, v: Vector) -> Matrix:
    """Action induced by ad_v on derived/(derived of derived)."""
    der = derived_subalgebra(L)
    sub = subalgebra(L, der.space)
    op = restrict_operator(adjoint_matrix(L, v), der.space)
    der2 = derived_subalgebra(sub)
    if der2.dim == 0:
        return op
    return induced_operator_on_quotient(sub, op, Ideal(sub, der2.space))


def fingerprint(L: LieAlgebra) -> Fingerprint:
    """Compute the invariant fingerprint; requires a solvable algebra."""
    if not is_solvable(L):
        raise ValueError("fingerprint requires a solvable algebra")
    ds = tuple(i.dim for i in derived_series(L))
    lcs = tuple(i.dim for i in lower_central_series(L))
    zdim = center(L).dim
    space = derivation_space(L)
    der = derived_subalgebra(L)
    codim = L.dim - der.dim
    spectral = ""
    pencil: tuple = ()
    comp = complement_coordinates(der.space)
    if codim == 1 and der.dim > 0:
        y = L.basis_vector(comp[0])
        try:
            spectral = proportional_normalize(_abelianized_action(L, y)).describe()
        except UnsupportedSpectrumError:
            spectral = "outside supported spectrum"
    elif codim == 2 and der.dim > 0:
        z = L.basis_vector(comp[0])
        y = L.basis_vector(comp[1])
        a = _abelianized_action(L, z)
        b = _abelianized_action(L, y)
        entries = [[(b.entries[i][j], a.entries[i][j]) for j in range(a.cols)]
                   for i in range(a.rows)]
        det_poly = _trim(_poly_det(entries))
        m = a.rows
        shape: list[tuple] = []
        if all(c == 0 for c in det_poly):
            shape.append(("zero", m))
        else:
            inf_mult = m - (len(det_poly) - 1)
            if inf_mult > 0:
                shape.append(("inf", inf_mult))
            if len(det_poly) > 1:
                from .exactla import _factor_over_rationals

                lead = det_poly[-1]
                monic = tuple(c / lead for c in det_poly)
                for fac, mult in _factor_over_rationals(monic):
                    shape.append((len(fac) - 1, mult))
        pencil = tuple(sorted(shape, key=str))
    return Fingerprint(ds, lcs, zdim, space.dim_full, space.dim_h1,
                       spectral, pencil)


# ---------------------------------------------------------------------------
# reports and drivers
# ---------------------------------------------------------------------------

@dataclass
class FamilyReport:
    name: str
    domain: str
    param_names: tuple[str, ...]
    matched_points: int
    sample_params: list[str]
    verified_points: int
    jacobi_ok: bool
    membership_ok: bool
    indecomposable_ok: Optional[bool]

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "domain": self.domain,
            "param_names": list(self.param_names),
            "matched_points": self.matched_points,
            "sample_params": self.sample_params,
            "verified_points": self.verified_points,
            "jacobi_ok": self.jacobi_ok,
            "membership_ok": self.membership_ok,
        }
        if self.indecomposable_ok is not None:
            d["indecomposable_ok"] = self.indecomposable_ok
        return d


@dataclass
class ClassificationReport:
    base: str
    mode: str
    grid: str
    total_points: int
    member_points: int
    skipped_out_of_field: int
    filtered_points: int
    families: list[FamilyReport]
    fingerprints: dict[str, dict]
    distinctness: list[dict]
    crosscheck_points: int
    golden_expected: list[str]
    golden_found: list[str]

    def as_dict(self) -> dict:
        return {
            "base": self.base,
            "mode": self.mode,
            "grid": self.grid,
            "totals": {
                "points": self.total_points,
                "members": self.member_points,
                "skipped_out_of_field": self.skipped_out_of_field,
                "filtered": self.filtered_points,
            },
            "families": [f.as_dict() for f in self.families],
            "fingerprints": self.fingerprints,
            "distinctness": self.distinctness,
            "crosscheck_points": self.crosscheck_points,
            "golden": {
                "expected": sorted(self.golden_expected),
                "found": sorted(self.golden_found),
                "ok": sorted(self.golden_expected) == sorted(self.golden_found),
            },
        }


def _classify_chunk(key: str, mode: str, grid: GridSpec,
                    start: int, end: int) -> list[tuple]:
    """Worker: classify a slice of the sweep, returning per-point results."""
    points = sweep_points(key, mode, grid)[start:end]
    entry = catalog()[key]
    _, sweep1, sweep2 = _entry_spaces(key)
    sweep = sweep1 if mode == "ext1" else sweep2
    classifier = (entry.ext1_classifier if mode == "ext1"
                  else entry.ext2_classifier)
    results = []
    for coeffs in points:
        m = sweep.to_matrix(coeffs)
        if mode == "ext2ad":
            filters = _ext2_filters(entry.ext2_filter_key, m.flatten(), sweep.n)
            if not filters["member"]:
                results.append(("nonmember",))
                continue
            if not (filters["outer"] and filters["indecomposable"]):
                results.append(("filtered",))
                continue
        try:
            outcome = classifier(m)
        except UnsupportedSpectrumError:
            results.append(("skip",))
            continue
        if outcome is None:
            results.append(("nonmember",))
        else:
            name, params = outcome
            results.append(("match", name,
                            tuple(param_str(p) for p in params)))
    return results


def _run_sweep(key: str, mode: str, grid: GridSpec, jobs: int) -> list[tuple]:
    points = sweep_points(key, mode, grid)
    total = len(points)
    if jobs <= 1 or total < 2000:
        return _classify_chunk(key, mode, grid, 0, total)
    import multiprocessing as mp

    chunk = (total + jobs - 1) // jobs
    args = [(key, mode, grid, i, min(i + chunk, total))
            for i in range(0, total, chunk)]
    with mp.Pool(jobs) as pool:
        parts = pool.starmap(_classify_chunk, args)
    return [r for part in parts for r in part]


def _build_extension(entry: CatalogEntry, mode: str, m: Matrix) -> LieAlgebra:
    if mode == "ext1":
        return extend_by_derivation(entry.algebra, m)
    n = entry.algebra.dim
    d_on_h = m.submatrix(range(n), range(n))
    zy = m.column(n)[:n]
    return build_double_extension(entry.algebra, Matrix.zero(n, n), d_on_h, zy)


def _verify_template(entry: CatalogEntry, mode: str, t: FamilyTemplate,
                     count: int) -> FamilyReport:
    """Instantiate sample parameter points and re-verify everything slow:
    Jacobi, the full membership condition, indecomposability, and the
    exact parameter round trip through the matcher."""
    samples = t.sample(count)
    jac_ok = mem_ok = True
    indec_ok: Optional[bool] = None if mode == "ext1" else True
    verified = 0
    classifier = (entry.ext1_classifier if mode == "ext1"
                  else entry.ext2_classifier)
    for params in samples:
        m = t.build(params)
        _build_extension(entry, mode, m)  # raises on any Jacobi failure
        if mode == "ext1":
            verdict = check_codim1_condition(entry.algebra, m)
            mem_ok = mem_ok and verdict.member
        else:
            n = entry.algebra.dim
            d_on_h = m.submatrix(range(n), range(n))
            zy = m.column(n)[:n]
            verdict2 = check_codim2_condition(
                entry.algebra, Matrix.zero(n, n), m)
            mem_ok = mem_ok and verdict2.member
            cert = is_decomposable_double(entry.algebra, ExtensionSpec(
                entry.algebra, Matrix.zero(n, n), d_on_h, zy))
            indec_ok = indec_ok and not cert.decomposable
        outcome = classifier(m)
        if outcome is None or outcome[0] != t.name:
            raise AmbiguousMatch(
                f"template {t.name} instantiation matched {outcome}")
        if not _params_equal(outcome[1], params):
            raise AmbiguousMatch(
                f"template {t.name} parameter round trip failed: "
                f"{[param_str(p) for p in params]} -> "
                f"{[param_str(p) for p in outcome[1]]}")
        if not t.in_domain(outcome[1]):
            raise AmbiguousMatch(
                f"template {t.name} produced out-of-domain parameters")
        verified += 1
    return FamilyReport(t.name, t.domain_desc, t.param_names, 0,
                        [], verified, jac_ok, mem_ok, indec_ok)


def distinctness_evidence(entry: CatalogEntry, mode: str,
                          templates: Sequence[FamilyTemplate]
                          ) -> tuple[list[dict], dict[str, dict]]:
    """Pairwise evidence that distinct templates give non-isomorphic
    algebras at reference parameters: a fingerprint difference, or a failed
    proportional-similarity search on the representatives.  Pairs with
    neither are flagged UNRESOLVED, never merged."""
    reps = {}
    prints = {}
    for t in templates:
        params = t.sample(1)[0]
        m = t.build(params)
        reps[t.name] = m
        prints[t.name] = fingerprint(_build_extension(entry, mode, m))
    evidence = []
    names = [t.name for t in templates]
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if prints[a] != prints[b]:
                evidence.append({"pair": [a, b], "evidence": "fingerprint"})
            elif proportional_similar(reps[a], reps[b]) is None:
                evidence.append({"pair": [a, b],
                                 "evidence": "representatives-not-similar"})
            else:
                evidence.append({"pair": [a, b], "evidence": "UNRESOLVED"})
    return evidence, {n: prints[n].as_dict() for n in names}


def _crosscheck_conditions(entry: CatalogEntry, mode: str, grid: GridSpec,
                           results: list[tuple], count: int = 60) -> int:
    """Re-run the slow independent condition checks on a deterministic
    subsample of swept points and insist they agree with the fast filters."""
    points = sweep_points(entry.key, mode, grid)
    _, sweep1, sweep2 = _entry_spaces(entry.key)
    sweep = sweep1 if mode == "ext1" else sweep2
    rng = random.Random(grid.seed + 1)
    idx = list(range(len(points)))
    rng.shuffle(idx)
    checked = 0
    for i in idx:
        if checked >= count:
            break
        kind = results[i][0]
        if kind == "skip":
            continue
        m = sweep.to_matrix(points[i])
        if mode == "ext1":
            verdict = check_codim1_condition(entry.algebra, m)
            if verdict.member != (kind == "match"):
                raise AssertionError(
                    "fast membership disagrees with the full condition check")
        else:
            n = entry.algebra.dim
            filters = _ext2_filters(entry.ext2_filter_key, m.flatten(), sweep.n)
            verdict2 = check_codim2_condition(
                entry.algebra, Matrix.zero(n, n), m)
            if verdict2.member != filters["member"]:
                raise AssertionError(
                    "fast membership disagrees with the full condition check")
        checked += 1
    return checked


def classify_extensions(key: str, mode: str, grid: Optional[GridSpec] = None,
                        jobs: int = 1, verify_samples: int = 20
                        ) -> ClassificationReport:
    """Run one classification sweep and return the full report.

    Raises :class:`GoldenMismatch` when the discovered family set differs
    from the catalog's golden list.
    """
    grid = grid or GridSpec()
    entry = catalog().get(key)
    if entry is None:
        raise KeyError(f"unknown catalog key {key!r}")
    if mode not in ("ext1", "ext2ad"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "ext2ad" and not entry.supports_ext2():
        raise ValueError(f"{key} has no ad-pair classification")
    templates = entry.ext1_templates if mode == "ext1" else entry.ext2_templates
    results = _run_sweep(key, mode, grid, jobs)

    counts: dict[str, int] = {}
    samples: dict[str, list[str]] = {}
    skipped = members = filtered = 0
    for r in results:
        if r[0] == "skip":
            skipped += 1
        elif r[0] == "filtered":
            filtered += 1
        elif r[0] == "match":
            members += 1
            name = r[1]
            counts[name] = counts.get(name, 0) + 1
            bucket = samples.setdefault(name, [])
            text = "(" + ", ".join(r[2]) + ")"
            if len(bucket) < 5 and text not in bucket:
                bucket.append(text)

    found = set(counts)
    expected = {t.name for t in templates}
    if found != expected:
        raise GoldenMismatch(found, expected)

    family_reports = []
    for t in templates:
        rep = _verify_template(entry, mode, t, verify_samples)
        rep.matched_points = counts[t.name]
        rep.sample_params = samples.get(t.name, [])
        family_reports.append(rep)

    crosschecked = _crosscheck_conditions(entry, mode, grid, results)
    evidence, prints = distinctness_evidence(entry, mode, templates)

    return ClassificationReport(
        base=key, mode=mode, grid=grid.describe(),
        total_points=len(results), member_points=members,
        skipped_out_of_field=skipped, filtered_points=filtered,
        families=family_reports, fingerprints=prints,
        distinctness=evidence, crosscheck_points=crosschecked,
        golden_expected=sorted(expected), golden_found=sorted(found))


def classify_ext1(key: str, grid: Optional[GridSpec] = None,
                  jobs: int = 1) -> ClassificationReport:
    return classify_extensions(key, "ext1", grid, jobs)


def classify_ext2_ad(key: str, grid: Optional[GridSpec] = None,
                     jobs: int = 1) -> ClassificationReport:
    return classify_extensions(key, "ext2ad", grid, jobs)
