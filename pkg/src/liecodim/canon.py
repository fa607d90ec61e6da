"""Canonicalization up to proportional similarity, and family templates.

Two square matrices A, B are proportionally similar when c*A = C^-1 B C for
some nonzero scalar c and invertible C.  Classification of the supported
spectra reduces to normal-form data plus a scaling normalization; the
conventions are:

* diagonalizable blocks: the eigenvalue of largest absolute value (ties
  preferring the positive one) is scaled to 1;
* a real Jordan block of size >= 2 with nonzero eigenvalue outranks plain
  diagonal data: its eigenvalue is scaled to 1;
* complex pairs outrank everything: the designated pair's imaginary part is
  scaled to 1, and comparisons use the rational invariant p^2/q^2 together
  with the sign of p.

Scalars produced by the complex normalization may be quadratic irrationals
u*sqrt(v); they are carried exactly by :class:`ExactScalar`, never floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .exactla import (
    EigenStructure,
    Matrix,
    eigen_structure,
    format_frac,
    real_jordan_form,
)


class NoLegalPlacement(Exception):
    """No arrangement of the normal-form blocks fits the constrained shape."""


class NoMatch(Exception):
    """The matrix lies outside every classified family."""


class AmbiguousMatch(Exception):
    """Two templates claimed the same matrix (internal bug trap)."""


def _square_free_split(n: int) -> tuple[int, int]:
    """n = s^2 * f with f squarefree (n > 0); trial division, desk scale."""
    s, f = 1, 1
    d = 2
    m = n
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            s *= d ** (e // 2)
            if e % 2:
                f *= d
        d += 1 if d == 2 else 2
    f *= m
    return s, f


@dataclass(frozen=True, order=False)
class ExactScalar:
    """An exact real scalar of the form rat * sqrt(rad).

    ``rad`` is a squarefree positive integer (1 for plain rationals), so
    representations are canonical and equality is structural.
    """

    rat: Fraction
    rad: int = 1

    @staticmethod
    def of(rat, rad=1) -> "ExactScalar":
        r = Fraction(rat)
        v = Fraction(rad)
        if r == 0 or v == 0:
            return ExactScalar(Fraction(0), 1)
        if v < 0:
            raise ValueError("radicand must be positive")
        # rat*sqrt(p/q) = (rat/q)*sqrt(p*q)
        inner = v.numerator * v.denominator
        r = r / v.denominator
        s, f = _square_free_split(inner)
        return ExactScalar(r * s, f)

    @staticmethod
    def sqrt(x) -> "ExactScalar":
        return ExactScalar.of(1, x)

    def is_rational(self) -> bool:
        return self.rad == 1 or self.rat == 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.rat if self.rad == 1 else Fraction(0)

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.rat, self.rad)

    def __abs__(self) -> "ExactScalar":
        return ExactScalar(abs(self.rat), self.rad)

    def scale(self, c: Fraction) -> "ExactScalar":
        return ExactScalar.of(self.rat * c, self.rad)

    def times(self, other: "ExactScalar") -> "ExactScalar":
        return ExactScalar.of(self.rat * other.rat, self.rad * other.rad)

    def square(self) -> Fraction:
        return self.rat * self.rat * self.rad

    def sign(self) -> int:
        return (self.rat > 0) - (self.rat < 0)

    def _cmp_key(self) -> tuple[int, Fraction]:
        return (self.sign(), self.square() * self.sign())

    def __lt__(self, other: "ExactScalar") -> bool:
        return self._cmp_key() < other._cmp_key()

    def __le__(self, other: "ExactScalar") -> bool:
        return self._cmp_key() <= other._cmp_key()

    def __str__(self) -> str:
        if self.rad == 1 or self.rat == 0:
            return format_frac(self.rat)
        if self.rat == 1:
            return f"sqrt({self.rad})"
        if self.rat == -1:
            return f"-sqrt({self.rad})"
        return f"{format_frac(self.rat)}*sqrt({self.rad})"


ParamValue = Union[Fraction, ExactScalar]


def param_str(p: ParamValue) -> str:
    if isinstance(p, Fraction):
        return format_frac(p)
    return str(p)


def as_exact(p: ParamValue) -> ExactScalar:
    return p if isinstance(p, ExactScalar) else ExactScalar.of(p)


@dataclass(frozen=True)
class CanonicalBlock:
    """One block of a normalized form: its eigen data after scaling, the
    block size, and the slot it occupies in the canonical ordering."""

    kind: str  # 'rational' | 'complex_pair'
    size: int
    slot: int
    value: Optional[ExactScalar] = None
    real_part: Optional[ExactScalar] = None
    imag: Optional[ExactScalar] = None

    def sort_key(self) -> tuple:
        if self.kind == "rational":
            return (0, self.value._cmp_key(), -self.size)
        return (1, self.real_part._cmp_key(), self.imag._cmp_key(), -self.size)

    def describe(self) -> str:
        if self.kind == "rational":
            return f"[{self.value}]x{self.size}"
        return f"[{self.real_part}+-{self.imag}i]x{self.size}"


@dataclass(frozen=True)
class CanonicalForm:
    """Scaling-normalized spectral data of a matrix."""

    blocks: tuple[CanonicalBlock, ...]
    scaling_applied: ExactScalar
    placement_profile: str

    def describe(self) -> str:
        return " + ".join(b.describe() for b in self.blocks)


@dataclass(frozen=True)
class PlacementConstraints:
    """Which block arrangements are legal for a constrained coordinate shape.

    ``restrict`` receives the eigen structure of the full matrix and
    returns, for every legal arrangement, the sub-structure whose blocks
    are eligible to designate the scaling pivot (determined slots such as a
    trace slot are excluded); an empty list means no arrangement fits and
    canonicalization raises :class:`NoLegalPlacement`.  Supplied per base
    algebra by the classification catalog.
    """

    label: str
    restrict: Callable[[EigenStructure], list[EigenStructure]]

    def legal(self, st: EigenStructure) -> bool:
        return bool(self.restrict(st))


def _candidate_scalings(st: EigenStructure) -> list[tuple[ExactScalar, str]]:
    """Designated scaling candidates per the normalization conventions.

    Returns [(c, profile)] with both sign choices when signs are free.
    """
    pairs = st.complex_pairs()
    if pairs:
        q2_des, p_des = max((q2, p) for (p, q2) in pairs)
        base = ExactScalar.sqrt(Fraction(1) / q2_des)
        return [(base, "complex"), (-base, "complex")]
    jordan_eigs = [ev.value for ev, sizes in st.entries
                   if ev.kind == "rational" and ev.value != 0 and sizes and sizes[0] >= 2]
    if jordan_eigs:
        lam = max(jordan_eigs, key=lambda v: (abs(v), v > 0))
        return [(ExactScalar.of(Fraction(1) / lam), "jordan")]
    nonzero = [ev.value for ev, _ in st.entries if ev.kind == "rational" and ev.value != 0]
    if nonzero:
        lam = max(nonzero, key=lambda v: (abs(v), v > 0))
        return [(ExactScalar.of(Fraction(1) / lam), "diagonal")]
    return [(ExactScalar.of(1), "nilpotent")]


def _scaled_blocks(st: EigenStructure, c: ExactScalar) -> tuple[CanonicalBlock, ...]:
    blocks: list[CanonicalBlock] = []
    c2 = c.square()
    for ev, sizes in st.entries:
        for size in sizes:
            if ev.kind == "rational":
                blocks.append(CanonicalBlock(
                    "rational", size, 0, value=ExactScalar.of(ev.value).times(c)))
            else:
                p_norm = ExactScalar.of(ev.real_part).times(c)
                q2_norm = ev.imag_sq * c2
                blocks.append(CanonicalBlock(
                    "complex_pair", size, 0,
                    real_part=p_norm, imag=ExactScalar.sqrt(q2_norm)))
    blocks.sort(key=CanonicalBlock.sort_key)
    return tuple(CanonicalBlock(b.kind, b.size, i, b.value, b.real_part, b.imag)
                 for i, b in enumerate(blocks))


def _form_key(blocks: tuple[CanonicalBlock, ...]) -> tuple:
    return tuple(b.sort_key() for b in blocks)


def proportional_normalize(m: Matrix,
                           placement_constraints: Optional[PlacementConstraints] = None
                           ) -> CanonicalForm:
    """Normal-form data of ``m`` with the scaling conventions applied.

    Under placement constraints the scaling pivot is designated only from
    the blocks the constraints leave free.  When several scalars remain
    possible (sign choices, several legal arrangements), the
    lexicographically smallest block tuple wins, so the output is
    deterministic.
    """
    st = eigen_structure(m)
    if placement_constraints is None:
        pivot_structures = [st]
        label = "generic"
    else:
        pivot_structures = placement_constraints.restrict(st)
        label = placement_constraints.label
        if not pivot_structures:
            raise NoLegalPlacement(
                f"no legal arrangement under constraints {label!r}")
    candidates: list[tuple[ExactScalar, str]] = []
    seen = set()
    for sub in pivot_structures:
        for c, profile in _candidate_scalings(sub):
            if (c, profile) not in seen:
                seen.add((c, profile))
                candidates.append((c, profile))
    best = None
    for c, profile in candidates:
        blocks = _scaled_blocks(st, c)
        key = _form_key(blocks)
        if best is None or key < best[0]:
            best = (key, blocks, c, profile)
    _, blocks, c, profile = best
    return CanonicalForm(blocks, c, f"{label}:{profile}")


def _nonzero_rationals(st: EigenStructure) -> list[Fraction]:
    return [ev.value for ev, _ in st.entries if ev.kind == "rational" and ev.value != 0]


def _sqrt_rational(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def _scaled_structure_key(st: EigenStructure, c: Fraction) -> tuple:
    data = []
    for ev, sizes in st.entries:
        if ev.kind == "rational":
            data.append((0, c * ev.value, Fraction(0), sizes))
        else:
            data.append((1, c * ev.real_part, c * c * ev.imag_sq, sizes))
    return tuple(sorted(data))


def _structure_key(st: EigenStructure) -> tuple:
    return _scaled_structure_key(st, Fraction(1))


def proportional_similar(a: Matrix, b: Matrix
                         ) -> Optional[tuple[Fraction, Matrix]]:
    """A verified witness (c, C) with c*a = C^-1 b C, or None.

    Candidate scalars are enumerated from eigenvalue ratios; each candidate
    is tested by comparing exact normal forms.  Only rational scalars are
    searched: a pair of rational matrices that are proportionally similar
    over the reals but only via an irrational scalar (possible when the
    whole spectrum is irrational complex) is reported as None, consistent
    with the no-algebraic-number-tower policy.
    """
    if a.rows != b.rows or not a.is_square() or not b.is_square():
        return None
    st_a, st_b = eigen_structure(a), eigen_structure(b)
    candidates: set[Fraction] = set()
    ra, rb = _nonzero_rationals(st_a), _nonzero_rationals(st_b)
    for la in ra:
        for lb in rb:
            candidates.add(lb / la)
    for (pa, qa2) in st_a.complex_pairs():
        for (pb, qb2) in st_b.complex_pairs():
            root = _sqrt_rational(qb2 / qa2)
            if root is not None:
                candidates.add(root)
                candidates.add(-root)
            if pa != 0 and pb != 0:
                candidates.add(pb / pa)
    if not candidates:
        # fully nilpotent spectra: any nonzero scalar preserves the form
        candidates = {Fraction(1)}
    key_b = _structure_key(st_b)
    for c in sorted(candidates):
        if c == 0 or _scaled_structure_key(st_a, c) != key_b:
            continue
        dec_a = real_jordan_form(a.scale(c))
        dec_b = real_jordan_form(b)
        if dec_a.jordan != dec_b.jordan:
            continue
        witness = dec_b.transform @ dec_a.transform.inverse()
        if witness.inverse() @ b @ witness == a.scale(c):
            return c, witness
    return None


@dataclass(frozen=True)
class FamilyTemplate:
    """A named parameterized canonical matrix with its parameter domain.

    ``build`` instantiates the canonical matrix at a rational parameter
    point (in the coordinate shape of the base algebra's cohomology
    transversal); ``match`` recognizes whether an arbitrary shaped matrix
    belongs to this family and returns the canonical parameter values.
    ``sample`` yields deterministic in-domain rational parameter points.
    """

    name: str
    base: str
    mode: str  # 'ext1' | 'ext2ad'
    param_names: tuple[str, ...]
    domain_desc: str
    build: Callable[[tuple[Fraction, ...]], Matrix]
    in_domain: Callable[[tuple[ParamValue, ...]], bool]
    match: Callable[[Matrix], Optional[tuple[ParamValue, ...]]]
    sample: Callable[[int], list[tuple[Fraction, ...]]]

    def describe_params(self, params: Sequence[ParamValue]) -> str:
        if not self.param_names:
            return self.name
        inner = ", ".join(f"{n}={param_str(p)}"
                          for n, p in zip(self.param_names, params))
        return f"{self.name}[{inner}]"


def family_match(m: Matrix, templates: Sequence[FamilyTemplate],
                 verify: bool = True) -> tuple[FamilyTemplate, tuple[ParamValue, ...]]:
    """The unique template (with parameter values) covering ``m``.

    Raises :class:`NoMatch` when no template claims the matrix and
    :class:`AmbiguousMatch` when more than one does.  With ``verify`` and
    fully rational parameters, the match is cross-validated by an exact
    proportional-similarity witness between ``m`` and the instantiated
    canonical matrix.
    """
    claims = []
    for t in templates:
        params = t.match(m)
        if params is not None:
            claims.append((t, params))
    if not claims:
        raise NoMatch("matrix lies outside the classified families")
    if len(claims) > 1:
        names = [t.name for t, _ in claims]
        raise AmbiguousMatch(f"templates {names} all claim the matrix")
    template, params = claims[0]
    if not template.in_domain(params):
        raise AmbiguousMatch(
            f"template {template.name} produced out-of-domain parameters "
            f"{[param_str(p) for p in params]}")
    if verify and all(isinstance(p, Fraction) or p.is_rational() for p in params):
        point = tuple(p if isinstance(p, Fraction) else p.to_fraction()
                      for p in params)
        inst = template.build(point)
        if proportional_similar(m, inst) is None:
            raise AmbiguousMatch(
                f"match to {template.name} failed similarity cross-validation")
    return template, params
