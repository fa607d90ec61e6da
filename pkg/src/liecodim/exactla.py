"""Exact rational linear algebra.

Everything here computes over ``fractions.Fraction``; no floating point is
used anywhere.  Matrices are immutable, row-major grids of rationals.
Spectral computations support rational eigenvalues plus complex-conjugate
pairs coming from irreducible quadratic factors; anything outside that field
(real irrational eigenvalues, irreducible factors of degree >= 3) raises a
clean error instead of approximating.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Scalar = Union[int, str, Fraction]
Vector = tuple[Fraction, ...]


class ExactLAError(Exception):
    """Base class for errors raised by the exact linear algebra layer."""


class UnsupportedSpectrumError(ExactLAError):
    """Spectrum falls outside rationals + complex quadratic pairs."""


class IrreducibleFactorDegreeTooHigh(UnsupportedSpectrumError):
    """The characteristic polynomial has an irreducible factor of degree >= 3."""


class RealIrrationalEigenvalues(UnsupportedSpectrumError):
    """An irreducible quadratic factor has positive discriminant (real
    irrational roots), which the exact engine does not represent."""


class NotInvertible(ExactLAError):
    """A matrix required to be invertible is singular."""


def frac(x: Scalar) -> Fraction:
    """Coerce an int, Fraction or 'p/q' string to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_frac(x: Fraction) -> str:
    """Render a rational as 'p' or 'p/q' (never as a float)."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vec(entries: Iterable[Scalar]) -> Vector:
    return tuple(frac(e) for e in entries)


def vec_add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_scale(c: Fraction, u: Vector) -> Vector:
    return tuple(c * a for a in u)


def vec_is_zero(u: Vector) -> bool:
    return all(a == 0 for a in u)


@dataclass(frozen=True)
class Matrix:
    """Immutable dense matrix over the rationals."""

    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows:
            raise ValueError("row count mismatch")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("column count mismatch")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[Scalar]]) -> "Matrix":
        ent = tuple(tuple(frac(x) for x in row) for row in rows)
        nrows = len(ent)
        ncols = len(ent[0]) if nrows else 0
        return Matrix(nrows, ncols, ent)

    @staticmethod
    def zero(rows: int, cols: int) -> "Matrix":
        z = Fraction(0)
        return Matrix(rows, cols, tuple(tuple(z for _ in range(cols)) for _ in range(rows)))

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(n, n, tuple(
            tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)))

    @staticmethod
    def diagonal(values: Sequence[Scalar]) -> "Matrix":
        vals = [frac(v) for v in values]
        n = len(vals)
        return Matrix(n, n, tuple(
            tuple(vals[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    @staticmethod
    def from_columns(cols: Sequence[Vector]) -> "Matrix":
        ncols = len(cols)
        nrows = len(cols[0]) if ncols else 0
        return Matrix(nrows, ncols, tuple(
            tuple(cols[j][i] for j in range(ncols)) for i in range(nrows)))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(self.entries[i][j] for i in range(self.rows))

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows, tuple(
            tuple(self.entries[i][j] for i in range(self.rows)) for j in range(self.cols)))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.entries, other.entries)))

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.entries, other.entries)))

    def __neg__(self) -> "Matrix":
        return self.scale(Fraction(-1))

    def scale(self, c: Scalar) -> "Matrix":
        cc = frac(c)
        return Matrix(self.rows, self.cols, tuple(
            tuple(cc * x for x in row) for row in self.entries))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        ot = other.transpose().entries
        return Matrix(self.rows, other.cols, tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
            for row in self.entries))

    def apply(self, v: Vector) -> Vector:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def trace(self) -> Fraction:
        if not self.is_square():
            raise ValueError("trace of a non-square matrix")
        return sum((self.entries[i][i] for i in range(self.rows)), Fraction(0))

    def power(self, k: int) -> "Matrix":
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        result = Matrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base if k > 1 else base
            k >>= 1
        return result

    def det(self) -> Fraction:
        """Determinant by fraction-preserving Gaussian elimination."""
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = [list(row) for row in self.entries]
        det = Fraction(1)
        for col in range(n):
            pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                det = -det
            det *= a[col][col]
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                if a[r][col] != 0:
                    f = a[r][col] * inv
                    for c in range(col, n):
                        a[r][c] -= f * a[col][c]
        return det

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise NotInvertible("not square")
        n = self.rows
        aug = Matrix(n, 2 * n, tuple(
            row + tuple(Fraction(1 if i == j else 0) for j in range(n))
            for i, row in enumerate(self.entries)))
        red, rank, _ = rref(aug)
        if rank < n or any(red.entries[i][i] != 1 for i in range(n)):
            raise NotInvertible("singular matrix")
        return Matrix(n, n, tuple(row[n:] for row in red.entries))

    def rank(self) -> int:
        return rref(self)[1]

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return Matrix(self.rows, self.cols + other.cols, tuple(
            r1 + r2 for r1, r2 in zip(self.entries, other.entries)))

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        return Matrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Matrix":
        return Matrix(len(row_idx), len(col_idx), tuple(
            tuple(self.entries[i][j] for j in col_idx) for i in row_idx))

    def flatten(self) -> Vector:
        """Row-major vectorization."""
        return tuple(x for row in self.entries for x in row)

    @staticmethod
    def unflatten(v: Vector, rows: int, cols: int) -> "Matrix":
        if len(v) != rows * cols:
            raise ValueError("length mismatch in unflatten")
        return Matrix(rows, cols, tuple(
            tuple(v[i * cols + j] for j in range(cols)) for i in range(rows)))

    def _check_same_shape(self, other: "Matrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    def __str__(self) -> str:
        grid = [[format_frac(x) for x in row] for row in self.entries]
        widths = [max(len(grid[i][j]) for i in range(self.rows)) for j in range(self.cols)] \
            if self.rows else []
        return "\n".join(
            "[" + "  ".join(cell.rjust(w) for cell, w in zip(row, widths)) + "]"
            for row in grid)


def rref(m: Matrix) -> tuple[Matrix, int, tuple[int, ...]]:
    """Reduced row echelon form.

    Returns ``(reduced, rank, pivot_columns)``.  Pivots are normalized to 1
    and cleared above and below, so the output is the unique RREF of ``m``.
    """
    a = [list(row) for row in m.entries]
    nrows, ncols = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, nrows) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    reduced = Matrix(nrows, ncols, tuple(tuple(row) for row in a))
    return reduced, len(pivots), tuple(pivots)


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by its unique reduced-echelon basis.

    Basis vectors are the nonzero rows of the RREF of any spanning set, so
    two equal subspaces always carry identical bases.
    """

    ambient_dim: int
    basis: tuple[Vector, ...]

    @staticmethod
    def from_vectors(ambient_dim: int, vectors: Sequence[Vector]) -> "Subspace":
        vecs = [v for v in vectors if not vec_is_zero(v)]
        if not vecs:
            return Subspace(ambient_dim, ())
        red, rank, _ = rref(Matrix(len(vecs), ambient_dim, tuple(vecs)))
        return Subspace(ambient_dim, tuple(red.entries[:rank]))

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, ())

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace.from_vectors(
            ambient_dim,
            [tuple(Fraction(1 if i == j else 0) for j in range(ambient_dim))
             for i in range(ambient_dim)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Vector) -> bool:
        return self.coordinates(v) is not None

    def coordinates(self, v: Vector) -> Optional[Vector]:
        """Coefficients of ``v`` in the echelon basis, or None if outside."""
        if len(v) != self.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if not self.basis:
            return () if vec_is_zero(v) else None
        a = Matrix(len(self.basis), self.ambient_dim, self.basis).transpose()
        return solve(a, v)

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        return Subspace.from_vectors(self.ambient_dim, self.basis + other.basis)

    def intersection(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient_dim)
        # Solve a x + b y = 0 over the stacked coefficient space.
        a = Matrix(len(self.basis), self.ambient_dim, self.basis).transpose()
        b = Matrix(len(other.basis), other.ambient_dim, other.basis).transpose()
        combined = a.hstack(b.scale(-1))
        ker = nullspace(combined)
        vectors = []
        for coeffs in ker.basis:
            u = tuple(sum(coeffs[k] * self.basis[k][i] for k in range(len(self.basis)))
                      for i in range(self.ambient_dim))
            vectors.append(u)
        return Subspace.from_vectors(self.ambient_dim, vectors)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis


def nullspace(m: Matrix) -> Subspace:
    """Canonical basis of the right kernel {v : m v = 0}."""
    red, rank, pivots = rref(m)
    free_cols = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free_cols:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -red.entries[r][f]
        basis.append(tuple(v))
    return Subspace.from_vectors(m.cols, basis)


def solve(m: Matrix, rhs: Vector) -> Optional[Vector]:
    """One exact solution of ``m x = rhs``, or None if inconsistent."""
    if len(rhs) != m.rows:
        raise ValueError("rhs length mismatch")
    aug = m.hstack(Matrix(m.rows, 1, tuple((r,) for r in rhs)))
    red, rank, pivots = rref(aug)
    if m.cols in pivots:
        return None
    x = [Fraction(0)] * m.cols
    for r, p in enumerate(pivots):
        x[p] = red.entries[r][m.cols]
    return tuple(x)


# ---------------------------------------------------------------------------
# polynomials (coefficient tuples, ascending degree)
# ---------------------------------------------------------------------------

Poly = tuple[Fraction, ...]


def poly_degree(p: Poly) -> int:
    return len(p) - 1


def poly_eval(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_eval_matrix(p: Poly, m: Matrix) -> Matrix:
    acc = Matrix.zero(m.rows, m.cols)
    for c in reversed(p):
        acc = acc @ m + Matrix.identity(m.rows).scale(c)
    return acc


def char_poly(m: Matrix) -> Poly:
    """Monic characteristic polynomial det(tI - m), ascending coefficients.

    Uses the Faddeev-LeVerrier recurrence, which stays in exact rational
    arithmetic throughout.
    """
    if not m.is_square():
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = m.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = Matrix.zero(n, n)
    c = Fraction(1)
    for k in range(1, n + 1):
        mk = m @ (mk + Matrix.identity(n).scale(c))
        c = -mk.trace() / k
        coeffs[n - k] = c
    return tuple(coeffs)


def _factor_over_rationals(p: Poly) -> list[tuple[Poly, int]]:
    """Irreducible monic factors of a rational polynomial with multiplicities.

    Delegates the factorization itself to sympy (exact over QQ); imported
    lazily so the common linear-algebra paths never pay the import cost.
    """
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x ** k
               for k, c in enumerate(p))
    _, factors = sympy.Poly(expr, x, domain="QQ").factor_list()
    result = []
    for fac, mult in factors:
        monic = fac.monic()
        coeffs = monic.all_coeffs()  # descending
        asc = tuple(Fraction(int(c.p), int(c.q)) for c in reversed(coeffs))
        result.append((asc, int(mult)))
    return result


@dataclass(frozen=True)
class QuadraticEigenvalue:
    """One eigenvalue of a rational matrix, within the supported field.

    ``kind`` is either 'rational' (value stored exactly) or 'complex_pair'
    for a conjugate pair p +- q*i where p and q^2 are rational and q^2 > 0.
    ``multiplicity`` counts occurrences (pairs count once per conjugate
    pair).
    """

    kind: str
    multiplicity: int
    value: Optional[Fraction] = None
    real_part: Optional[Fraction] = None
    imag_sq: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.kind == "rational":
            if self.value is None:
                raise ValueError("rational eigenvalue needs a value")
        elif self.kind == "complex_pair":
            if self.real_part is None or self.imag_sq is None:
                raise ValueError("complex pair needs (p, q^2)")
            if self.imag_sq <= 0:
                raise ValueError("complex pair requires q^2 > 0")
        else:
            raise ValueError(f"unknown eigenvalue kind {self.kind!r}")

    def sort_key(self) -> tuple:
        if self.kind == "rational":
            return (0, self.value, Fraction(0))
        return (1, self.real_part, self.imag_sq)

    def describe(self) -> str:
        if self.kind == "rational":
            return format_frac(self.value)
        return f"{format_frac(self.real_part)}+-sqrt({format_frac(self.imag_sq)})i"


@dataclass(frozen=True)
class EigenStructure:
    """Complete spectral data: eigenvalues with Jordan block size partitions.

    Entries are sorted by (kind, value) to make the structure canonical;
    block sizes are listed in descending order.
    """

    dim: int
    entries: tuple[tuple[QuadraticEigenvalue, tuple[int, ...]], ...]

    def rational_eigenvalues(self) -> dict[Fraction, tuple[int, ...]]:
        return {ev.value: sizes for ev, sizes in self.entries if ev.kind == "rational"}

    def complex_pairs(self) -> dict[tuple[Fraction, Fraction], tuple[int, ...]]:
        return {(ev.real_part, ev.imag_sq): sizes
                for ev, sizes in self.entries if ev.kind == "complex_pair"}

    def block_multiset(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        """Shape-only data (kinds and size partitions, eigenvalues erased)."""
        return tuple(sorted((ev.kind, sizes) for ev, sizes in self.entries))


def _block_sizes_from_nullities(nullities: list[int]) -> tuple[int, ...]:
    """Jordan block sizes from the nullity sequence of successive powers."""
    counts = []
    prev = 0
    for nl in nullities:
        counts.append(nl - prev)
        prev = nl
    # counts[k] = number of blocks of size >= k+1
    sizes = []
    for k in range(len(counts) - 1, -1, -1):
        extra = counts[k] - (counts[k + 1] if k + 1 < len(counts) else 0)
        sizes.extend([k + 1] * extra)
    return tuple(sorted(sizes, reverse=True))


def eigen_structure(m: Matrix) -> EigenStructure:
    """Eigenvalues with Jordan block partitions, via exact rank tests.

    Raises :class:`IrreducibleFactorDegreeTooHigh` when some irreducible
    factor of the characteristic polynomial has degree >= 3, and
    :class:`RealIrrationalEigenvalues` for irreducible quadratics with
    positive discriminant.
    """
    if not m.is_square():
        raise ValueError("eigen structure of a non-square matrix")
    n = m.rows
    entries: list[tuple[QuadraticEigenvalue, tuple[int, ...]]] = []
    for factor, mult in _factor_over_rationals(char_poly(m)):
        deg = poly_degree(factor)
        if deg == 1:
            lam = -factor[0]
            nm = m - Matrix.identity(n).scale(lam)
            nullities = []
            power = Matrix.identity(n)
            for _ in range(mult):
                power = power @ nm
                nullities.append(n - power.rank())
                if nullities[-1] == mult:
                    break
            sizes = _block_sizes_from_nullities(nullities)
            ev = QuadraticEigenvalue("rational", mult, value=lam)
            entries.append((ev, sizes))
        elif deg == 2:
            b, c = factor[1], factor[0]
            disc = b * b - 4 * c
            if disc >= 0:
                raise RealIrrationalEigenvalues(
                    f"irreducible quadratic with non-negative discriminant {disc}")
            p = -b / 2
            q2 = -disc / 4
            g = poly_eval_matrix(factor, m)
            nullities = []
            power = Matrix.identity(n)
            for _ in range(mult):
                power = power @ g
                nullities.append((n - power.rank()) // 2)
                if nullities[-1] == mult:
                    break
            sizes = _block_sizes_from_nullities(nullities)
            ev = QuadraticEigenvalue("complex_pair", mult, real_part=p, imag_sq=q2)
            entries.append((ev, sizes))
        else:
            raise IrreducibleFactorDegreeTooHigh(
                f"irreducible factor of degree {deg} in the characteristic polynomial")
    entries.sort(key=lambda pair: pair[0].sort_key())
    total = sum(sum(sizes) for ev, sizes in entries
                if ev.kind == "rational") + \
        2 * sum(sum(sizes) for ev, sizes in entries if ev.kind == "complex_pair")
    if total != n:
        raise ExactLAError("internal: Jordan sizes do not fill the dimension")
    return EigenStructure(n, tuple(entries))


# ---------------------------------------------------------------------------
# real Jordan form with exact change of basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JordanDecomposition:
    """Exact Jordan data: ``transform^-1 @ matrix @ transform == jordan``.

    Block conventions, fixed so the output is deterministic:

    * blocks are ordered by (eigenvalue kind, eigenvalue value ascending),
      then by block size descending;
    * rational-eigenvalue blocks carry their 1s on the superdiagonal;
    * a complex pair p +- q*i with rational q yields, for 1x1 pair blocks,
      the rotation block [[p, q], [-q, p]]; otherwise (irrational q or
      higher pair blocks) the rational pair block [[p, 1], [-q^2, p]] is
      used, chained by an E21 coupling between consecutive levels.
    """

    jordan: Matrix
    transform: Matrix
    structure: EigenStructure


def _extend_basis(current: list[Vector], candidates: Iterable[Vector],
                  ambient: int) -> list[Vector]:
    """Candidates that extend the span of ``current``, in canonical order."""
    chosen: list[Vector] = []
    span = Subspace.from_vectors(ambient, current)
    for v in candidates:
        if not span.contains(v):
            chosen.append(v)
            span = Subspace.from_vectors(ambient, list(span.basis) + [v])
    return chosen


def _jordan_chains(op: Matrix, max_size: int, multiplicity: int) -> list[list[Vector]]:
    """Jordan chains for a nilpotent-on-its-kernel-tower operator ``op``.

    Returns chains [v, op v, op^2 v, ...] with heads chosen from canonical
    kernel bases, longest chains first.
    """
    n = op.rows
    kernels = []
    power = Matrix.identity(n)
    for _ in range(max_size):
        power = power @ op
        kernels.append(nullspace(power))
    chains: list[list[Vector]] = []
    used: list[Vector] = []
    for level in range(max_size, 0, -1):
        k_here = kernels[level - 1]
        k_below = kernels[level - 2] if level >= 2 else Subspace.zero(n)
        obstructions = list(k_below.basis)
        # vectors already placed at this height (images of taller chain heads)
        for chain in chains:
            depth = len(chain) - level
            if 0 <= depth < len(chain):
                obstructions.append(chain[depth])
        heads = _extend_basis(obstructions, k_here.basis, n)
        for head in heads:
            chain = [head]
            for _ in range(level - 1):
                chain.append(op.apply(chain[-1]))
            chains.append(chain)
            used.append(head)
    chains.sort(key=len, reverse=True)
    return chains


def _rational_block(lam: Fraction, size: int) -> Matrix:
    rows = []
    for i in range(size):
        row = [Fraction(0)] * size
        row[i] = lam
        if i + 1 < size:
            row[i + 1] = Fraction(1)
        rows.append(tuple(row))
    return Matrix(size, size, tuple(rows))


def _pair_block(p: Fraction, q2: Fraction, levels: int,
                q_rational: Optional[Fraction]) -> Matrix:
    size = 2 * levels
    m = [[Fraction(0)] * size for _ in range(size)]
    for j in range(levels):
        a = 2 * j
        if levels == 1 and q_rational is not None:
            m[a][a], m[a][a + 1] = p, q_rational
            m[a + 1][a], m[a + 1][a + 1] = -q_rational, p
        else:
            m[a][a], m[a][a + 1] = p, Fraction(1)
            m[a + 1][a], m[a + 1][a + 1] = -q2, p
            if j + 1 < levels:
                m[a + 1][a + 2] = Fraction(1)
    return Matrix(size, size, tuple(tuple(row) for row in m))


def _sqrt_fraction(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a non-negative rational, or None."""
    if x < 0:
        return None
    import math

    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def real_jordan_form(m: Matrix) -> JordanDecomposition:
    """Exact real Jordan-type normal form J with S satisfying S^-1 m S = J.

    Supported spectra are rational eigenvalues and complex quadratic pairs;
    see :class:`JordanDecomposition` for the block conventions.  The
    identity S^-1 m S = J is re-verified before returning.
    """
    structure = eigen_structure(m)
    n = m.rows
    columns: list[Vector] = []
    blocks: list[Matrix] = []
    for ev, sizes in structure.entries:
        if ev.kind == "rational":
            op = m - Matrix.identity(n).scale(ev.value)
            chains = _jordan_chains(op, max(sizes), ev.multiplicity)
            if tuple(sorted((len(c) for c in chains), reverse=True)) != sizes:
                raise ExactLAError("internal: chain sizes disagree with rank data")
            for chain in chains:
                # basis ordered tail-first so 1s land on the superdiagonal
                columns.extend(reversed(chain))
                blocks.append(_rational_block(ev.value, len(chain)))
        else:
            p, q2 = ev.real_part, ev.imag_sq
            g = poly_eval_matrix((p * p + q2, -2 * p, Fraction(1)), m)
            chains = _pair_chains(m, g, p, max(sizes))
            if tuple(sorted((len(c) // 2 for c in chains), reverse=True)) != sizes:
                raise ExactLAError("internal: pair chain sizes disagree with rank data")
            q = _sqrt_fraction(q2)
            for chain in chains:
                levels = len(chain) // 2
                if levels == 1 and q is not None:
                    w, v = chain[0], chain[1]
                    columns.extend([vec_scale(1 / q, w), v])
                else:
                    # chains are built top level first; blocks expect the
                    # kernel-level pair leading
                    for idx in range(levels - 1, -1, -1):
                        columns.extend(chain[2 * idx:2 * idx + 2])
                blocks.append(_pair_block(p, q2, levels, q if levels == 1 else None))
    transform = Matrix.from_columns(columns)
    jordan = _block_diag(blocks)
    check = transform.inverse() @ m @ transform
    if check != jordan:
        raise ExactLAError("internal: change of basis failed to reproduce the normal form")
    return JordanDecomposition(jordan, transform, structure)


def _pair_chains(m: Matrix, g: Matrix, p: Fraction, max_level: int) -> list[list[Vector]]:
    """Chains for a complex pair: per level j the pair (w_j, v_j) with
    w_j = (m - p)v_j and g v_j = v_{j-1}."""
    n = m.rows
    kernels = []
    power = Matrix.identity(n)
    for _ in range(max_level):
        power = power @ g
        kernels.append(nullspace(power))
    shift = m - Matrix.identity(n).scale(p)
    chains: list[list[Vector]] = []
    for level in range(max_level, 0, -1):
        k_here = kernels[level - 1]
        k_below = kernels[level - 2] if level >= 2 else Subspace.zero(n)
        obstructions = list(k_below.basis)
        for chain in chains:
            depth = len(chain) // 2 - level
            if 0 <= 2 * depth < len(chain):
                # both members of the pair at this height obstruct
                obstructions.append(chain[2 * depth])
                obstructions.append(chain[2 * depth + 1])
        heads = _extend_basis(obstructions, k_here.basis, n)
        for head in heads:
            # heads may come in w/v pairs; skip heads already covered
            if any(Subspace.from_vectors(n, ch).contains(head) for ch in chains):
                continue
            span_check = Subspace.from_vectors(
                n, [v for ch in chains for v in ch] + list(k_below.basis))
            if span_check.contains(head):
                continue
            chain: list[Vector] = []
            v = head
            for lev in range(level, 0, -1):
                chain.append(shift.apply(v))
                chain.append(v)
                v = g.apply(v)
            chains.append(chain)
            # re-check independence; drop if the w-partner was dependent
            flat = [x for ch in chains for x in ch]
            if Subspace.from_vectors(n, flat).dim != len(flat):
                chains.pop()
    chains.sort(key=len, reverse=True)
    return chains


def _block_diag(blocks: list[Matrix]) -> Matrix:
    total = sum(b.rows for b in blocks)
    m = [[Fraction(0)] * total for _ in range(total)]
    offset = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                m[offset + i][offset + j] = b.entries[i][j]
        offset += b.rows
    return Matrix(total, total, tuple(tuple(row) for row in m))
