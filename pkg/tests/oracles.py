"""Independent brute-force oracles used to freeze expected test values.

Deliberately written with different algorithms from the package: cofactor
determinants, elimination with a different pivoting order, and direct
expansion of multilinear identities.  Nothing here imports package
internals beyond plain data.
"""

from fractions import Fraction


def det_cofactor(rows):
    """Determinant by first-row cofactor expansion."""
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        if rows[0][j] == 0:
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        sign = -1 if j % 2 else 1
        total += sign * Fraction(rows[0][j]) * det_cofactor(minor)
    return total


def rank_elimination(rows):
    """Rank by plain forward elimination, scanning columns right-to-left."""
    a = [[Fraction(x) for x in row] for row in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    rank = 0
    used = set()
    for col in reversed(range(ncols)):
        pivot = None
        for r in range(nrows):
            if r not in used and a[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        used.add(pivot)
        rank += 1
        for r in range(nrows):
            if r != pivot and a[r][col] != 0:
                f = a[r][col] / a[pivot][col]
                for c in range(ncols):
                    a[r][c] -= f * a[pivot][c]
    return rank


def leibniz_equations_h3():
    """The Leibniz linear system of the Heisenberg algebra, assembled by
    direct expansion with matrix unknowns m[i][j] (0-based, row-major).

    Brackets: [x2, x3] = x1 (1-based).  For each pair (i, j) the identity
    d([xi, xj]) = [d(xi), xj] + [xi, d(xj)] gives three coordinate rows.
    """
    def basis_bracket(i, j):
        # 0-based; returns coordinates of [x_i, x_j]
        if (i, j) == (1, 2):
            return [1, 0, 0]
        if (i, j) == (2, 1):
            return [-1, 0, 0]
        return [0, 0, 0]

    rows = []
    for i in range(3):
        for j in range(i + 1, 3):
            cij = basis_bracket(i, j)
            for r in range(3):
                coeff = [Fraction(0)] * 9
                for k in range(3):
                    coeff[r * 3 + k] += Fraction(cij[k])
                for s in range(3):
                    w = basis_bracket(s, j)
                    coeff[s * 3 + i] -= Fraction(w[r])
                    w2 = basis_bracket(i, s)
                    coeff[s * 3 + j] -= Fraction(w2[r])
                rows.append(coeff)
    return rows


def jacobi_residual(brackets, dim, i, j, k):
    """[[xi,xj],xk] + [[xj,xk],xi] + [[xk,xi],xj] by direct expansion.

    ``brackets`` maps 1-based (i, j) with i < j to {target: coeff}.
    """
    def bb(a, b):
        v = [Fraction(0)] * dim
        if a == b:
            return v
        sign = 1
        if a > b:
            a, b = b, a
            sign = -1
        for t, c in brackets.get((a, b), {}).items():
            v[t - 1] = sign * Fraction(c)
        return v

    def bracket_vec(v, b):
        out = [Fraction(0)] * dim
        for a in range(1, dim + 1):
            if v[a - 1] == 0:
                continue
            w = bb(a, b)
            for t in range(dim):
                out[t] += v[a - 1] * w[t]
        return out

    total = [Fraction(0)] * dim
    for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
        term = bracket_vec(bb(a, b), c)
        for t in range(dim):
            total[t] += term[t]
    return total
