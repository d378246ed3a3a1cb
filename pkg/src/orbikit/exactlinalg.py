"""Small exact linear algebra kit over the rationals (Fractions throughout)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

__all__ = [
    "det_int",
    "solve_exact",
    "rank_exact",
    "nullspace_exact",
    "primitive_integer",
]


def det_int(mat) -> int:
    """Bareiss fraction-free determinant of a square integer matrix."""
    a = [list(map(int, row)) for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def _rref(rows):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    mat = [[Fraction(x) for x in row] for row in rows]
    if not mat:
        return mat, []
    m, n = len(mat), len(mat[0])
    pivots = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = mat[r][c]
        mat[r] = [v / inv for v in mat[r]]
        for i in range(m):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [v - f * w for v, w in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return mat, pivots


def solve_exact(rows, rhs):
    """Solve A x = rhs over Q.

    Returns ("unique", x) | ("inconsistent", None) | ("underdetermined", None).
    """
    if not rows:
        return "underdetermined", None
    n = len(rows[0])
    aug = [list(row) + [r] for row, r in zip(rows, rhs)]
    mat, pivots = _rref(aug)
    pivots_a = [c for c in pivots if c < n]
    if len(pivots_a) < len(pivots):  # pivot in the rhs column
        return "inconsistent", None
    if len(pivots_a) < n:
        return "underdetermined", None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots_a):
        x[c] = mat[i][n]
    return "unique", x


def rank_exact(rows) -> int:
    if not rows:
        return 0
    _, pivots = _rref(rows)
    return len(pivots)


def nullspace_exact(rows, n_cols=None):
    """Basis of the rational nullspace of A (rows over n_cols columns)."""
    if not rows:
        n = n_cols
        if n is None:
            raise ValueError("empty system needs explicit column count")
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    n = len(rows[0])
    mat, pivots = _rref(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -mat[i][fc]
        basis.append(vec)
    return basis


def primitive_integer(vec):
    """Scale a rational vector to a primitive integer vector (gcd 1),
    preserving direction."""
    fracs = [Fraction(x) for x in vec]
    if all(f == 0 for f in fracs):
        raise ValueError("zero vector has no primitive representative")
    denom = 1
    for f in fracs:
        denom = denom * f.denominator // gcd(denom, f.denominator)
    ints = [int(f * denom) for f in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints)
