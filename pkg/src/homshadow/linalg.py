"""Exact linear algebra over Q (and over any exact field whose elements
support ``+ - * /`` and ``== 0``).

Matrices are lists of row lists.  Nothing here uses floating point.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def to_fraction_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


def _is_zero(x) -> bool:
    return x == 0


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form; returns ``(R, pivot_columns)``.

    Entries are copied, never mutated in place.
    """
    M = [list(r) for r in rows]
    if not M:
        return [], []
    ncols = len(M[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if not _is_zero(M[i][c])), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c] if not isinstance(M[r][c], int) else Fraction(1, M[r][c])
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and not _is_zero(M[i][c]):
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None, one=Fraction(1)) -> list[list]:
    """Basis of the right kernel ``{x : A x = 0}``."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[one if j == i else one * 0 for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0]) if ncols is None else ncols
    R, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [one * 0] * ncols
        v[f] = one
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence], b: Sequence):
    """Unique solution of the square system ``A x = b``; raises if singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, pivots = rref(aug, n + 1)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return [R[i][n] for i in range(n)]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), start=0 * row[0]) for col in Bt] for row in A]


def matvec(A, x):
    return [sum((a * b for a, b in zip(row, x)), start=0 * x[0]) for row in A]


def transpose(A):
    return [list(r) for r in zip(*A)]


def identity(n: int, one=1):
    return [[one if i == j else 0 * one for j in range(n)] for i in range(n)]


def determinant(A) -> Fraction:
    """Bareiss fraction-free determinant of an integer (or rational) matrix."""
    M = [[Fraction(x) for x in row] for row in A]
    n = len(M)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


class Infeasible(Exception):
    pass


def feasible_point(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
    """Find ``x >= 0`` with ``A x = b`` by the phase-one simplex method.

    Exact rational arithmetic with Bland's rule, so it always terminates.
    Returns the solution as a list, or ``None`` when infeasible.
    """
    m = len(A)
    if m == 0:
        return [Fraction(0)] * (len(A[0]) if A else 0)
    n = len(A[0])
    rows = []
    for i in range(m):
        row = [Fraction(x) for x in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        rows.append(row + [Fraction(int(j == i)) for j in range(m)] + [rhs])
    width = n + m
    basis = list(range(n, n + m))
    # phase-one objective: minimise the sum of artificials
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    while True:
        # reduced costs c_j - c_B B^-1 A_j
        red = []
        for j in range(width):
            r = cost[j] - sum((cost[basis[i]] * rows[i][j] for i in range(m)), Fraction(0))
            red.append(r)
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            break
        ratios = [(rows[i][-1] / rows[i][enter], basis[i], i) for i in range(m) if rows[i][enter] > 0]
        if not ratios:
            raise AssertionError("phase-one objective is bounded below; cannot be unbounded")
        best = min(r[0] for r in ratios)
        leave = min((r for r in ratios if r[0] == best), key=lambda r: r[1])[2]
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [a - f * c for a, c in zip(rows[i], rows[leave])]
        basis[leave] = enter
    x = [Fraction(0)] * width
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    if any(x[j] != 0 for j in range(n, width)):
        return None
    return x[:n]
