"""Exact two-phase simplex over the rationals.

Small dense problems only: the tableau holds ``Fraction`` entries and
pivoting follows Bland's rule, so the method terminates and every optimum is
exact.
"""

from __future__ import annotations

from fractions import Fraction


class LPError(ArithmeticError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


def _pivot(T, basis, row, col):
    piv = T[row][col]
    T[row] = [v / piv for v in T[row]]
    for i, r in enumerate(T):
        if i != row and r[col] != 0:
            f = r[col]
            T[i] = [a - f * b for a, b in zip(r, T[row])]
    basis[row] = col


def _optimize(T, basis, cost, allowed):
    """Minimize ``cost . x`` over the current tableau (last column = rhs)."""
    n = len(T[0]) - 1
    while True:
        entering = None
        for j in range(n):
            if not allowed[j] or j in basis:
                continue
            red = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(len(T)))
            if red < 0:
                entering = j
                break
        if entering is None:
            return
        best = None
        for i, r in enumerate(T):
            if r[entering] > 0:
                ratio = r[-1] / r[entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded("objective is unbounded below")
        _pivot(T, basis, best[1], entering)


def minimize(c, A, b):
    """Minimize ``c . x`` subject to ``A x = b``, ``x >= 0``.

    Returns ``(value, x)`` with exact ``Fraction`` entries.
    """
    m, n = len(A), len(c)
    c = [Fraction(v) for v in c]
    rows = []
    for i in range(m):
        r = [Fraction(v) for v in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            r, rhs = [-v for v in r], -rhs
        rows.append(r + [Fraction(int(k == i)) for k in range(m)] + [rhs])
    basis = [n + i for i in range(m)]
    width = n + m

    # phase 1: drive the artificial variables to zero
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    _optimize(rows, basis, phase1, [True] * width)
    if sum(rows[i][-1] for i in range(m) if basis[i] >= n) != 0:
        raise Infeasible("constraints admit no non-negative solution")
    for i in range(m - 1, -1, -1):
        if basis[i] >= n:
            col = next((j for j in range(n) if rows[i][j] != 0), None)
            if col is None:
                del rows[i]
                del basis[i]
            else:
                _pivot(rows, basis, i, col)

    # phase 2
    cost = c + [Fraction(0)] * m
    _optimize(rows, basis, cost, [j < n for j in range(width)])
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    return sum(ci * xi for ci, xi in zip(c, x)), x


def min_cover(matrix):
    """Minimize ``sum x`` subject to ``matrix x >= 1``, ``x >= 0``."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    A = [list(matrix[i]) + [-int(k == i) for k in range(m)] for i in range(m)]
    value, x = minimize([1] * n + [0] * m, A, [1] * m)
    return value, x[:n]


def max_packing(matrix):
    """Maximize ``sum y`` subject to ``matrix y <= 1``, ``y >= 0``."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    A = [list(matrix[i]) + [int(k == i) for k in range(m)] for i in range(m)]
    value, y = minimize([-1] * n + [0] * m, A, [1] * m)
    return -value, y[:n]
