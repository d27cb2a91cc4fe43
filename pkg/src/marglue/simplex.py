"""Exact rational linear feasibility via phase-one simplex with Bland's rule.

Decides whether {x : A x = b, x >= 0} is nonempty.  On success it returns a
basic feasible point; on failure it returns a Farkas ray y with

    y^T A <= 0  (componentwise)   and   y^T b > 0,

which is the raw material for dual infeasibility certificates.  Bland's rule
guarantees termination; everything is a Fraction, so verdicts are exact.  The
returned objects are re-verified against the definitions before they leave
this module, so a bug here fails loudly instead of producing a wrong verdict.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .errors import DimensionMismatchError, InvariantViolationError

ZERO = Fraction(0)
ONE = Fraction(1)


def solve_nonnegative(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> tuple[Optional[list], Optional[list]]:
    """Feasibility of A x = b, x >= 0.

    Returns (x, None) with an exact feasible point, or (None, y) with an
    exact Farkas ray proving emptiness.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    for row in A:
        if len(row) != n:
            raise DimensionMismatchError("ragged constraint matrix")
    if len(b) != m:
        raise DimensionMismatchError("right-hand side length does not match row count")

    if m == 0:
        return [ZERO] * n, None

    # Flip rows so the right-hand side is nonnegative, then add one artificial
    # variable per row.  Columns: 0..n-1 original, n..n+m-1 artificial, last = rhs.
    flip = [b[i] < 0 for i in range(m)]
    tableau = []
    for i in range(m):
        sign = -1 if flip[i] else 1
        row = [sign * A[i][j] for j in range(n)]
        row += [ONE if k == i else ZERO for k in range(m)]
        row.append(sign * b[i])
        tableau.append(row)
    basis = list(range(n, n + m))

    # Phase-one objective: minimize the artificial sum.  Reduced-cost row for
    # the artificial basis is the negated column sums of the constraint rows.
    width = n + m + 1
    cost = [ZERO] * width
    for j in range(width):
        s = ZERO
        for i in range(m):
            s += tableau[i][j]
        cost[j] = -s
    for k in range(m):
        cost[n + k] = ZERO  # reduced cost of a basic artificial is zero

    while True:
        enter = -1
        for j in range(n + m):
            if cost[j] < 0:
                enter = j  # Bland: smallest eligible index
                break
        if enter < 0:
            break
        leave_row = -1
        best = None
        for i in range(m):
            coef = tableau[i][enter]
            if coef > 0:
                ratio = tableau[i][-1] / coef
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leave_row])
                ):
                    best = ratio
                    leave_row = i
        if leave_row < 0:
            # Phase one is bounded below by zero, so this cannot happen.
            raise InvariantViolationError("unbounded phase-one objective")
        _pivot(tableau, cost, basis, leave_row, enter)

    infeasibility = -cost[-1]
    if infeasibility == 0:
        x = [ZERO] * n
        for i, var in enumerate(basis):
            if var < n:
                x[var] = tableau[i][-1]
        _check_point(A, b, x)
        return x, None

    # Simplex multipliers, read off the artificial columns' reduced costs and
    # mapped back through the row flips.
    y = []
    for i in range(m):
        yi = ONE - cost[n + i]
        y.append(-yi if flip[i] else yi)
    _check_ray(A, b, y)
    return None, y


def _pivot(tableau, cost, basis, row, col) -> None:
    pivot = tableau[row][col]
    tableau[row] = [v / pivot for v in tableau[row]]
    prow = tableau[row]
    for i in range(len(tableau)):
        if i != row and tableau[i][col] != 0:
            coef = tableau[i][col]
            tableau[i] = [v - coef * p for v, p in zip(tableau[i], prow)]
    if cost[col] != 0:
        coef = cost[col]
        for j in range(len(cost)):
            cost[j] -= coef * prow[j]
    basis[row] = col


def _check_point(A, b, x) -> None:
    if any(v < 0 for v in x):
        raise InvariantViolationError("simplex returned a negative component")
    for i, row in enumerate(A):
        if sum((c * v for c, v in zip(row, x)), ZERO) != b[i]:
            raise InvariantViolationError("simplex point violates an equality constraint")


def _check_ray(A, b, y) -> None:
    n = len(A[0]) if A else 0
    for j in range(n):
        if sum((y[i] * A[i][j] for i in range(len(A))), ZERO) > 0:
            raise InvariantViolationError("Farkas ray has a positive column product")
    if sum((yi * bi for yi, bi in zip(y, b)), ZERO) <= 0:
        raise InvariantViolationError("Farkas ray does not separate the right-hand side")
