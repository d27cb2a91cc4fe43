"""Exhaustive feasibility oracles by basic-solution enumeration.

Deliberately independent of the simplex kernel: the question "is there a
nonnegative solution of A x = b" is answered by enumerating candidate bases
(column subsets of size rank A) and solving each square system by Gaussian
elimination.  A nonempty polyhedron {x >= 0, A x = b} is pointed, so it is
nonempty exactly when one of these basic solutions is nonnegative.  Only
meant for small instances; cost grows combinatorially.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .errors import DomainError
from .family import MarginalFamily
from .measure import RationalMeasure

ZERO = Fraction(0)


def _row_reduce(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
    """Reduce [A | b] to row echelon form.

    Returns (reduced_rows, reduced_rhs, rank) or None when a zero row of A
    meets a nonzero right-hand side (b outside the column span: infeasible).
    """
    rows = [list(row) + [rhs] for row, rhs in zip(A, b)]
    m = len(rows)
    n = len(A[0]) if m else 0
    rank = 0
    for col in range(n):
        pivot = None
        for i in range(rank, m):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank][col]
        rows[rank] = [v / head for v in rows[rank]]
        for i in range(m):
            if i != rank and rows[i][col] != 0:
                coef = rows[i][col]
                rows[i] = [v - coef * p for v, p in zip(rows[i], rows[rank])]
        rank += 1
        if rank == m:
            break
    for i in range(rank, m):
        if rows[i][-1] != 0:
            return None
    reduced = [row[:-1] for row in rows[:rank]]
    rhs = [row[-1] for row in rows[:rank]]
    return reduced, rhs, rank


def _solve_square(A_cols: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve the r x r system given by columns A_cols; None if singular."""
    r = len(rhs)
    rows = [[A_cols[j][i] for j in range(r)] + [rhs[i]] for i in range(r)]
    for col in range(r):
        pivot = None
        for i in range(col, r):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        head = rows[col][col]
        rows[col] = [v / head for v in rows[col]]
        for i in range(r):
            if i != col and rows[i][col] != 0:
                coef = rows[i][col]
                rows[i] = [v - coef * p for v, p in zip(rows[i], rows[col])]
    return [rows[i][-1] for i in range(r)]


def nonnegative_system_feasible(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> bool:
    """Exhaustively decide whether A x = b admits x >= 0."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return True
    reduced = _row_reduce(A, b)
    if reduced is None:
        return False
    R, c, rank = reduced
    if rank == 0:
        return all(v == 0 for v in c)
    columns = [[R[i][j] for i in range(rank)] for j in range(n)]
    for subset in combinations(range(n), rank):
        solution = _solve_square([columns[j] for j in subset], c)
        if solution is not None and all(v >= 0 for v in solution):
            return True
    return False


def _family_system(fam: MarginalFamily):
    full = fam.full_product()
    atoms = full.atoms
    rows = []
    rhs = []
    for coords, nu in fam.members:
        proj = full.projector(coords)
        member_atoms = nu.space.atoms
        index = {a: k for k, a in enumerate(member_atoms)}
        block = [[ZERO] * len(atoms) for _ in member_atoms]
        for j, atom in enumerate(atoms):
            block[index[proj(atom)]][j] = Fraction(1)
        rows.extend(block)
        rhs.extend(nu(a) for a in member_atoms)
    return rows, rhs, atoms


def positive_marginal_feasible(fam: MarginalFamily, atom_cap: int = 12) -> bool:
    """Brute-force verdict for the positive marginal problem."""
    rows, rhs, atoms = _family_system(fam)
    if len(atoms) > atom_cap:
        raise DomainError(f"joint space has {len(atoms)} atoms, oracle cap is {atom_cap}")
    return nonnegative_system_feasible(rows, rhs)


def bounded_marginal_feasible(
    fam: MarginalFamily,
    lower: RationalMeasure,
    upper: RationalMeasure,
    atom_cap: int = 8,
) -> bool:
    """Brute-force verdict for the bounded problem via the slack embedding."""
    rows, rhs, atoms = _family_system(fam)
    n = len(atoms)
    if n > atom_cap:
        raise DomainError(f"joint space has {n} atoms, oracle cap is {atom_cap}")
    for atom in atoms:
        if lower(atom) > upper(atom):
            raise DomainError(f"lower bound exceeds upper bound at atom {atom!r}")
    A = [list(row) + [ZERO] * n for row in rows]
    b = [
        rhs[i] - sum((rows[i][j] * lower(atoms[j]) for j in range(n)), ZERO)
        for i in range(len(rows))
    ]
    for j in range(n):
        box = [ZERO] * (2 * n)
        box[j] = Fraction(1)
        box[n + j] = Fraction(1)
        A.append(box)
        b.append(upper(atoms[j]) - lower(atoms[j]))
    return nonnegative_system_feasible(A, b)
