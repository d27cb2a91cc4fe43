"""Closing a homomorphism/embedding square through L1 quotients and amalgamation.

Input: a lattice homomorphism T1: X0 -> X1 of norm at most one, an isometric
lattice embedding T2: X0 -> X2, and a positive norm-one witness x1 in X1.
Output: an atomic L1 space Z with homomorphisms S1: X1 -> Z and S2: X2 -> Z
such that S1 T1 = S2 T2 exactly, both operator norms are at most one, and
||S1 x1|| = ||x1|| = 1.

The construction: norm x1 with a positive functional x1*, pull it back along
T1 to x0*, extend x0* along T2 by the positive Hahn-Banach step (constructive
at atomic scale), quotient all three spaces by the induced L1 seminorms, and
amalgamate the two induced isometric embeddings between the quotients.  The
degenerate case x0* = 0 collapses the quotient chain but the witness norm
survives through x1* alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .amalgam import L1AmalgamResult, amalgamate_l1
from .errors import InvariantViolationError, PreconditionError
from .lattice import (
    AtomicL1,
    LatticeMap,
    PositiveFunctional,
    extend_positive_functional,
    is_isometric_embedding,
    is_lattice_homomorphism,
    kakutani_quotient,
    norming_functional,
    operator_norm,
    pullback_functional,
)

ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class SquareClosure:
    """The closed square with its audit trail."""

    target: AtomicL1
    s1: LatticeMap
    s2: LatticeMap
    x1_functional: PositiveFunctional
    x0_functional: PositiveFunctional
    x2_functional: PositiveFunctional
    amalgam: L1AmalgamResult


def _restrict(map_: LatticeMap, quot_source: AtomicL1, quot_target: AtomicL1) -> LatticeMap:
    """The induced map between Kakutani quotients (a submatrix)."""
    row_of = {a: i for i, a in enumerate(map_.target.atoms)}
    col_of = {a: j for j, a in enumerate(map_.source.atoms)}
    rows = [
        [map_.matrix[row_of[b]][col_of[a]] for a in quot_source.atoms]
        for b in quot_target.atoms
    ]
    return LatticeMap(quot_source, quot_target, rows)


def close_square(t1: LatticeMap, t2: LatticeMap, x1: Sequence) -> SquareClosure:
    """Close the square over T1 (norm <= 1) and the embedding T2, keeping the witness norm."""
    if t1.source != t2.source:
        raise PreconditionError("T1 and T2 must share their source space")
    ok, witness = is_lattice_homomorphism(t1)
    if not ok:
        raise PreconditionError("T1 is not a lattice homomorphism", witness=witness)
    if operator_norm(t1) > 1:
        raise PreconditionError("T1 must have operator norm at most 1")
    ok, witness = is_isometric_embedding(t2)
    if not ok:
        raise PreconditionError("T2 is not an isometric lattice embedding", witness=witness)
    x1 = t1.target.vector(x1)

    x1_star, _probability = norming_functional(t1.target, x1)
    x0_star = pullback_functional(x1_star, t1)
    x2_star = extend_positive_functional(x0_star, t2)

    quot0, psi0 = kakutani_quotient(t1.source, x0_star)
    quot1, psi1 = kakutani_quotient(t1.target, x1_star)
    quot2, psi2 = kakutani_quotient(t2.target, x2_star)

    induced1 = _restrict(t1, quot0, quot1)
    induced2 = _restrict(t2, quot0, quot2)
    for name, induced, psi, original in (
        ("T1", induced1, psi1, t1),
        ("T2", induced2, psi2, t2),
    ):
        ok, witness = is_isometric_embedding(induced)
        if not ok:
            raise InvariantViolationError(
                f"induced quotient map of {name} is not an isometric embedding at {witness!r}"
            )
        if (induced @ psi0).matrix != (psi @ original).matrix:
            raise InvariantViolationError(f"quotient square of {name} does not commute")

    amalgam = amalgamate_l1(induced1, induced2)
    s1 = amalgam.v1 @ psi1
    s2 = amalgam.v2 @ psi2

    if (s1 @ t1).matrix != (s2 @ t2).matrix:
        raise InvariantViolationError("the closed square does not commute")
    if operator_norm(s1) > 1 or operator_norm(s2) > 1:
        raise InvariantViolationError("a closing map exceeds norm one")
    if amalgam.target.norm(s1(x1)) != 1:
        raise InvariantViolationError("the witness norm was not preserved")
    return SquareClosure(amalgam.target, s1, s2, x1_star, x0_star, x2_star, amalgam)
