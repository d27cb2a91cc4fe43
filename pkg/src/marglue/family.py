"""Marginal families and the unrestricted (signed) marginal problem.

A family prescribes one measure per member coordinate set.  Pairwise
consistency -- any two prescribed marginals agree on their coordinate
intersection -- is exactly the solvable case for signed joints, and the
solver below realizes the explicit inclusion-exclusion construction

    nu = sum over nonempty S subset of the members of
         (-1)^(|S|-1) * (common marginal on the intersection of S)
                        tensor (reference product on the rest).

The number of summands is exponential in the member count, so the solver
refuses families above a configurable cap instead of silently blowing up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    ConsistencyError,
    CoordinateMismatchError,
    DomainError,
    FamilyTooLargeError,
    InvariantViolationError,
)
from .measure import (
    Coord,
    CoordTuple,
    FiniteSpace,
    ProductSpace,
    RationalMeasure,
    as_coordinate_measure,
    coordset,
    marginalize,
    tensor,
    uniform_probability,
    zero_measure,
)

DEFAULT_MEMBER_CAP = 16


@dataclass(frozen=True)
class ConsistencyViolation:
    """Two members whose marginals differ, with the first atom where they do."""

    coords_a: CoordTuple
    coords_b: CoordTuple
    atom: tuple
    value_a: Fraction
    value_b: Fraction

    def __str__(self) -> str:
        return (
            f"members {self.coords_a!r} and {self.coords_b!r} disagree at atom "
            f"{self.atom!r}: {self.value_a} != {self.value_b}"
        )


@dataclass(frozen=True, eq=False)
class MarginalFamily:
    """An index family of coordinate sets with one prescribed measure each."""

    index_set: CoordTuple
    spaces: dict
    members: tuple  # tuple of (CoordTuple, RationalMeasure)

    def __init__(
        self,
        spaces: Mapping[Coord, FiniteSpace],
        members: Iterable[tuple],
    ):
        spaces = dict(spaces)
        index_set = coordset(spaces)
        normalized = []
        seen = set()
        for coords, nu in members:
            coords = coordset(coords)
            if coords in seen:
                raise DomainError(f"duplicate member coordinate set {coords!r}")
            seen.add(coords)
            unknown = [c for c in coords if c not in spaces]
            if unknown:
                raise CoordinateMismatchError(
                    f"member {coords!r} uses unknown coordinates {unknown!r}"
                )
            expected = ProductSpace({c: spaces[c] for c in coords})
            if nu.space != expected:
                raise CoordinateMismatchError(
                    f"member measure for {coords!r} lives on the wrong space"
                )
            normalized.append((coords, nu))
        object.__setattr__(self, "index_set", index_set)
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "members", tuple(normalized))

    @property
    def member_sets(self) -> tuple:
        return tuple(coords for coords, _ in self.members)

    def member(self, coords: Iterable[Coord]) -> RationalMeasure:
        key = coordset(coords)
        for c, nu in self.members:
            if c == key:
                return nu
        raise CoordinateMismatchError(f"{key!r} is not a member of the family")

    def full_product(self) -> ProductSpace:
        return ProductSpace(self.spaces)

    def all_members_positive(self) -> bool:
        return all(nu.is_positive for _, nu in self.members)


def check_pairwise_consistency(fam: MarginalFamily) -> tuple:
    """Compare every unordered member pair on its coordinate intersection.

    Returns a tuple of ConsistencyViolation records; empty means consistent.
    The empty-intersection case reduces to total-mass equality.
    """
    violations = []
    for i in range(len(fam.members)):
        coords_a, nu_a = fam.members[i]
        for j in range(i + 1, len(fam.members)):
            coords_b, nu_b = fam.members[j]
            shared = coordset(set(coords_a) & set(coords_b))
            marg_a = marginalize(nu_a, shared)
            marg_b = marginalize(nu_b, shared)
            for atom in marg_a.space.atoms:
                if marg_a(atom) != marg_b(atom):
                    violations.append(
                        ConsistencyViolation(coords_a, coords_b, atom, marg_a(atom), marg_b(atom))
                    )
                    break
    return tuple(violations)


def common_marginal(fam: MarginalFamily, subsets: Sequence[Iterable[Coord]]) -> RationalMeasure:
    """The shared marginal on the intersection of the given members.

    All members of ``subsets`` must belong to the family, which must be
    pairwise consistent (otherwise the common marginal is ill-defined and a
    ConsistencyError carrying the violations is raised).
    """
    keys = [coordset(s) for s in subsets]
    if not keys:
        raise DomainError("common_marginal needs a nonempty collection of members")
    member_sets = set(fam.member_sets)
    for k in keys:
        if k not in member_sets:
            raise CoordinateMismatchError(f"{k!r} is not a member of the family")
    violations = check_pairwise_consistency(fam)
    if violations:
        raise ConsistencyError(violations)
    meet = set(keys[0])
    for k in keys[1:]:
        meet &= set(k)
    return marginalize(fam.member(keys[0]), coordset(meet))


def default_references(fam: MarginalFamily) -> dict:
    """Uniform probability reference measure on each coordinate's space."""
    return {c: uniform_probability(fam.spaces[c]) for c in fam.index_set}


def _validate_references(fam: MarginalFamily, refs: Mapping) -> dict:
    out = {}
    for c in fam.index_set:
        if c not in refs:
            raise DomainError(f"missing reference measure for coordinate {c!r}")
        mu = refs[c]
        if mu.space != fam.spaces[c]:
            raise CoordinateMismatchError(f"reference for {c!r} lives on the wrong space")
        if any(mu(a) <= 0 for a in mu.space.atoms):
            raise DomainError(f"reference for {c!r} must be strictly positive")
        if mu.mass != 1:
            raise DomainError(f"reference for {c!r} must have total mass 1")
        out[c] = mu
    return out


def solve_signed(
    fam: MarginalFamily,
    refs: Optional[Mapping] = None,
    member_cap: int = DEFAULT_MEMBER_CAP,
) -> RationalMeasure:
    """Construct a signed measure on the full product matching every member.

    Inclusion-exclusion over all nonempty subfamilies; the references default
    to the uniform probability on each coordinate.  Raises ConsistencyError
    when the family is not pairwise consistent (the formula would silently
    produce wrong marginals), and FamilyTooLargeError above the member cap.
    """
    k = len(fam.members)
    if k > member_cap:
        raise FamilyTooLargeError(f"family has {k} members, cap is {member_cap}")
    violations = check_pairwise_consistency(fam)
    if violations:
        raise ConsistencyError(violations)
    full = fam.full_product()
    if len(full.atoms) == 0:
        # The only measure on an empty product is zero; solvable iff every
        # prescribed marginal is zero (no probability reference exists here).
        if any(nu.weights for _, nu in fam.members):
            raise DomainError(
                "some coordinate space is empty but a member prescribes nonzero mass"
            )
        return zero_measure(full)
    refs = default_references(fam) if refs is None else _validate_references(fam, refs)

    member_sets = [frozenset(coords) for coords, _ in fam.members]
    # Group the 2^k - 1 subfamilies by their intersection; only the signed
    # count per distinct intersection matters.
    coefficients: dict = {}
    for mask in range(1, 1 << k):
        meet = None
        for i in range(k):
            if mask >> i & 1:
                meet = member_sets[i] if meet is None else meet & member_sets[i]
        sign = 1 if bin(mask).count("1") % 2 == 1 else -1
        key = coordset(meet)
        coefficients[key] = coefficients.get(key, 0) + sign

    result = zero_measure(full)
    for meet_coords, coeff in sorted(coefficients.items()):
        if coeff == 0:
            continue
        carrier = next(coords for coords in fam.member_sets if set(meet_coords) <= set(coords))
        core = marginalize(fam.member(carrier), meet_coords)
        block = core
        for c in fam.index_set:
            if c not in meet_coords:
                block = tensor(block, as_coordinate_measure(c, refs[c]))
        result = result + Fraction(coeff) * block

    for coords, nu in fam.members:
        if marginalize(result, coords) != nu:
            raise InvariantViolationError(
                f"signed construction failed to reproduce the marginal on {coords!r}"
            )
    return result
