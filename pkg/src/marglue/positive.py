"""The restricted marginal problem: bounded and positive joint feasibility.

Feasibility is decided exactly by the rational phase-one kernel over one
variable per joint atom, with the prescribed marginals as equality rows and
bounds as box rows.  An infeasible verdict is never an exception: it is a
value carrying a dual certificate, one test function per member, whose
defining inequality

    sum_T integral(g_T d nu_T)  <=  integral((sum g~_T)^+ d upper)
                                    - integral((sum g~_T)^- d lower)

fails with lhs > rhs.  Certificates can be audited from scratch with
``verify_certificate`` independently of the solver that produced them.

Families whose member sets admit a running-intersection order ("decomposable")
also get a direct constructive path: sequential conditional-product gluing,
which produces a positive joint without touching the feasibility kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    ConsistencyError,
    CoordinateMismatchError,
    DomainError,
    EliminationOrderError,
    InvariantViolationError,
)
from .family import MarginalFamily, check_pairwise_consistency, solve_signed
from .measure import (
    Coord,
    CoordTuple,
    ProductSpace,
    RationalMeasure,
    as_coordinate_measure,
    coordset,
    marginalize,
    tensor,
    uniform_probability,
    variation,
    zero_measure,
)
from .simplex import solve_nonnegative

ZERO = Fraction(0)

EXHAUSTIVE_ORDER_CAP = 8


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Test functions (g_T) violating the dual inequality: lhs > rhs.

    ``functions`` maps each member coordinate set to a rational function on
    that member's atoms.  ``lhs`` and ``rhs`` are the two sides as computed
    against the instance the certificate was issued for; both can be
    recomputed from scratch via :func:`verify_certificate`.
    """

    functions: dict
    lhs: Fraction
    rhs: Fraction


@dataclass(frozen=True)
class Feasible:
    measure: RationalMeasure


@dataclass(frozen=True)
class Infeasible:
    certificate: DualCertificate


Verdict = Union[Feasible, Infeasible]


@dataclass(frozen=True)
class EliminationOrder:
    """A member order with the running-intersection property.

    ``witnesses[j]`` is the index i < j of a predecessor containing the
    intersection of member j with the union of all predecessors; the first
    entry is None.
    """

    order: tuple
    witnesses: tuple


def lift(g: Mapping, member_space: ProductSpace, full_space: ProductSpace) -> dict:
    """Compose a function on a member space with the projection from the full space."""
    proj = full_space.projector(member_space.coords)
    for atom in g:
        if atom not in member_space:
            raise CoordinateMismatchError(f"atom {atom!r} not in member space")
    return {b: g.get(proj(b), ZERO) for b in full_space.atoms}


def _certificate_sides(
    functions: Mapping,
    fam: MarginalFamily,
    lower: Optional[RationalMeasure],
    upper: Optional[RationalMeasure],
) -> tuple[Fraction, Optional[Fraction]]:
    """Recompute (lhs, rhs) of the dual inequality; rhs None means +infinity."""
    full = fam.full_product()
    member_sets = set(fam.member_sets)
    lhs = ZERO
    combined = {b: ZERO for b in full.atoms}
    for coords, g in functions.items():
        coords = coordset(coords)
        if coords not in member_sets:
            raise CoordinateMismatchError(f"certificate function for non-member {coords!r}")
        nu = fam.member(coords)
        for atom, value in g.items():
            lhs += value * nu(atom)
        lifted = lift(g, nu.space, full)
        for b in full.atoms:
            combined[b] += lifted[b]
    rhs = ZERO
    for b in full.atoms:
        h = combined[b]
        if h > 0:
            if upper is None:
                return lhs, None
            rhs += h * upper(b)
        elif h < 0:
            low = ZERO if lower is None else lower(b)
            rhs += h * low  # equals -(h^-) * lower
    return lhs, rhs


def verify_certificate(
    cert: DualCertificate,
    fam: MarginalFamily,
    lower: Optional[RationalMeasure],
    upper: Optional[RationalMeasure],
) -> bool:
    """Audit a certificate from scratch against the given instance.

    ``lower`` None means the zero lower bound, ``upper`` None means no upper
    bound (the positive problem); in the latter case the combined lifted
    function must have no positive part, otherwise nothing is certified.
    """
    lhs, rhs = _certificate_sides(cert.functions, fam, lower, upper)
    if rhs is None:
        return False
    return lhs > rhs


def _marginal_rows(fam: MarginalFamily, full: ProductSpace):
    """Equality rows: one per (member, member atom); columns are joint atoms."""
    rows = []
    rhs = []
    tags = []
    atoms = full.atoms
    for coords, nu in fam.members:
        proj = full.projector(coords)
        member_atoms = nu.space.atoms
        index = {a: k for k, a in enumerate(member_atoms)}
        block = [[ZERO] * len(atoms) for _ in member_atoms]
        for j, b in enumerate(atoms):
            block[index[proj(b)]][j] = Fraction(1)
        for k, a in enumerate(member_atoms):
            rows.append(block[k])
            rhs.append(nu(a))
            tags.append((coords, a))
    return rows, rhs, tags


def _certificate_from_ray(
    fam: MarginalFamily,
    tags: Sequence[tuple],
    ray: Sequence[Fraction],
    lower: Optional[RationalMeasure],
    upper: Optional[RationalMeasure],
) -> DualCertificate:
    functions: dict = {coords: {} for coords, _ in fam.members}
    for (coords, atom), value in zip(tags, ray):
        if value != 0:
            functions[coords][atom] = value
    lhs, rhs = _certificate_sides(functions, fam, lower, upper)
    if rhs is None or lhs <= rhs:
        raise InvariantViolationError("Farkas ray did not translate into a valid certificate")
    return DualCertificate(functions, lhs, rhs)


def _inconsistency_certificate(fam: MarginalFamily, violation) -> DualCertificate:
    """Certificate from a violated pair: an indicator against its negative lift."""
    coords_a, coords_b = violation.coords_a, violation.coords_b
    if violation.value_a < violation.value_b:
        coords_a, coords_b = coords_b, coords_a
    shared = coordset(set(coords_a) & set(coords_b))
    atom = violation.atom

    def indicator(coords):
        space = fam.member(coords).space
        proj = space.projector(shared)
        return {a: Fraction(1) for a in space.atoms if proj(a) == atom}

    functions = {coords: {} for coords, _ in fam.members}
    functions[coords_a] = indicator(coords_a)
    functions[coords_b] = {a: Fraction(-1) for a in indicator(coords_b)}
    lhs, rhs = _certificate_sides(functions, fam, None, None)
    if rhs is None or lhs <= rhs:
        raise InvariantViolationError("inconsistency did not yield a certificate")
    return DualCertificate(functions, lhs, rhs)


def solve_bounded(
    fam: MarginalFamily, lower: RationalMeasure, upper: RationalMeasure
) -> Verdict:
    """Decide existence of a joint nu with lower <= nu <= upper and all marginals.

    Returns Feasible with an exact witness, or Infeasible with a certificate
    that passes :func:`verify_certificate` against the same bounds.
    """
    full = fam.full_product()
    if lower.space != full or upper.space != full:
        raise CoordinateMismatchError("bounds must live on the full product space")
    atoms = full.atoms
    for b in atoms:
        if lower(b) > upper(b):
            raise DomainError(f"lower bound exceeds upper bound at atom {b!r}")

    rows, rhs, tags = _marginal_rows(fam, full)
    n = len(atoms)
    m = len(rows)
    # Shift to y = nu - lower, then add box rows y_b + s_b = upper_b - lower_b.
    shifted_rhs = []
    for i in range(m):
        correction = sum((rows[i][j] * lower(atoms[j]) for j in range(n)), ZERO)
        shifted_rhs.append(rhs[i] - correction)
    width = 2 * n
    A = [row + [ZERO] * n for row in rows]
    b_vec = list(shifted_rhs)
    for j in range(n):
        box = [ZERO] * width
        box[j] = Fraction(1)
        box[n + j] = Fraction(1)
        A.append(box)
        b_vec.append(upper(atoms[j]) - lower(atoms[j]))

    point, ray = solve_nonnegative(A, b_vec)
    if point is not None:
        weights = {atoms[j]: point[j] + lower(atoms[j]) for j in range(n)}
        nu = RationalMeasure(full, weights)
        _audit_bounded_witness(fam, nu, lower, upper)
        return Feasible(nu)
    return Infeasible(_certificate_from_ray(fam, tags, ray[:m], lower, upper))


def _audit_bounded_witness(fam, nu, lower, upper) -> None:
    for atom in nu.space.atoms:
        if not lower(atom) <= nu(atom) <= upper(atom):
            raise InvariantViolationError("witness violates its box bounds")
    for coords, member in fam.members:
        if marginalize(nu, coords) != member:
            raise InvariantViolationError("witness violates a marginal constraint")


def solve_positive(fam: MarginalFamily) -> Verdict:
    """Decide existence of a positive joint with the prescribed marginals.

    Pairwise consistency is necessary and is checked first; a violated pair
    already yields a certificate.  Otherwise the nonnegative feasibility
    system is solved exactly.  Certificates verify against the zero lower
    bound with no upper bound.
    """
    violations = check_pairwise_consistency(fam)
    if violations:
        return Infeasible(_inconsistency_certificate(fam, violations[0]))
    full = fam.full_product()
    rows, rhs, tags = _marginal_rows(fam, full)
    point, ray = solve_nonnegative(rows, rhs)
    if point is not None:
        atoms = full.atoms
        nu = RationalMeasure(full, {atoms[j]: point[j] for j in range(len(atoms))})
        for coords, member in fam.members:
            if marginalize(nu, coords) != member:
                raise InvariantViolationError("witness violates a marginal constraint")
        return Feasible(nu)
    return Infeasible(_certificate_from_ray(fam, tags, ray, None, None))


def solve_positive_via_variation(
    fam: MarginalFamily, refs: Optional[Mapping] = None
) -> Verdict:
    """Positive feasibility routed through the signed construction.

    Builds the signed solution, takes its variation as the upper bound, and
    solves the bounded problem between zero and that variation.  Exposed for
    cross-checking against :func:`solve_positive`.

    The variation bound can be strictly tighter than the positive problem:
    there are decomposable consistent positive families (for example two
    disjoint binary marginals (1/8, 7/8) under uniform references) where this
    route returns Infeasible although a positive joint exists.  An Infeasible
    verdict here certifies only the bounded instance it solved.
    """
    violations = check_pairwise_consistency(fam)
    if violations:
        return Infeasible(_inconsistency_certificate(fam, violations[0]))
    signed = solve_signed(fam, refs=refs)
    upper = variation(signed)
    lower = zero_measure(fam.full_product())
    return solve_bounded(fam, lower, upper)


def _running_intersection_witnesses(sets: Sequence[frozenset], order: Sequence[int]):
    """Witness indices for the order, or None where the property fails."""
    witnesses = [None]
    union = set(sets[order[0]])
    for pos in range(1, len(order)):
        current = sets[order[pos]]
        shared = current & union
        witness = None
        for prev in range(pos):
            if shared <= sets[order[prev]]:
                witness = prev
                break
        if witness is None:
            return None
        witnesses.append(witness)
        union |= current
    return witnesses


def check_elimination_order(
    member_sets: Sequence[Iterable[Coord]], order: EliminationOrder
) -> bool:
    """Machine-check that an order is a running-intersection permutation."""
    sets = [frozenset(s) for s in member_sets]
    keys = [coordset(s) for s in member_sets]
    if sorted(order.order) != sorted(keys):
        return False
    try:
        positions = [keys.index(coordset(t)) for t in order.order]
    except ValueError:
        return False
    witnesses = _running_intersection_witnesses(sets, positions)
    if witnesses is None:
        return False
    return tuple(witnesses) == tuple(order.witnesses)


def is_decomposable(member_sets: Sequence[Iterable[Coord]]) -> Optional[EliminationOrder]:
    """Find a running-intersection order for the member sets, if one exists.

    Greedy ear removal decides the question; below a small size cap a failed
    greedy pass falls back to exhaustive permutation search as insurance.
    """
    keys = [coordset(s) for s in member_sets]
    if len(set(keys)) != len(keys):
        raise DomainError("member sets must be pairwise distinct")
    sets = [frozenset(k) for k in keys]
    k = len(sets)
    if k == 0:
        return EliminationOrder((), ())
    remaining = list(range(k))
    removal: list = []
    while len(remaining) > 1:
        ear = None
        for i in remaining:
            rest = [j for j in remaining if j != i]
            shared = sets[i] & frozenset().union(*(sets[j] for j in rest))
            if any(shared <= sets[j] for j in rest):
                ear = i
                break
        if ear is None:
            break
        remaining.remove(ear)
        removal.append(ear)
    if len(remaining) == 1:
        positions = remaining + removal[::-1]
        witnesses = _running_intersection_witnesses(sets, positions)
        if witnesses is None:
            raise InvariantViolationError("ear removal produced a non-RIP order")
        return EliminationOrder(
            tuple(keys[i] for i in positions), tuple(witnesses)
        )
    if k <= EXHAUSTIVE_ORDER_CAP:
        for perm in permutations(range(k)):
            witnesses = _running_intersection_witnesses(sets, perm)
            if witnesses is not None:
                return EliminationOrder(tuple(keys[i] for i in perm), tuple(witnesses))
    return None


def glue_decomposable(fam: MarginalFamily, order: EliminationOrder) -> RationalMeasure:
    """Sequential conditional-product gluing along a running-intersection order.

    Joins the members in order: the current joint on coordinates C is extended
    by the next member across their overlap O via

        new(w) = current(w|_C) * member(w|_T) / overlap_mass(w|_O),

    with the zero extension on overlap atoms of mass zero.  Coordinates
    untouched by any member are tensored in with their uniform probability
    reference.  All prescribed marginals match exactly.
    """
    if not check_elimination_order(fam.member_sets, order):
        raise EliminationOrderError("order is not a valid running-intersection permutation")
    violations = check_pairwise_consistency(fam)
    if violations:
        raise ConsistencyError(violations)
    for coords, nu in fam.members:
        if not nu.is_positive:
            raise DomainError(f"member {coords!r} is not positive")

    if not fam.members:
        current = RationalMeasure(ProductSpace({}), {(): Fraction(1)})
    else:
        current = fam.member(order.order[0])
        for coords in order.order[1:]:
            current = _glue_step(current, fam.member(coords))

    covered = set(current.space.coords)
    for c in fam.index_set:
        if c not in covered:
            current = tensor(current, as_coordinate_measure(c, uniform_probability(fam.spaces[c])))

    for coords, nu in fam.members:
        if marginalize(current, coords) != nu:
            raise InvariantViolationError("glued joint fails a prescribed marginal")
    return current


def _glue_step(current: RationalMeasure, member: RationalMeasure) -> RationalMeasure:
    """One conditional-product extension across the overlap of the coordinate sets."""
    c_coords = current.space.coords
    t_coords = member.space.coords
    overlap = coordset(set(c_coords) & set(t_coords))
    if not set(t_coords) - set(c_coords):
        return current  # member already covered; marginals agree by consistency
    overlap_mass = marginalize(current, overlap)
    proj_c = current.space.projector(overlap)
    proj_t = member.space.projector(overlap)

    by_overlap: dict = {}
    for atom_t, w_t in member.weights.items():
        by_overlap.setdefault(proj_t(atom_t), []).append((atom_t, w_t))

    merged_coords = coordset(set(c_coords) | set(t_coords))
    factors = dict(current.space.factors)
    factors.update(dict(member.space.factors))
    target = ProductSpace({c: factors[c] for c in merged_coords})
    pos_c = {c: i for i, c in enumerate(c_coords)}
    pos_t = {c: i for i, c in enumerate(t_coords)}

    weights = {}
    for atom_c, w_c in current.weights.items():
        key = proj_c(atom_c)
        mass = overlap_mass(key)
        if mass == 0:
            continue  # positive current implies w_c == 0 here; zero extension
        for atom_t, w_t in by_overlap.get(key, ()):
            joined = tuple(
                atom_c[pos_c[c]] if c in pos_c else atom_t[pos_t[c]] for c in merged_coords
            )
            weights[joined] = w_c * w_t / mass
    return RationalMeasure(target, weights)
