"""Seeded random instance generators for tests and the command line.

Every generator takes an integer seed and is fully deterministic given it.
Weight distributions are chosen so the downstream solvers see both verdicts
with healthy frequency; the decomposable generator keeps the master weights
within a bounded skew (numerators 2..6 over denominators 1..2), under which
the variation-bound cross-check route is empirically always feasible (it
provably is not for arbitrarily skewed weights; see the via-variation notes
in positive.py).
"""

from __future__ import annotations

import random
from fractions import Fraction

from .family import MarginalFamily
from .lattice import AtomicL1, LatticeMap, identity_map, is_isometric_embedding, operator_norm
from .measure import (
    AtomMap,
    FiniteSpace,
    ProductSpace,
    RationalMeasure,
    marginalize,
    pushforward,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def _random_spaces(rng, max_coords, max_atoms_per_coord, max_joint_atoms=None):
    while True:
        count = rng.randint(2, max_coords)
        sizes = [rng.randint(2, max_atoms_per_coord) for _ in range(count)]
        joint = 1
        for s in sizes:
            joint *= s
        if max_joint_atoms is None or joint <= max_joint_atoms:
            return {i: FiniteSpace([f"a{k}" for k in range(n)]) for i, n in enumerate(sizes)}


def _random_subsets(rng, coords, max_members, allow_empty=False):
    subsets = []
    attempts = 0
    want = rng.randint(1, max_members)
    while len(subsets) < want and attempts < 60:
        attempts += 1
        if allow_empty and rng.random() < 0.08:
            t = ()
        else:
            t = tuple(sorted(rng.sample(coords, rng.randint(1, len(coords)))))
        if t not in subsets:
            subsets.append(t)
    return subsets


def random_signed_master_family(seed: int) -> MarginalFamily:
    """A pairwise-consistent signed family from a random master measure."""
    rng = random.Random(seed)
    spaces = _random_spaces(rng, max_coords=4, max_atoms_per_coord=4, max_joint_atoms=256)
    prod = ProductSpace(spaces)
    master = RationalMeasure(
        prod,
        {a: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for a in prod.atoms},
    )
    subsets = _random_subsets(rng, list(spaces), max_members=5, allow_empty=True)
    return MarginalFamily(spaces, [(t, marginalize(master, t)) for t in subsets])


def random_positive_family(seed: int, max_joint_atoms: int = 12) -> MarginalFamily:
    """A positive family on a small joint space; feasibility is a coin toss."""
    rng = random.Random(seed)
    spaces = _random_spaces(rng, 3, 3, max_joint_atoms)
    coords = list(spaces)
    subsets = _random_subsets(rng, coords, max_members=3)
    if rng.random() < 0.5:
        prod = ProductSpace(spaces)
        master = RationalMeasure(
            prod, {a: Fraction(rng.randint(0, 4), rng.randint(1, 3)) for a in prod.atoms}
        )
        members = [(t, marginalize(master, t)) for t in subsets]
    else:
        members = []
        for t in subsets:
            prod = ProductSpace({c: spaces[c] for c in t})
            weights = {
                a: Fraction(rng.randint(0, 3), rng.randint(1, 2)) for a in prod.atoms
            }
            nu = RationalMeasure(prod, weights)
            if rng.random() < 0.5 and nu.mass > 0:
                nu = (ONE / nu.mass) * nu
            members.append((t, nu))
    return MarginalFamily(spaces, members)


def random_decomposable_sets(rng, coords) -> list:
    """Member sets built along a running-intersection order, hence decomposable."""
    want = rng.randint(1, 5)
    sets: list = []
    union: set = set()
    attempts = 0
    while len(sets) < want and attempts < 60:
        attempts += 1
        if not sets:
            t = tuple(sorted(rng.sample(coords, rng.randint(1, len(coords)))))
        else:
            witness = set(rng.choice(sets))
            overlap = set(rng.sample(sorted(witness), rng.randint(0, len(witness))))
            fresh_pool = [c for c in coords if c not in union]
            fresh = set(rng.sample(fresh_pool, rng.randint(0, len(fresh_pool))))
            t = tuple(sorted(overlap | fresh))
            if not t:
                continue
        if t in sets:
            continue
        sets.append(t)
        union |= set(t)
    return sets


def random_decomposable_positive_family(seed: int) -> MarginalFamily:
    """Consistent positive family with decomposable member sets, bounded skew."""
    rng = random.Random(seed)
    spaces = _random_spaces(rng, 3, 3, max_joint_atoms=12)
    prod = ProductSpace(spaces)
    master = RationalMeasure(
        prod, {a: Fraction(rng.randint(2, 6), rng.randint(1, 2)) for a in prod.atoms}
    )
    sets = random_decomposable_sets(rng, list(spaces))
    return MarginalFamily(spaces, [(t, marginalize(master, t)) for t in sets])


def random_inconsistent_family(seed: int) -> MarginalFamily:
    """A family made inconsistent by a single-atom perturbation."""
    rng = random.Random(seed)
    spaces = _random_spaces(rng, 3, 3, max_joint_atoms=12)
    prod = ProductSpace(spaces)
    master = RationalMeasure(
        prod, {a: Fraction(rng.randint(1, 4), rng.randint(1, 2)) for a in prod.atoms}
    )
    coords = list(spaces)
    subsets = []
    while len(subsets) < 2:
        t = tuple(sorted(rng.sample(coords, rng.randint(1, len(coords)))))
        if t not in subsets:
            subsets.append(t)
    members = []
    for i, t in enumerate(subsets):
        nu = marginalize(master, t)
        if i == 0:
            atom = rng.choice(nu.space.atoms)
            bump = dict(nu.weights)
            bump[atom] = bump.get(atom, ZERO) + Fraction(1, 3)
            nu = RationalMeasure(nu.space, bump)
        members.append((t, nu))
    return MarginalFamily(spaces, members)


def random_map_amalgamation(seed: int, max_atoms: int = 6):
    """(nu0, nu1, nu2, f1, f2) with both maps measure-preserving, spaces <= max_atoms."""
    rng = random.Random(seed)
    n0 = rng.randint(1, 3)
    base = FiniteSpace([f"z{i}" for i in range(n0)])

    def tower(prefix):
        n = rng.randint(n0, max_atoms)
        up = FiniteSpace([f"{prefix}{i}" for i in range(n)])
        image = {}
        for i, atom in enumerate(up.atoms):
            image[atom] = base.atoms[i] if i < n0 else rng.choice(base.atoms)
        return AtomMap(up, base, image)

    f1 = tower("x")
    nu1 = RationalMeasure(
        f1.source,
        {a: Fraction(rng.randint(0, 4), rng.randint(1, 3)) for a in f1.source.atoms},
    )
    nu0 = pushforward(f1, nu1)

    f2 = tower("y")
    fibers: dict = {}
    for atom in f2.source.atoms:
        fibers.setdefault(f2.image[atom], []).append(atom)
    weights2 = {}
    for z, members in fibers.items():
        total = nu0(z)
        cuts = sorted(rng.randint(0, 8) for _ in range(len(members) - 1))
        bounds = [0] + cuts + [8]
        for atom, lo, hi in zip(members, bounds, bounds[1:]):
            weights2[atom] = total * Fraction(hi - lo, 8)
    nu2 = RationalMeasure(f2.source, weights2)
    return nu0, nu1, nu2, f1, f2


def random_source_lattice(seed_or_rng, max_atoms: int = 3) -> AtomicL1:
    rng = seed_or_rng if isinstance(seed_or_rng, random.Random) else random.Random(seed_or_rng)
    n = rng.randint(1, max_atoms)
    return AtomicL1(
        [f"e{i}" for i in range(n)],
        [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(n)],
    )


def random_isometric_embedding(
    rng: random.Random, source: AtomicL1, max_target_atoms: int = 6
) -> LatticeMap:
    """Compose random splittings, rescalings, relabelings, and paddings.

    The splitting and relabeling steps are the mass-preserving primitives;
    rescaling (a one-to-one column with a non-unit entry) and padding (an
    unhit target atom) are also isometric embeddings and exercise the tilt
    and complement paths of the L1 amalgamation.
    """
    current = identity_map(source)
    for _ in range(rng.randint(1, 3)):
        space = current.target
        kind = rng.choice(["split", "scale", "relabel", "pad"])
        atoms = list(space.atoms)
        weights = list(space.weights)
        if kind == "split" and space.dim and space.dim < max_target_atoms:
            j = rng.randrange(space.dim)
            w = weights[j]
            frac = Fraction(rng.randint(1, 7), 8)
            new_atoms = atoms[:j] + [atoms[j] + "L", atoms[j] + "R"] + atoms[j + 1:]
            new_weights = weights[:j] + [w * frac, w * (1 - frac)] + weights[j + 1:]
            sources = list(range(j)) + [j, j] + list(range(j + 1, space.dim))
            rows = []
            for src in sources:
                row = [ZERO] * space.dim
                row[src] = ONE
                rows.append(row)
            step = LatticeMap(space, AtomicL1(new_atoms, new_weights), rows)
        elif kind == "scale" and space.dim:
            j = rng.randrange(space.dim)
            factor = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            new_weights = list(weights)
            new_weights[j] = weights[j] / factor
            rows = []
            for i in range(space.dim):
                row = [ZERO] * space.dim
                row[i] = factor if i == j else ONE
                rows.append(row)
            step = LatticeMap(space, AtomicL1(atoms, new_weights), rows)
        elif kind == "relabel" and space.dim:
            perm = list(range(space.dim))
            rng.shuffle(perm)
            rows = []
            for p in perm:
                row = [ZERO] * space.dim
                row[p] = ONE
                rows.append(row)
            step = LatticeMap(
                space, AtomicL1([atoms[p] for p in perm], [weights[p] for p in perm]), rows
            )
        elif space.dim < max_target_atoms:
            extra = f"pad{rng.randint(0, 999)}"
            while extra in atoms:
                extra = f"pad{rng.randint(0, 999)}"
            rows = [
                [ONE if i == j else ZERO for j in range(space.dim)]
                for i in range(space.dim)
            ]
            rows.append([ZERO] * space.dim)
            step = LatticeMap(
                space,
                AtomicL1(atoms + [extra], weights + [Fraction(rng.randint(1, 3))]),
                rows,
            )
        else:
            continue
        current = step @ current
    ok, _ = is_isometric_embedding(current)
    if not ok:
        raise AssertionError("generator produced a non-embedding")
    return current


def random_l1_embedding_pair(seed: int):
    rng = random.Random(seed)
    source = random_source_lattice(rng)
    u1 = random_isometric_embedding(rng, source)
    u2 = random_isometric_embedding(rng, source)
    return u1, u2


def random_norm_one_homomorphism(rng, source: AtomicL1, target: AtomicL1) -> LatticeMap:
    rows = []
    for _ in range(target.dim):
        row = [ZERO] * source.dim
        if source.dim and rng.random() < 0.8:
            row[rng.randrange(source.dim)] = Fraction(rng.randint(0, 4), rng.randint(1, 3))
        rows.append(row)
    m = LatticeMap(source, target, rows)
    norm = operator_norm(m)
    if norm > 1:
        m = LatticeMap(source, target, [[v / norm for v in row] for row in rows])
    return m


def random_positive_unit(rng, space: AtomicL1) -> tuple:
    raw = [Fraction(rng.randint(0, 4)) for _ in range(space.dim)]
    if all(v == 0 for v in raw):
        raw[rng.randrange(space.dim)] = ONE
    total = space.norm(raw)
    return tuple(v / total for v in raw)


def random_square_instance(seed: int):
    """(t1, t2, x1): homomorphism of norm <= 1, embedding, positive unit witness."""
    rng = random.Random(seed)
    x0 = random_source_lattice(rng)
    t2 = random_isometric_embedding(rng, x0)
    dim = rng.randint(1, 4)
    target1 = AtomicL1(
        [f"w{i}" for i in range(dim)],
        [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(dim)],
    )
    t1 = random_norm_one_homomorphism(rng, x0, target1)
    x1 = random_positive_unit(rng, target1)
    return t1, t2, x1
