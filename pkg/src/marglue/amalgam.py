"""Amalgamation: closing cospans of measure-preserving maps and L1 embeddings.

Given measure-preserving f1: Omega_1 -> Omega_0 and f2: Omega_2 -> Omega_0,
the coupling space Omega_3 consists of the fiber triples (x0, x1, x2) with
x0 = f1(x1) = f2(x2).  A positive joint with the graph measures of f1, f2 as
marginals is produced constructively -- the prescribed family
{{0},{1},{2},{0,1},{0,2}} is decomposable, so sequential gluing applies --
and its mass is checked to sit entirely on the fiber triples, which makes the
coordinate projections g1, g2 measure-preserving and f1 g1 = f2 g2.

The L1 version reduces a pair of isometric lattice embeddings out of a common
atomic L1 space to that picture: every unital measure-preserving embedding
between atomic L1 spaces is composition with a point map (the rows of its
matrix are unit rows), and a general embedding is turned into one by tilting
the target measure with the image of the constant-one function and dividing
it out.  The amalgam is then the glued block plus the two untouched
complement blocks, assembled as a weighted direct sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    CoordinateMismatchError,
    DomainError,
    InvariantViolationError,
    NotCompositionOperatorError,
    PreconditionError,
)
from .family import MarginalFamily
from .lattice import (
    AtomicL1,
    LatticeMap,
    composition_map,
    is_isometric_embedding,
)
from .measure import (
    AtomMap,
    FiniteSpace,
    RationalMeasure,
    as_coordinate_measure,
    graph_measure,
    is_measure_preserving,
)
from .positive import glue_decomposable, is_decomposable

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class AmalgamResult:
    """The coupling space with its projections and the audit joint."""

    space3: FiniteSpace
    nu3: RationalMeasure
    g1: AtomMap
    g2: AtomMap
    full_joint: RationalMeasure
    triples: tuple  # (x0, x1, x2) per space3 atom, in atom order


@dataclass(frozen=True, eq=False)
class L1AmalgamResult:
    """Direct-sum amalgam of two isometric lattice embeddings."""

    target: AtomicL1
    v1: LatticeMap
    v2: LatticeMap
    blocks: dict  # block name -> tuple of target atom labels


def _triple_label(triple, used) -> str:
    base = ",".join(triple)
    label = base
    k = 1
    while label in used:
        label = f"{base}#{k}"
        k += 1
    used.add(label)
    return label


def amalgamate_maps(
    nu0: RationalMeasure,
    nu1: RationalMeasure,
    nu2: RationalMeasure,
    f1: AtomMap,
    f2: AtomMap,
) -> AmalgamResult:
    """Close the cospan f1, f2 with measure-preserving projections g1, g2.

    Preconditions: all three measures positive and finite, f1 and f2
    measure-preserving onto nu0.  The joint is produced by decomposable
    gluing, so the output is the canonical conditional-independence coupling.
    """
    for name, nu in (("nu0", nu0), ("nu1", nu1), ("nu2", nu2)):
        if not isinstance(nu.space, FiniteSpace):
            raise CoordinateMismatchError(f"{name} must live on a plain finite space")
        if not nu.is_positive:
            raise DomainError(f"{name} is not positive")
    if f1.source != nu1.space or f1.target != nu0.space:
        raise CoordinateMismatchError("f1 does not map the nu1 space to the nu0 space")
    if f2.source != nu2.space or f2.target != nu0.space:
        raise CoordinateMismatchError("f2 does not map the nu2 space to the nu0 space")
    for name, f, nu in (("f1", f1, nu1), ("f2", f2, nu2)):
        ok, witness = is_measure_preserving(f, nu, nu0)
        if not ok:
            raise PreconditionError(f"{name} is not measure-preserving", witness=witness)

    spaces = {0: nu0.space, 1: nu1.space, 2: nu2.space}
    members = [
        ((0,), as_coordinate_measure(0, nu0)),
        ((1,), as_coordinate_measure(1, nu1)),
        ((2,), as_coordinate_measure(2, nu2)),
        ((0, 1), graph_measure(f1, nu1, (0, 1))),
        ((0, 2), graph_measure(f2, nu2, (0, 2))),
    ]
    fam = MarginalFamily(spaces, members)
    order = is_decomposable(fam.member_sets)
    if order is None:
        raise InvariantViolationError("the amalgamation family must be decomposable")
    joint = glue_decomposable(fam, order)

    fiber = []
    for atom in joint.space.atoms:
        x0, x1, x2 = atom
        if f1.image[x1] == x0 and f2.image[x2] == x0:
            fiber.append(atom)
        elif joint(atom) != 0:
            raise InvariantViolationError(
                f"joint mass {joint(atom)} off the fiber set at {atom!r}"
            )

    used: set = set()
    labels = [_triple_label(t, used) for t in fiber]
    space3 = FiniteSpace(labels)
    nu3 = RationalMeasure(space3, {lab: joint(t) for lab, t in zip(labels, fiber)})
    g1 = AtomMap(space3, nu1.space, {lab: t[1] for lab, t in zip(labels, fiber)})
    g2 = AtomMap(space3, nu2.space, {lab: t[2] for lab, t in zip(labels, fiber)})

    for name, g, nu in (("g1", g1, nu1), ("g2", g2, nu2)):
        ok, witness = is_measure_preserving(g, nu3, nu)
        if not ok:
            raise InvariantViolationError(f"{name} failed to preserve measure at {witness!r}")
    return AmalgamResult(space3, nu3, g1, g2, joint, tuple(fiber))


def extract_iwanik_map(u: LatticeMap) -> AtomMap:
    """Recover the point map f with u(h) = h o f from a composition operator.

    Requires a measure-preserving unital isometric embedding: every matrix
    row must contain exactly one nonzero entry, equal to one.  Returns the
    map from u's target atoms to u's source atoms and verifies it preserves
    the measures.
    """
    ok, witness = is_isometric_embedding(u)
    if not ok:
        raise PreconditionError("not an isometric lattice embedding", witness=witness)
    image = {}
    for i, b in enumerate(u.target.atoms):
        row = u.matrix[i]
        hits = [j for j, v in enumerate(row) if v != 0]
        if not hits:
            raise NotCompositionOperatorError(f"row {b!r} has no nonzero entry")
        if len(hits) > 1 or row[hits[0]] != 1:
            raise NotCompositionOperatorError(f"row {b!r} is not a unit row")
        image[b] = u.source.atoms[hits[0]]
    source_space = FiniteSpace(u.target.atoms)
    target_space = FiniteSpace(u.source.atoms)
    f = AtomMap(source_space, target_space, image)
    nu_src = RationalMeasure(source_space, dict(zip(u.target.atoms, u.target.weights)))
    nu_dst = RationalMeasure(target_space, dict(zip(u.source.atoms, u.source.weights)))
    ok, witness = is_measure_preserving(f, nu_src, nu_dst)
    if not ok:
        raise InvariantViolationError(f"extracted map is not measure-preserving at {witness!r}")
    return f


def _apply_ones(u: LatticeMap) -> tuple:
    return u(u.source.ones())


def amalgamate_l1(u1: LatticeMap, u2: LatticeMap) -> L1AmalgamResult:
    """Amalgamate two isometric lattice embeddings out of one atomic L1 space.

    Executes the reduction to measure-preserving composition operators:
    normalize the common source to a probability, tilt each target by the
    image of the constant-one function, extract the point maps, amalgamate
    those, and assemble the three-block direct sum with the tilt undone.
    """
    if u1.source != u2.source:
        raise PreconditionError("the two embeddings must share their source space")
    for name, u in (("u1", u1), ("u2", u2)):
        ok, witness = is_isometric_embedding(u)
        if not ok:
            raise PreconditionError(f"{name} is not an isometric lattice embedding", witness=witness)

    source = u1.source
    scale = ONE if source.mass == 0 else ONE / source.mass

    ones_images = (_apply_ones(u1), _apply_ones(u2))
    supports = []
    tilted_spaces = []
    tilted_maps = []
    for u, ones in zip((u1, u2), ones_images):
        support = [i for i, v in enumerate(ones) if v > 0]
        atoms = [u.target.atoms[i] for i in support]
        weights = [scale * ones[i] * u.target.weights[i] for i in support]
        tilted = AtomicL1(atoms, weights)
        rows = []
        for i in support:
            rows.append([u.matrix[i][j] / ones[i] for j in range(source.dim)])
        source_scaled = AtomicL1(source.atoms, [scale * w for w in source.weights])
        tilted_maps.append(LatticeMap(source_scaled, tilted, rows))
        tilted_spaces.append(tilted)
        supports.append({u.target.atoms[i] for i in support})

    f1 = extract_iwanik_map(tilted_maps[0])
    f2 = extract_iwanik_map(tilted_maps[1])
    source_scaled = tilted_maps[0].source
    nu0 = RationalMeasure(
        FiniteSpace(source_scaled.atoms), dict(zip(source_scaled.atoms, source_scaled.weights))
    )
    nu1_t = RationalMeasure(f1.source, dict(zip(tilted_spaces[0].atoms, tilted_spaces[0].weights)))
    nu2_t = RationalMeasure(f2.source, dict(zip(tilted_spaces[1].atoms, tilted_spaces[1].weights)))
    amalgam = amalgamate_maps(nu0, nu1_t, nu2_t, f1, f2)

    glued_atoms = ["glue:" + a for a in amalgam.nu3.support]
    glued_weights = [amalgam.nu3(a) / scale for a in amalgam.nu3.support]
    glued = AtomicL1(amalgam.nu3.support, [amalgam.nu3(a) for a in amalgam.nu3.support])
    tilde_v1 = composition_map(amalgam.g1, tilted_spaces[0], glued)
    tilde_v2 = composition_map(amalgam.g2, tilted_spaces[1], glued)

    rest1 = [a for a in u1.target.atoms if a not in supports[0]]
    rest2 = [a for a in u2.target.atoms if a not in supports[1]]
    atoms3 = (
        glued_atoms
        + ["rest1:" + a for a in rest1]
        + ["rest2:" + a for a in rest2]
    )
    weights3 = (
        glued_weights
        + [u1.target.weights[u1.target.index(a)] for a in rest1]
        + [u2.target.weights[u2.target.index(a)] for a in rest2]
    )
    target = AtomicL1(atoms3, weights3)
    blocks = {
        "glued": tuple(glued_atoms),
        "rest1": tuple("rest1:" + a for a in rest1),
        "rest2": tuple("rest2:" + a for a in rest2),
    }

    v1 = _assemble_embedding(u1.target, target, tilde_v1, ones_images[0], supports[0], "rest1:")
    v2 = _assemble_embedding(u2.target, target, tilde_v2, ones_images[1], supports[1], "rest2:")

    for name, v in (("v1", v1), ("v2", v2)):
        ok, witness = is_isometric_embedding(v)
        if not ok:
            raise InvariantViolationError(f"{name} is not an isometric embedding at {witness!r}")
    if (v1 @ u1).matrix != (v2 @ u2).matrix:
        raise InvariantViolationError("the amalgam square does not commute")
    return L1AmalgamResult(target, v1, v2, blocks)


def _assemble_embedding(domain, target, tilde_v, ones, support, rest_prefix):
    """Rows of v: tilted glued part on the support, identity on the rest, 0 across."""
    col = {a: j for j, a in enumerate(domain.atoms)}
    glued_dim = tilde_v.target.dim
    rows = []
    for i, atom in enumerate(target.atoms):
        row = [ZERO] * domain.dim
        if i < glued_dim:
            inner = tilde_v.matrix[i]
            for j_t, value in enumerate(inner):
                if value != 0:
                    b = tilde_v.source.atoms[j_t]
                    row[col[b]] = value / ones[col[b]]
        elif atom.startswith(rest_prefix):
            b = atom[len(rest_prefix):]
            if b in col:
                row[col[b]] = ONE
        rows.append(row)
    return LatticeMap(domain, target, rows)
