"""Finite measurable spaces, exact-rational measures, and measure-preserving maps.

Every sigma-algebra in scope is finite, so a space is just its ordered list of
atoms and a measure is a map from atoms to Fractions.  Product spaces carry one
finite space per coordinate identifier; their atoms are tuples enumerated in
lexicographic order over the sorted coordinate identifiers, each factor running
in its own canonical atom order.

All equalities here are exact rational equalities.  There are no tolerances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import CoordinateMismatchError, DomainError
from .rational import as_fraction

Coord = Union[int, str]
CoordTuple = tuple  # sorted tuple of coordinate identifiers
Atom = Union[str, tuple]


def coordset(coords: Iterable[Coord]) -> CoordTuple:
    """Normalize an iterable of coordinate identifiers to a sorted, deduplicated tuple."""
    out = tuple(sorted(set(coords)))
    return out


@dataclass(frozen=True)
class FiniteSpace:
    """An ordered finite set of atom labels; the power set is its sigma-algebra."""

    atoms: tuple

    def __init__(self, atoms: Iterable[str]):
        atoms = tuple(atoms)
        seen = set()
        for a in atoms:
            if not isinstance(a, str):
                raise DomainError(f"atom labels must be strings, got {a!r}")
            if "|" in a:
                raise DomainError(f"atom label may not contain '|' (reserved): {a!r}")
            if a in seen:
                raise DomainError(f"duplicate atom label {a!r}")
            seen.add(a)
        object.__setattr__(self, "atoms", atoms)

    @cached_property
    def atom_index(self) -> dict:
        return {a: i for i, a in enumerate(self.atoms)}

    def __contains__(self, atom) -> bool:
        return atom in self.atom_index

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class ProductSpace:
    """A product of finite spaces indexed by a sorted tuple of coordinates.

    The empty product is the one-point space whose single atom is ``()``.
    """

    factors: tuple  # tuple of (coord, FiniteSpace), sorted by coord

    def __init__(self, coords: Mapping[Coord, FiniteSpace]):
        items = list(coords.items())
        kinds = {type(c) for c, _ in items}
        if len(kinds) > 1:
            raise DomainError("coordinate identifiers must share one type per product")
        for c, sp in items:
            if not isinstance(sp, FiniteSpace):
                raise DomainError(f"coordinate {c!r} is not bound to a FiniteSpace")
        object.__setattr__(self, "factors", tuple(sorted(items, key=lambda kv: kv[0])))

    @property
    def coords(self) -> CoordTuple:
        return tuple(c for c, _ in self.factors)

    def factor(self, coord: Coord) -> FiniteSpace:
        for c, sp in self.factors:
            if c == coord:
                return sp
        raise CoordinateMismatchError(f"unknown coordinate {coord!r}")

    @cached_property
    def atoms(self) -> tuple:
        """All atoms, lexicographic over sorted coordinates in canonical factor order."""
        return tuple(itertools.product(*(sp.atoms for _, sp in self.factors)))

    @cached_property
    def atom_index(self) -> dict:
        return {a: i for i, a in enumerate(self.atoms)}

    def __contains__(self, atom) -> bool:
        return atom in self.atom_index

    def __len__(self) -> int:
        return len(self.atoms)

    def restrict(self, coords: Iterable[Coord]) -> "ProductSpace":
        sub = coordset(coords)
        bound = dict(self.factors)
        missing = [c for c in sub if c not in bound]
        if missing:
            raise CoordinateMismatchError(f"coordinates {missing!r} not in product {self.coords!r}")
        return ProductSpace({c: bound[c] for c in sub})

    def projector(self, coords: Iterable[Coord]):
        """Return a function sending an atom of self to its sub-tuple on ``coords``."""
        sub = coordset(coords)
        own = self.coords
        positions = []
        for c in sub:
            if c not in own:
                raise CoordinateMismatchError(f"coordinate {c!r} not in product {own!r}")
            positions.append(own.index(c))
        positions = tuple(positions)
        return lambda atom: tuple(atom[p] for p in positions)


Space = Union[FiniteSpace, ProductSpace]


def _validated_weights(space: Space, weights: Mapping) -> dict:
    out = {}
    for atom, w in weights.items():
        if atom not in space:
            raise CoordinateMismatchError(f"atom {atom!r} not in space")
        q = as_fraction(w)
        if q != 0:
            out[atom] = q
    return out


@dataclass(frozen=True, eq=False)
class RationalMeasure:
    """A signed measure as exact-rational atom weights; missing atoms weigh zero."""

    space: Space
    weights: dict

    def __init__(self, space: Space, weights: Mapping = ()):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "weights", _validated_weights(space, dict(weights)))

    def __call__(self, atom) -> Fraction:
        if atom not in self.space:
            raise CoordinateMismatchError(f"atom {atom!r} not in space")
        return self.weights.get(atom, Fraction(0))

    @property
    def mass(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    @property
    def is_positive(self) -> bool:
        return all(w >= 0 for w in self.weights.values())

    @property
    def support(self) -> tuple:
        return tuple(a for a in self.space.atoms if a in self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMeasure):
            return NotImplemented
        return self.space == other.space and self.weights == other.weights

    def __add__(self, other: "RationalMeasure") -> "RationalMeasure":
        if not isinstance(other, RationalMeasure):
            return NotImplemented
        if self.space != other.space:
            raise CoordinateMismatchError("cannot add measures on different spaces")
        merged = dict(self.weights)
        for a, w in other.weights.items():
            merged[a] = merged.get(a, Fraction(0)) + w
        return RationalMeasure(self.space, merged)

    def __sub__(self, other: "RationalMeasure") -> "RationalMeasure":
        return self + (-1) * other

    def __neg__(self) -> "RationalMeasure":
        return (-1) * self

    def __rmul__(self, scalar) -> "RationalMeasure":
        c = as_fraction(scalar)
        return RationalMeasure(self.space, {a: c * w for a, w in self.weights.items()})

    def __repr__(self) -> str:
        items = ", ".join(f"{a!r}: {w}" for a, w in sorted(self.weights.items(), key=str))
        return f"RationalMeasure({items})"


def zero_measure(space: Space) -> RationalMeasure:
    return RationalMeasure(space, {})


def uniform_probability(space: FiniteSpace) -> RationalMeasure:
    """The uniform probability measure; DomainError on an empty space."""
    n = len(space.atoms)
    if n == 0:
        raise DomainError("an empty space carries no probability measure")
    w = Fraction(1, n)
    return RationalMeasure(space, {a: w for a in space.atoms})


def as_coordinate_measure(coord: Coord, nu: RationalMeasure) -> RationalMeasure:
    """Re-key a plain-space measure as a one-coordinate product measure."""
    if not isinstance(nu.space, FiniteSpace):
        raise CoordinateMismatchError("expected a measure on a plain FiniteSpace")
    prod = ProductSpace({coord: nu.space})
    return RationalMeasure(prod, {(a,): w for a, w in nu.weights.items()})


def marginalize(nu: RationalMeasure, coords: Iterable[Coord]) -> RationalMeasure:
    """Sum the joint over the coordinates outside ``coords``.

    The marginal onto the empty coordinate set is the total-mass measure on
    the one-point space.
    """
    if not isinstance(nu.space, ProductSpace):
        raise CoordinateMismatchError("marginalize needs a product-space measure")
    sub = coordset(coords)
    target = nu.space.restrict(sub)
    if sub == nu.space.coords:
        return RationalMeasure(target, nu.weights)
    proj = nu.space.projector(sub)
    out: dict = {}
    for atom, w in nu.weights.items():
        key = proj(atom)
        out[key] = out.get(key, Fraction(0)) + w
    return RationalMeasure(target, out)


def tensor(nu: RationalMeasure, mu: RationalMeasure) -> RationalMeasure:
    """Product measure on the disjoint union of the two coordinate sets."""
    if not isinstance(nu.space, ProductSpace) or not isinstance(mu.space, ProductSpace):
        raise CoordinateMismatchError("tensor needs product-space measures")
    a_coords, b_coords = nu.space.coords, mu.space.coords
    overlap = set(a_coords) & set(b_coords)
    if overlap:
        raise CoordinateMismatchError(f"tensor factors share coordinates {sorted(overlap)!r}")
    merged = dict(nu.space.factors)
    merged.update(dict(mu.space.factors))
    target = ProductSpace(merged)
    coords = target.coords
    pick_a = tuple(i for i, c in enumerate(coords) if c in set(a_coords))
    pick_b = tuple(i for i, c in enumerate(coords) if c in set(b_coords))
    out = {}
    for x, wx in nu.weights.items():
        for y, wy in mu.weights.items():
            atom = [None] * len(coords)
            for i, p in enumerate(pick_a):
                atom[p] = x[i]
            for i, p in enumerate(pick_b):
                atom[p] = y[i]
            out[tuple(atom)] = wx * wy
    return RationalMeasure(target, out)


def product_measure(factors: Sequence[tuple]) -> RationalMeasure:
    """Iterated tensor of per-coordinate positive measures.

    ``factors`` is a sequence of (coordinate, plain-space RationalMeasure);
    a non-positive factor is a DomainError.
    """
    result = RationalMeasure(ProductSpace({}), {(): Fraction(1)})
    seen = set()
    for coord, nu in factors:
        if coord in seen:
            raise CoordinateMismatchError(f"duplicate coordinate {coord!r}")
        seen.add(coord)
        if not nu.is_positive:
            raise DomainError(f"factor on coordinate {coord!r} is not positive")
        result = tensor(result, as_coordinate_measure(coord, nu))
    return result


def variation(nu: RationalMeasure) -> RationalMeasure:
    """Atomwise absolute value (the total-variation measure at atomic scale)."""
    return RationalMeasure(nu.space, {a: abs(w) for a, w in nu.weights.items()})


@dataclass(frozen=True)
class AtomMap:
    """A total function between atom sets; the finite avatar of a point map."""

    source: FiniteSpace
    target: FiniteSpace
    image: dict

    def __init__(self, source: FiniteSpace, target: FiniteSpace, image: Mapping[str, str]):
        image = dict(image)
        for a in source.atoms:
            if a not in image:
                raise DomainError(f"map is not total: no image for atom {a!r}")
        for a, b in image.items():
            if a not in source:
                raise CoordinateMismatchError(f"atom {a!r} not in source space")
            if b not in target:
                raise CoordinateMismatchError(f"image {b!r} of {a!r} not in target space")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "image", image)

    def __call__(self, atom: str) -> str:
        if atom not in self.source:
            raise CoordinateMismatchError(f"atom {atom!r} not in source space")
        return self.image[atom]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.image == other.image
        )

    def __hash__(self):
        return hash((self.source, self.target, tuple(sorted(self.image.items()))))


def identity_atom_map(space: FiniteSpace) -> AtomMap:
    return AtomMap(space, space, {a: a for a in space.atoms})


def pushforward(f: AtomMap, nu: RationalMeasure) -> RationalMeasure:
    """The image measure: result(b) = sum of nu over the fiber of b."""
    if nu.space != f.source:
        raise CoordinateMismatchError("measure does not live on the map's source space")
    out: dict = {}
    for a, w in nu.weights.items():
        b = f.image[a]
        out[b] = out.get(b, Fraction(0)) + w
    return RationalMeasure(f.target, out)


def graph_measure(f: AtomMap, nu: RationalMeasure, coords: tuple) -> RationalMeasure:
    """Push nu onto the graph of f inside the product target x source.

    ``coords`` supplies the coordinate identifiers (target_coord, source_coord)
    of the two-coordinate product the result lives on.
    """
    if nu.space != f.source:
        raise CoordinateMismatchError("measure does not live on the map's source space")
    t_coord, s_coord = coords
    if t_coord == s_coord:
        raise CoordinateMismatchError("graph coordinates must be distinct")
    prod = ProductSpace({t_coord: f.target, s_coord: f.source})
    order = prod.coords
    out = {}
    for x, w in nu.weights.items():
        pair = {t_coord: f.image[x], s_coord: x}
        out[tuple(pair[c] for c in order)] = w
    return RationalMeasure(prod, out)


def is_measure_preserving(
    f: AtomMap, nu_src: RationalMeasure, nu_dst: RationalMeasure
) -> tuple[bool, Optional[str]]:
    """Exact check that pushforward(f, nu_src) == nu_dst.

    Returns (True, None) or (False, first_failing_target_atom).
    """
    if nu_src.space != f.source or nu_dst.space != f.target:
        raise CoordinateMismatchError("measures do not match the map's spaces")
    pushed = pushforward(f, nu_src)
    for b in f.target.atoms:
        if pushed(b) != nu_dst(b):
            return False, b
    return True, None
