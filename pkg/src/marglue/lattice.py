"""Atomic L1 Banach lattices, lattice homomorphisms as matrices, and duals.

An atomic L1 space is a finite list of atoms with strictly positive rational
weights; ||x|| = sum_a w_a |x_a|.  Zero-weight atoms carry no information and
are quotiented away at construction.  Between such spaces a lattice
homomorphism is exactly a nonnegative matrix with at most one nonzero entry
per row, and an isometric lattice embedding is a homomorphism whose columns
reproduce the source weights:  sum_b w_target(b) M[b,a] = w_source(a), with no
zero column.

Positive dual elements are kept in density form against the weights,
x*(z) = sum_a c_a w_a z_a with c_a >= 0, which makes ||x*|| = max_a c_a and
the Kakutani quotient by the seminorm x*(|z|) a plain coordinate projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    DimensionMismatchError,
    DomainError,
    InvariantViolationError,
    PreconditionError,
)
from .measure import AtomMap, FiniteSpace
from .rational import as_fraction

ZERO = Fraction(0)
ONE = Fraction(1)

Vector = tuple


@dataclass(frozen=True)
class AtomicL1:
    """L1 over finitely many atoms with strictly positive rational weights."""

    atoms: tuple
    weights: tuple

    def __init__(self, atoms: Iterable[str], weights):
        atoms = tuple(atoms)
        if isinstance(weights, Mapping):
            raw = [as_fraction(weights.get(a, 0)) for a in atoms]
        else:
            raw = [as_fraction(w) for w in weights]
            if len(raw) != len(atoms):
                raise DimensionMismatchError("one weight per atom required")
        if len(set(atoms)) != len(atoms):
            raise DomainError("duplicate atom labels")
        kept_atoms = []
        kept_weights = []
        for a, w in zip(atoms, raw):
            if not isinstance(a, str) or "|" in a:
                raise DomainError(f"atom labels must be '|'-free strings, got {a!r}")
            if w < 0:
                raise DomainError(f"negative weight at atom {a!r}")
            if w > 0:
                kept_atoms.append(a)
                kept_weights.append(w)
        object.__setattr__(self, "atoms", tuple(kept_atoms))
        object.__setattr__(self, "weights", tuple(kept_weights))

    @property
    def dim(self) -> int:
        return len(self.atoms)

    @property
    def mass(self) -> Fraction:
        return sum(self.weights, ZERO)

    def index(self, atom: str) -> int:
        try:
            return self.atoms.index(atom)
        except ValueError:
            raise DomainError(f"unknown atom {atom!r}") from None

    def vector(self, values) -> Vector:
        """Build a vector from a mapping atom -> value or a full sequence."""
        if isinstance(values, Mapping):
            return tuple(as_fraction(values.get(a, 0)) for a in self.atoms)
        out = tuple(as_fraction(v) for v in values)
        if len(out) != self.dim:
            raise DimensionMismatchError(f"expected {self.dim} components, got {len(out)}")
        return out

    def norm(self, x: Sequence) -> Fraction:
        if len(x) != self.dim:
            raise DimensionMismatchError(f"expected {self.dim} components, got {len(x)}")
        return sum((w * abs(v) for w, v in zip(self.weights, x)), ZERO)

    def ones(self) -> Vector:
        return (ONE,) * self.dim


def join(x: Sequence, y: Sequence) -> Vector:
    """Coordinatewise maximum."""
    if len(x) != len(y):
        raise DimensionMismatchError("join of vectors of different lengths")
    return tuple(max(a, b) for a, b in zip(x, y))


def meet(x: Sequence, y: Sequence) -> Vector:
    """Coordinatewise minimum."""
    if len(x) != len(y):
        raise DimensionMismatchError("meet of vectors of different lengths")
    return tuple(min(a, b) for a, b in zip(x, y))


def absolute(x: Sequence) -> Vector:
    """Coordinatewise absolute value."""
    return tuple(abs(a) for a in x)


@dataclass(frozen=True, eq=False)
class LatticeMap:
    """A linear map between atomic L1 spaces as a dense rational matrix.

    Rows are indexed by target atoms, columns by source atoms.  Shape is
    validated here; the homomorphism property is a separate predicate.
    """

    source: AtomicL1
    target: AtomicL1
    matrix: tuple

    def __init__(self, source: AtomicL1, target: AtomicL1, matrix):
        rows = tuple(tuple(as_fraction(v) for v in row) for row in matrix)
        if len(rows) != target.dim:
            raise DimensionMismatchError(f"expected {target.dim} rows, got {len(rows)}")
        for row in rows:
            if len(row) != source.dim:
                raise DimensionMismatchError(
                    f"expected {source.dim} columns, got {len(row)}"
                )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", rows)

    def __call__(self, x: Sequence) -> Vector:
        if len(x) != self.source.dim:
            raise DimensionMismatchError("vector does not match the source dimension")
        return tuple(sum((r * v for r, v in zip(row, x)), ZERO) for row in self.matrix)

    def __matmul__(self, inner: "LatticeMap") -> "LatticeMap":
        """Composition self o inner."""
        if not isinstance(inner, LatticeMap):
            return NotImplemented
        if inner.target is not self.source and inner.target != self.source:
            raise DimensionMismatchError("composition spaces do not match")
        cols = inner.source.dim
        mid = self.source.dim
        product = [
            [
                sum((self.matrix[i][k] * inner.matrix[k][j] for k in range(mid)), ZERO)
                for j in range(cols)
            ]
            for i in range(self.target.dim)
        ]
        return LatticeMap(inner.source, self.target, product)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.matrix == other.matrix
        )


def identity_map(space: AtomicL1) -> LatticeMap:
    return LatticeMap(
        space,
        space,
        [[ONE if i == j else ZERO for j in range(space.dim)] for i in range(space.dim)],
    )


def zero_map(source: AtomicL1, target: AtomicL1) -> LatticeMap:
    return LatticeMap(source, target, [[ZERO] * source.dim for _ in range(target.dim)])


def is_lattice_homomorphism(m: LatticeMap) -> tuple[bool, Optional[str]]:
    """Nonnegative entries with at most one nonzero per row.

    For atomic L1 spaces this shape is equivalent to commuting with the
    lattice operations.  Returns (ok, witness_row_atom_or_None).
    """
    for i, row in enumerate(m.matrix):
        nonzero = 0
        for v in row:
            if v < 0:
                return False, m.target.atoms[i]
            if v != 0:
                nonzero += 1
        if nonzero > 1:
            return False, m.target.atoms[i]
    return True, None


def is_isometric_embedding(m: LatticeMap) -> tuple[bool, Optional[str]]:
    """Homomorphism whose columns exactly reproduce the source weights.

    Column a must satisfy sum_b w_target(b) * M[b,a] = w_source(a) and be
    nonzero.  Returns (ok, witness atom).
    """
    ok, witness = is_lattice_homomorphism(m)
    if not ok:
        return False, witness
    for j, a in enumerate(m.source.atoms):
        column_weight = sum(
            (m.target.weights[i] * m.matrix[i][j] for i in range(m.target.dim)), ZERO
        )
        if column_weight != m.source.weights[j]:
            return False, a
        if all(m.matrix[i][j] == 0 for i in range(m.target.dim)):
            return False, a
    return True, None


def operator_norm(m: LatticeMap) -> Fraction:
    """Max over source atoms of the column weight-ratio sum; 0 for no atoms."""
    best = ZERO
    for j in range(m.source.dim):
        total = sum(
            (m.target.weights[i] * abs(m.matrix[i][j]) for i in range(m.target.dim)), ZERO
        )
        ratio = total / m.source.weights[j]
        if ratio > best:
            best = ratio
    return best


def composition_map(f: AtomMap, dom: AtomicL1, cod: AtomicL1) -> LatticeMap:
    """The operator h -> h o f from functions on f.target to functions on f.source.

    ``dom`` carries atoms of f's target space, ``cod`` atoms of f's source
    space (both possibly after zero-weight quotienting).
    """
    col = {a: j for j, a in enumerate(dom.atoms)}
    rows = []
    for b in cod.atoms:
        if b not in f.source.atom_index:
            raise DomainError(f"atom {b!r} not in the map's source space")
        image = f.image[b]
        if image not in col:
            raise DomainError(f"image atom {image!r} has no weight in the domain lattice")
        row = [ZERO] * dom.dim
        row[col[image]] = ONE
        rows.append(row)
    return LatticeMap(dom, cod, rows)


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    """A positive dual element in density form: x*(z) = sum c_a w_a z_a."""

    space: AtomicL1
    coeffs: tuple

    def __init__(self, space: AtomicL1, coeffs):
        if isinstance(coeffs, Mapping):
            values = tuple(as_fraction(coeffs.get(a, 0)) for a in space.atoms)
        else:
            values = tuple(as_fraction(c) for c in coeffs)
            if len(values) != space.dim:
                raise DimensionMismatchError("one coefficient per atom required")
        if any(c < 0 for c in values):
            raise DomainError("functional coefficients must be nonnegative")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coeffs", values)

    def __call__(self, z: Sequence) -> Fraction:
        if len(z) != self.space.dim:
            raise DimensionMismatchError("vector does not match the space dimension")
        return sum(
            (c * w * v for c, w, v in zip(self.coeffs, self.space.weights, z)), ZERO
        )

    @property
    def norm(self) -> Fraction:
        return max(self.coeffs, default=ZERO)

    @property
    def support(self) -> tuple:
        return tuple(a for a, c in zip(self.space.atoms, self.coeffs) if c > 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PositiveFunctional):
            return NotImplemented
        return self.space == other.space and self.coeffs == other.coeffs


def pullback_functional(xstar: PositiveFunctional, m: LatticeMap) -> PositiveFunctional:
    """The composite x* o m as a functional on m's source space."""
    if xstar.space != m.target:
        raise DimensionMismatchError("functional does not live on the map's target")
    coeffs = []
    for j in range(m.source.dim):
        value = sum(
            (
                xstar.coeffs[i] * m.target.weights[i] * m.matrix[i][j]
                for i in range(m.target.dim)
            ),
            ZERO,
        )
        coeffs.append(value / m.source.weights[j])
    return PositiveFunctional(m.source, coeffs)


def kakutani_quotient(
    space: AtomicL1, xstar: PositiveFunctional
) -> tuple[AtomicL1, LatticeMap]:
    """Quotient by the seminorm z -> x*(|z|): projection onto supp(x*).

    Returns (L, psi) with L the atomic L1 space on the support of the
    coefficients, weighted by coeff * weight, and psi the coordinate
    projection; ||psi(z)||_L = x*(|z|) exactly.  A zero functional yields the
    empty space, which is legal.
    """
    if xstar.space != space:
        raise DimensionMismatchError("functional does not live on the given space")
    kept = [i for i, c in enumerate(xstar.coeffs) if c > 0]
    quotient = AtomicL1(
        [space.atoms[i] for i in kept],
        [xstar.coeffs[i] * space.weights[i] for i in kept],
    )
    rows = []
    for i in kept:
        row = [ZERO] * space.dim
        row[i] = ONE
        rows.append(row)
    return quotient, LatticeMap(space, quotient, rows)


def norming_functional(
    space: AtomicL1, x: Sequence
) -> tuple[PositiveFunctional, AtomicL1]:
    """A norm-one positive functional attaining the norm of a positive unit x.

    The canonical choice takes coefficient 1 on the support of x and 0 off
    it.  The second return value is the associated probability representation
    of the quotient measure: weights x_a * w_a on supp(x), total mass 1.
    """
    x = space.vector(x)
    if any(v < 0 for v in x):
        raise PreconditionError("the normed element must be positive", witness=x)
    if space.norm(x) != 1:
        raise PreconditionError("the normed element must have norm exactly 1")
    coeffs = [ONE if v > 0 else ZERO for v in x]
    functional = PositiveFunctional(space, coeffs)
    probability = AtomicL1(
        [a for a, v in zip(space.atoms, x) if v > 0],
        [v * w for v, w in zip(x, space.weights) if v > 0],
    )
    if functional(x) != 1 or probability.mass != 1:
        raise InvariantViolationError("norming construction lost mass")
    return functional, probability


def extend_positive_functional(
    xstar: PositiveFunctional, embedding: LatticeMap
) -> PositiveFunctional:
    """Extend x* along an isometric embedding U with x** o U = x*, same norm.

    The extension copies each source coefficient onto all target atoms in the
    image-support of that source atom and sets 0 elsewhere.
    """
    if xstar.space != embedding.source:
        raise DimensionMismatchError("functional does not live on the embedding's source")
    ok, witness = is_isometric_embedding(embedding)
    if not ok:
        raise PreconditionError("not an isometric lattice embedding", witness=witness)
    coeffs = [ZERO] * embedding.target.dim
    for i in range(embedding.target.dim):
        for j in range(embedding.source.dim):
            if embedding.matrix[i][j] != 0:
                coeffs[i] = xstar.coeffs[j]
                break
    extension = PositiveFunctional(embedding.target, coeffs)
    for j in range(embedding.source.dim):
        basis = tuple(ONE if k == j else ZERO for k in range(embedding.source.dim))
        if extension(embedding(basis)) != xstar(basis):
            raise InvariantViolationError("extension failed the composition identity")
    if extension.norm != xstar.norm:
        raise InvariantViolationError("extension changed the dual norm")
    return extension
