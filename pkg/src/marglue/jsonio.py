"""The shared JSON instance schema: parsing with path-annotated errors.

Rationals travel as decimal-free "p/q" strings; product-space atoms as their
labels joined by "|" (labels themselves never contain "|").  Parse errors
raise InstanceFormatError carrying a JSON path like
``family.members[1].measure.weights["a|b"]`` so the CLI can point at the
offending spot.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import InstanceFormatError, MarglueError
from .family import MarginalFamily
from .lattice import AtomicL1, LatticeMap, PositiveFunctional
from .measure import (
    AtomMap,
    FiniteSpace,
    ProductSpace,
    RationalMeasure,
)
from .rational import format_rational, parse_rational

KINDS = (
    "consistency",
    "signed",
    "positive",
    "bounded",
    "amalgamate-maps",
    "amalgamate-l1",
    "close-square",
)

VERSION = "1"


def _expect(obj, typ, path, what):
    if not isinstance(obj, typ):
        raise InstanceFormatError(path, f"expected {what}, got {type(obj).__name__}")
    return obj


def _get(obj: Mapping, key: str, path: str):
    if key not in obj:
        raise InstanceFormatError(path, f"missing required key {key!r}")
    return obj[key]


def rational_from_json(obj, path) -> Fraction:
    _expect(obj, str, path, 'a "p/q" rational string')
    try:
        return parse_rational(obj)
    except ValueError as err:
        raise InstanceFormatError(path, str(err)) from None


def rational_to_json(value: Fraction) -> str:
    return format_rational(value)


# ---------------------------------------------------------------- spaces


def space_to_json(space: FiniteSpace, name: str = "") -> dict:
    return {"name": name, "atoms": list(space.atoms)}


def space_from_json(obj, path) -> FiniteSpace:
    _expect(obj, dict, path, "a space object")
    atoms = _expect(_get(obj, "atoms", path), list, f"{path}.atoms", "a list of atom labels")
    for i, a in enumerate(atoms):
        _expect(a, str, f"{path}.atoms[{i}]", "a string label")
    try:
        return FiniteSpace(atoms)
    except MarglueError as err:
        raise InstanceFormatError(f"{path}.atoms", str(err)) from None


def _join_atom(atom) -> str:
    if isinstance(atom, tuple):
        return "|".join(atom)
    return atom


def _split_atom(key: str, coords, path) -> tuple:
    parts = tuple(key.split("|")) if key else ()
    if len(parts) != len(coords):
        raise InstanceFormatError(
            path, f"atom key {key!r} has {len(parts)} components, expected {len(coords)}"
        )
    return parts


# --------------------------------------------------------------- measures


def plain_measure_to_json(nu: RationalMeasure, name: str = "") -> dict:
    return {
        "space": space_to_json(nu.space, name),
        "weights": {a: rational_to_json(w) for a, w in sorted(nu.weights.items())},
    }


def plain_measure_from_json(obj, path) -> RationalMeasure:
    _expect(obj, dict, path, "a measure object")
    space = space_from_json(_get(obj, "space", path), f"{path}.space")
    weights_obj = _expect(_get(obj, "weights", path), dict, f"{path}.weights", "a weights object")
    weights = {}
    for key, value in weights_obj.items():
        if key not in space.atom_index:
            raise InstanceFormatError(f'{path}.weights["{key}"]', "unknown atom label")
        weights[key] = rational_from_json(value, f'{path}.weights["{key}"]')
    return RationalMeasure(space, weights)


def product_measure_to_json(nu: RationalMeasure) -> dict:
    coords = list(nu.space.coords)
    return {
        "space": {"coords": coords},
        "weights": {
            _join_atom(a): rational_to_json(w)
            for a, w in sorted(nu.weights.items(), key=lambda kv: _join_atom(kv[0]))
        },
    }


def product_measure_from_json(obj, coords, spaces, path) -> RationalMeasure:
    """Measure on the product of ``coords`` resolved against ``spaces``."""
    _expect(obj, dict, path, "a measure object")
    if "space" in obj:
        declared = obj["space"]
        _expect(declared, dict, f"{path}.space", "a space reference")
        if "coords" in declared and list(declared["coords"]) != list(coords):
            raise InstanceFormatError(
                f"{path}.space.coords", f"expected coordinates {list(coords)!r}"
            )
    prod = ProductSpace({c: spaces[c] for c in coords})
    weights_obj = _expect(_get(obj, "weights", path), dict, f"{path}.weights", "a weights object")
    weights = {}
    for key, value in weights_obj.items():
        atom = _split_atom(key, coords, f'{path}.weights["{key}"]')
        if atom not in prod.atom_index:
            raise InstanceFormatError(f'{path}.weights["{key}"]', "unknown atom tuple")
        weights[atom] = rational_from_json(value, f'{path}.weights["{key}"]')
    return RationalMeasure(prod, weights)


# ---------------------------------------------------------------- families


def family_to_json(fam: MarginalFamily) -> dict:
    # JSON keys are strings; stringifying must not reorder the coordinates,
    # or the tuple-joined atom keys would silently misalign on re-parse.
    names = [str(c) for c in fam.index_set]
    if names != sorted(names) or len(set(names)) != len(names):
        raise InstanceFormatError(
            "$.index_set", "coordinate identifiers do not stringify order-stably"
        )
    return {
        "index_set": names,
        "spaces": {str(c): space_to_json(fam.spaces[c], str(c)) for c in fam.index_set},
        "members": [
            {
                "coords": [str(c) for c in coords],
                "measure": {
                    "weights": {
                        _join_atom(a): rational_to_json(w)
                        for a, w in sorted(nu.weights.items(), key=lambda kv: _join_atom(kv[0]))
                    }
                },
            }
            for coords, nu in fam.members
        ],
    }


def family_from_json(obj, path) -> MarginalFamily:
    _expect(obj, dict, path, "a family object")
    index_set = _expect(_get(obj, "index_set", path), list, f"{path}.index_set", "a list")
    for i, c in enumerate(index_set):
        _expect(c, str, f"{path}.index_set[{i}]", "a string coordinate")
    if len(set(index_set)) != len(index_set):
        raise InstanceFormatError(f"{path}.index_set", "duplicate coordinates")
    spaces_obj = _expect(_get(obj, "spaces", path), dict, f"{path}.spaces", "an object")
    spaces = {}
    for c in index_set:
        if c not in spaces_obj:
            raise InstanceFormatError(f"{path}.spaces", f"missing space for coordinate {c!r}")
        spaces[c] = space_from_json(spaces_obj[c], f'{path}.spaces["{c}"]')
    members_obj = _expect(_get(obj, "members", path), list, f"{path}.members", "a list")
    members = []
    for i, member in enumerate(members_obj):
        mpath = f"{path}.members[{i}]"
        _expect(member, dict, mpath, "a member object")
        coords = _expect(_get(member, "coords", mpath), list, f"{mpath}.coords", "a list")
        for j, c in enumerate(coords):
            if c not in spaces:
                raise InstanceFormatError(f"{mpath}.coords[{j}]", f"unknown coordinate {c!r}")
        if len(set(coords)) != len(coords):
            raise InstanceFormatError(f"{mpath}.coords", "duplicate coordinates")
        coords = tuple(sorted(coords))
        nu = product_measure_from_json(
            _get(member, "measure", mpath), coords, spaces, f"{mpath}.measure"
        )
        members.append((coords, nu))
    try:
        return MarginalFamily(spaces, members)
    except MarglueError as err:
        raise InstanceFormatError(path, str(err)) from None


# ------------------------------------------------------------------- maps


def atom_map_to_json(f: AtomMap) -> dict:
    return {
        "source": space_to_json(f.source),
        "target": space_to_json(f.target),
        "image": {a: f.image[a] for a in f.source.atoms},
    }


def atom_map_from_json(obj, path) -> AtomMap:
    _expect(obj, dict, path, "a map object")
    source = space_from_json(_get(obj, "source", path), f"{path}.source")
    target = space_from_json(_get(obj, "target", path), f"{path}.target")
    image = _expect(_get(obj, "image", path), dict, f"{path}.image", "an object")
    try:
        return AtomMap(source, target, image)
    except MarglueError as err:
        raise InstanceFormatError(f"{path}.image", str(err)) from None


# --------------------------------------------------------------- lattices


def lattice_to_json(space: AtomicL1) -> dict:
    return {
        "atoms": list(space.atoms),
        "weights": {a: rational_to_json(w) for a, w in zip(space.atoms, space.weights)},
    }


def lattice_from_json(obj, path) -> AtomicL1:
    _expect(obj, dict, path, "a lattice object")
    atoms = _expect(_get(obj, "atoms", path), list, f"{path}.atoms", "a list")
    weights_obj = _expect(_get(obj, "weights", path), dict, f"{path}.weights", "an object")
    weights = []
    for a in atoms:
        _expect(a, str, f"{path}.atoms", "a string label")
        if a not in weights_obj:
            raise InstanceFormatError(f"{path}.weights", f"missing weight for atom {a!r}")
        weights.append(rational_from_json(weights_obj[a], f'{path}.weights["{a}"]'))
    try:
        return AtomicL1(atoms, weights)
    except MarglueError as err:
        raise InstanceFormatError(path, str(err)) from None


def lattice_map_to_json(m: LatticeMap) -> dict:
    return {
        "source": lattice_to_json(m.source),
        "target": lattice_to_json(m.target),
        "matrix": [[rational_to_json(v) for v in row] for row in m.matrix],
    }


def lattice_map_from_json(obj, path) -> LatticeMap:
    _expect(obj, dict, path, "a lattice map object")
    source = lattice_from_json(_get(obj, "source", path), f"{path}.source")
    target = lattice_from_json(_get(obj, "target", path), f"{path}.target")
    matrix_obj = _expect(_get(obj, "matrix", path), list, f"{path}.matrix", "a list of rows")
    matrix = []
    for i, row in enumerate(matrix_obj):
        _expect(row, list, f"{path}.matrix[{i}]", "a list")
        matrix.append(
            [rational_from_json(v, f"{path}.matrix[{i}][{j}]") for j, v in enumerate(row)]
        )
    try:
        return LatticeMap(source, target, matrix)
    except MarglueError as err:
        raise InstanceFormatError(f"{path}.matrix", str(err)) from None


def functional_to_json(xstar: PositiveFunctional) -> dict:
    return {
        "coeffs": {
            a: rational_to_json(c) for a, c in zip(xstar.space.atoms, xstar.coeffs)
        }
    }


def vector_to_json(space: AtomicL1, vector) -> dict:
    return {a: rational_to_json(v) for a, v in zip(space.atoms, vector)}


def vector_from_json(obj, space: AtomicL1, path) -> tuple:
    _expect(obj, dict, path, "an atom -> rational object")
    for key in obj:
        if key not in space.atoms:
            raise InstanceFormatError(f'{path}["{key}"]', "unknown atom label")
    return tuple(
        rational_from_json(obj[a], f'{path}["{a}"]') if a in obj else Fraction(0)
        for a in space.atoms
    )


# -------------------------------------------------------------- instances


def parse_instance(obj) -> tuple[str, dict]:
    """Validate the envelope and payload; returns (kind, parsed payload)."""
    _expect(obj, dict, "$", "a JSON object instance")
    version = _get(obj, "version", "$")
    if version != VERSION:
        raise InstanceFormatError("$.version", f"unsupported version {version!r}")
    kind = _get(obj, "kind", "$")
    if kind not in KINDS:
        raise InstanceFormatError("$.kind", f"unknown kind {kind!r}")

    if kind in ("consistency", "signed", "positive", "bounded"):
        fam = family_from_json(_get(obj, "family", "$"), "$.family")
        payload: dict = {"family": fam}
        if kind == "signed" and "refs" in obj:
            refs_obj = _expect(obj["refs"], dict, "$.refs", "an object")
            refs = {}
            for c in fam.index_set:
                if c not in refs_obj:
                    raise InstanceFormatError("$.refs", f"missing reference for {c!r}")
                refs[c] = plain_measure_from_json(refs_obj[c], f'$.refs["{c}"]')
            payload["refs"] = refs
        if kind == "bounded":
            coords = fam.index_set
            payload["lower"] = product_measure_from_json(
                _get(obj, "lower", "$"), coords, fam.spaces, "$.lower"
            )
            payload["upper"] = product_measure_from_json(
                _get(obj, "upper", "$"), coords, fam.spaces, "$.upper"
            )
        return kind, payload

    if kind == "amalgamate-maps":
        nu0 = plain_measure_from_json(_get(obj, "nu0", "$"), "$.nu0")
        nu1 = plain_measure_from_json(_get(obj, "nu1", "$"), "$.nu1")
        nu2 = plain_measure_from_json(_get(obj, "nu2", "$"), "$.nu2")
        f1 = atom_map_from_json(_get(obj, "f1", "$"), "$.f1")
        f2 = atom_map_from_json(_get(obj, "f2", "$"), "$.f2")
        return kind, {"nu0": nu0, "nu1": nu1, "nu2": nu2, "f1": f1, "f2": f2}

    if kind == "amalgamate-l1":
        u1 = lattice_map_from_json(_get(obj, "u1", "$"), "$.u1")
        u2 = lattice_map_from_json(_get(obj, "u2", "$"), "$.u2")
        return kind, {"u1": u1, "u2": u2}

    # close-square
    t1 = lattice_map_from_json(_get(obj, "t1", "$"), "$.t1")
    t2 = lattice_map_from_json(_get(obj, "t2", "$"), "$.t2")
    x1 = vector_from_json(_get(obj, "x1", "$"), t1.target, "$.x1")
    return kind, {"t1": t1, "t2": t2, "x1": x1}


def certificate_to_json(cert) -> dict:
    return {
        "g": {
            ",".join(str(c) for c in coords): {
                _join_atom(a): rational_to_json(v) for a, v in sorted(g.items())
            }
            for coords, g in cert.functions.items()
        },
        "lhs": rational_to_json(cert.lhs),
        "rhs": rational_to_json(cert.rhs),
    }


def violations_to_json(violations) -> list:
    return [
        {
            "t1": list(v.coords_a),
            "t2": list(v.coords_b),
            "atom": _join_atom(v.atom),
            "value1": rational_to_json(v.value_a),
            "value2": rational_to_json(v.value_b),
        }
        for v in violations
    ]
