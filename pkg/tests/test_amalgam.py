import random
from fractions import Fraction

import pytest

from marglue.amalgam import (
    amalgamate_l1,
    amalgamate_maps,
    extract_iwanik_map,
)
from marglue.errors import (
    NotCompositionOperatorError,
    PreconditionError,
)
from marglue.lattice import (
    AtomicL1,
    LatticeMap,
    composition_map,
    identity_map,
    is_isometric_embedding,
)
from marglue.measure import (
    AtomMap,
    FiniteSpace,
    RationalMeasure,
    identity_atom_map,
    is_measure_preserving,
    marginalize,
    pushforward,
    uniform_probability,
)

B = FiniteSpace(["a", "b"])


class TestAmalgamateMaps:
    def test_identity_maps_give_diagonal(self):
        nu = uniform_probability(B)
        result = amalgamate_maps(nu, nu, nu, identity_atom_map(B), identity_atom_map(B))
        assert result.triples == (("a", "a", "a"), ("b", "b", "b"))
        assert [result.nu3(a) for a in result.space3.atoms] == [Fraction(1, 2), Fraction(1, 2)]
        assert is_measure_preserving(result.g1, result.nu3, nu) == (True, None)
        assert is_measure_preserving(result.g2, result.nu3, nu) == (True, None)

    def test_constant_maps_give_product_coupling(self):
        point = FiniteSpace(["o"])
        nu0 = RationalMeasure(point, {"o": 1})
        nu1 = RationalMeasure(B, {"a": Fraction(1, 3), "b": Fraction(2, 3)})
        nu2 = RationalMeasure(B, {"a": Fraction(1, 4), "b": Fraction(3, 4)})
        f1 = AtomMap(B, point, {"a": "o", "b": "o"})
        result = amalgamate_maps(nu0, nu1, nu2, f1, f1)
        for triple in result.triples:
            label = ",".join(triple)
            assert result.nu3(label) == nu1(triple[1]) * nu2(triple[2])

    def test_fiber_collapse_example(self):
        # Omega_1 = {a1, a2, b1} with masses (1/4, 1/4, 1/2) collapsing
        # subscripts onto a uniform two-point base, Omega_2 the base itself:
        # three fiber triples with masses (1/4, 1/4, 1/2).
        base = FiniteSpace(["a", "b"])
        upstairs = FiniteSpace(["a1", "a2", "b1"])
        nu0 = uniform_probability(base)
        nu1 = RationalMeasure(
            upstairs, {"a1": Fraction(1, 4), "a2": Fraction(1, 4), "b1": Fraction(1, 2)}
        )
        f1 = AtomMap(upstairs, base, {"a1": "a", "a2": "a", "b1": "b"})
        result = amalgamate_maps(nu0, nu1, nu0, f1, identity_atom_map(base))
        assert result.triples == (("a", "a1", "a"), ("a", "a2", "a"), ("b", "b1", "b"))
        assert [result.nu3(a) for a in result.space3.atoms] == [
            Fraction(1, 4),
            Fraction(1, 4),
            Fraction(1, 2),
        ]

    def test_rejects_non_measure_preserving(self):
        nu = uniform_probability(B)
        skew = RationalMeasure(B, {"a": Fraction(1, 3), "b": Fraction(2, 3)})
        with pytest.raises(PreconditionError) as err:
            amalgamate_maps(nu, skew, nu, identity_atom_map(B), identity_atom_map(B))
        assert err.value.witness is not None

    def test_joint_marginals_and_commuting_projections_random(self):
        rng = random.Random(40)
        for _ in range(50):
            nu0, nu1, nu2, f1, f2 = random_mp_triple(rng)
            result = amalgamate_maps(nu0, nu1, nu2, f1, f2)
            assert is_measure_preserving(result.g1, result.nu3, nu1) == (True, None)
            assert is_measure_preserving(result.g2, result.nu3, nu2) == (True, None)
            for atom in result.space3.atoms:
                assert f1.image[result.g1.image[atom]] == f2.image[result.g2.image[atom]]
            # The audit joint puts every bit of its mass on the fiber set.
            assert result.full_joint.mass == result.nu3.mass
            assert marginalize(result.full_joint, (1,)).weights == {
                (a,): w for a, w in nu1.weights.items()
            }


def random_mp_triple(rng, max_atoms=6):
    """Random (nu0, nu1, nu2, f1, f2) with both maps measure-preserving."""
    n0 = rng.randint(1, 3)
    base = FiniteSpace([f"z{i}" for i in range(n0)])

    def tower(prefix):
        n = rng.randint(n0, max_atoms)
        up = FiniteSpace([f"{prefix}{i}" for i in range(n)])
        image = {}
        for i, atom in enumerate(up.atoms):
            image[atom] = base.atoms[i] if i < n0 else rng.choice(base.atoms)
        f = AtomMap(up, base, image)
        weights = {a: Fraction(rng.randint(0, 4), rng.randint(1, 3)) for a in up.atoms}
        nu = RationalMeasure(up, weights)
        return f, nu

    f1, nu1 = tower("x")
    f2, nu2 = tower("y")
    nu0 = pushforward(f1, nu1)
    #

    # Redistribute nu2 fibers so that f2 pushes onto the same base measure.
    fibers = {}
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


class TestExtractIwanik:
    def test_identity(self):
        space = AtomicL1(["p", "q"], [1, 2])
        f = extract_iwanik_map(identity_map(space))
        assert f.image == {"p": "p", "q": "q"}

    def test_duplicating_embedding_merges_back(self):
        source = AtomicL1(["p"], [1])
        target = AtomicL1(["u", "v"], [Fraction(1, 2), Fraction(1, 2)])
        u = LatticeMap(source, target, [[1], [1]])
        f = extract_iwanik_map(u)
        assert f.image == {"u": "p", "v": "p"}

    def test_fractional_entry_rejected(self):
        source = AtomicL1(["p"], [1])
        target = AtomicL1(["u", "v"], [Fraction(1, 2), Fraction(1, 4)])
        u = LatticeMap(source, target, [[1], [2]])
        assert is_isometric_embedding(u) == (True, None)
        with pytest.raises(NotCompositionOperatorError):
            extract_iwanik_map(u)

    def test_zero_row_rejected(self):
        source = AtomicL1(["p"], [Fraction(1, 2)])
        target = AtomicL1(["u", "v"], [Fraction(1, 2), Fraction(1, 2)])
        u = LatticeMap(source, target, [[1], [0]])
        with pytest.raises(NotCompositionOperatorError):
            extract_iwanik_map(u)

    def test_round_trip_rebuilds_operator(self):
        rng = random.Random(41)
        for _ in range(50):
            u = random_unital_embedding(rng)
            f = extract_iwanik_map(u)
            rebuilt = composition_map(f, u.source, u.target)
            assert rebuilt.matrix == u.matrix


def random_unital_embedding(rng, max_atoms=6):
    """A random measure-preserving unital embedding (rows are unit rows)."""
    n = rng.randint(1, 3)
    source_atoms = [f"s{i}" for i in range(n)]
    target_atoms = []
    rows = []
    weights = []
    source_weights = []
    for j, atom in enumerate(source_atoms):
        parts = rng.randint(1, max(1, max_atoms // n))
        cuts = sorted(rng.sample(range(1, 12), parts - 1))
        bounds = [0] + cuts + [12]
        w = Fraction(rng.randint(1, 5), rng.randint(1, 2))
        source_weights.append(w)
        for p in range(parts):
            target_atoms.append(f"t{j}_{p}")
            weights.append(w * Fraction(bounds[p + 1] - bounds[p], 12))
            row = [Fraction(0)] * n
            row[j] = Fraction(1)
            rows.append(row)
    source = AtomicL1(source_atoms, source_weights)
    target = AtomicL1(target_atoms, weights)
    # AtomicL1 drops zero-weight atoms; drop the matching rows.
    kept_rows = [row for row, w in zip(rows, weights) if w > 0]
    return LatticeMap(source, target, kept_rows)


def random_isometric_embedding(rng, source, max_steps=3):
    """Compose splittings, rescalings, relabelings, and padding at random."""
    current = identity_map(source)
    for _ in range(rng.randint(1, max_steps)):
        space = current.target
        kind = rng.choice(["split", "scale", "relabel", "pad"])
        atoms = list(space.atoms)
        weights = list(space.weights)
        if kind == "split" and space.dim:
            j = rng.randrange(space.dim)
            w = weights[j]
            frac = Fraction(rng.randint(1, 7), 8)
            new_atoms = atoms[:j] + [atoms[j] + "L", atoms[j] + "R"] + atoms[j + 1:]
            new_weights = weights[:j] + [w * frac, w * (1 - frac)] + weights[j + 1:]
            sources = list(range(j)) + [j, j] + list(range(j + 1, space.dim))
            step_rows = []
            for src in sources:
                row = [Fraction(0)] * space.dim
                row[src] = Fraction(1)
                step_rows.append(row)
            step = LatticeMap(space, AtomicL1(new_atoms, new_weights), step_rows)
        elif kind == "scale" and space.dim:
            j = rng.randrange(space.dim)
            factor = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            new_weights = list(weights)
            new_weights[j] = weights[j] / factor
            step_rows = []
            for i in range(space.dim):
                row = [Fraction(0)] * space.dim
                row[i] = factor if i == j else Fraction(1)
                step_rows.append(row)
            step = LatticeMap(space, AtomicL1(atoms, new_weights), step_rows)
        elif kind == "relabel" and space.dim:
            perm = list(range(space.dim))
            rng.shuffle(perm)
            new_atoms = [atoms[p] for p in perm]
            new_weights = [weights[p] for p in perm]
            step_rows = []
            for p in perm:
                row = [Fraction(0)] * space.dim
                row[p] = Fraction(1)
                step_rows.append(row)
            step = LatticeMap(space, AtomicL1(new_atoms, new_weights), step_rows)
        else:
            extra = f"pad{rng.randint(0, 999)}"
            while extra in atoms:
                extra = f"pad{rng.randint(0, 999)}"
            new_atoms = atoms + [extra]
            new_weights = weights + [Fraction(rng.randint(1, 3))]
            step_rows = [
                [Fraction(1) if i == j else Fraction(0) for j in range(space.dim)]
                for i in range(space.dim)
            ]
            step_rows.append([Fraction(0)] * space.dim)
            step = LatticeMap(space, AtomicL1(new_atoms, new_weights), step_rows)
        assert is_isometric_embedding(step)[0]
        current = step @ current
    return current


def random_source(rng, max_atoms=3):
    n = rng.randint(1, max_atoms)
    return AtomicL1(
        [f"e{i}" for i in range(n)],
        [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(n)],
    )


class TestAmalgamateL1:
    def test_identity_pair(self):
        space = AtomicL1(["p", "q"], [1, 2])
        ident = identity_map(space)
        result = amalgamate_l1(ident, ident)
        assert result.blocks["rest1"] == ()
        assert result.blocks["rest2"] == ()
        assert (result.v1 @ ident).matrix == (result.v2 @ ident).matrix
        assert result.target.weights == space.weights

    def test_hand_worked_single_atom_example(self):
        # One source atom embedded as single atoms of mass 1 inside two
        # two-atom spaces: glued single atom plus one leftover per side.
        source = AtomicL1(["e"], [1])
        x1 = AtomicL1(["p", "q"], [1, 3])
        x2 = AtomicL1(["r", "s"], [1, 2])
        u1 = LatticeMap(source, x1, [[1], [0]])
        u2 = LatticeMap(source, x2, [[1], [0]])
        result = amalgamate_l1(u1, u2)
        assert result.blocks["glued"] == ("glue:e,p,r",)
        assert result.blocks["rest1"] == ("rest1:q",)
        assert result.blocks["rest2"] == ("rest2:s",)
        assert result.target.weights == (Fraction(1), Fraction(3), Fraction(2))
        assert (result.v1 @ u1).matrix == (result.v2 @ u2).matrix
        # The common composite maps the generator to the glued atom.
        assert (result.v1 @ u1).matrix == ((Fraction(1),), (Fraction(0),), (Fraction(0),))

    def test_split_against_identity(self):
        source = AtomicL1(["e"], [1])
        x1 = AtomicL1(["p", "q"], [Fraction(1, 2), Fraction(1, 2)])
        u1 = LatticeMap(source, x1, [[1], [1]])
        x2 = AtomicL1(["f"], [1])
        u2 = LatticeMap(source, x2, [[1]])
        result = amalgamate_l1(u1, u2)
        assert (result.v1 @ u1).matrix == (result.v2 @ u2).matrix
        assert is_isometric_embedding(result.v1) == (True, None)
        assert is_isometric_embedding(result.v2) == (True, None)

    def test_rejects_non_embedding(self):
        space = AtomicL1(["p", "q"], [1, 1])
        bad = LatticeMap(space, space, [[1, 0], [0, 0]])
        with pytest.raises(PreconditionError):
            amalgamate_l1(bad, identity_map(space))

    def test_random_pairs_commute_and_embed(self):
        rng = random.Random(42)
        for _ in range(60):
            source = random_source(rng)
            u1 = random_isometric_embedding(rng, source)
            u2 = random_isometric_embedding(rng, source)
            result = amalgamate_l1(u1, u2)
            assert (result.v1 @ u1).matrix == (result.v2 @ u2).matrix
            assert is_isometric_embedding(result.v1) == (True, None)
            assert is_isometric_embedding(result.v2) == (True, None)
            # Mass bookkeeping: the amalgam splits into the glued block and
            # the two untouched complements.
            glued_mass = sum(
                (
                    result.target.weights[result.target.index(a)]
                    for a in result.blocks["glued"]
                ),
                Fraction(0),
            )
            rest_mass = result.target.mass - glued_mass
            assert result.target.mass == glued_mass + rest_mass

    def test_empty_source_degenerates_to_direct_sum(self):
        empty = AtomicL1([], [])
        x1 = AtomicL1(["p"], [2])
        x2 = AtomicL1(["r", "s"], [1, 1])
        u1 = LatticeMap(empty, x1, [[]])
        u2 = LatticeMap(empty, x2, [[], []])
        result = amalgamate_l1(u1, u2)
        assert result.blocks["glued"] == ()
        assert result.target.mass == x1.mass + x2.mass
        assert is_isometric_embedding(result.v1) == (True, None)
        assert is_isometric_embedding(result.v2) == (True, None)
