import random
from fractions import Fraction

import pytest

from marglue.errors import DimensionMismatchError, DomainError, PreconditionError
from marglue.lattice import (
    AtomicL1,
    LatticeMap,
    PositiveFunctional,
    absolute,
    extend_positive_functional,
    identity_map,
    is_isometric_embedding,
    is_lattice_homomorphism,
    join,
    kakutani_quotient,
    meet,
    norming_functional,
    operator_norm,
    pullback_functional,
)


def pair_space():
    return AtomicL1(["p", "q"], [Fraction(1, 2), Fraction(1, 2)])


def random_vector(rng, space, lo=-5, hi=5):
    return tuple(Fraction(rng.randint(lo, hi), rng.randint(1, 3)) for _ in range(space.dim))


class TestSpace:
    def test_zero_weight_atoms_are_quotiented(self):
        space = AtomicL1(["a", "b", "c"], [1, 0, 2])
        assert space.atoms == ("a", "c")
        assert space.weights == (Fraction(1), Fraction(2))

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError):
            AtomicL1(["a"], [-1])

    def test_norm(self):
        space = AtomicL1(["a", "b"], [Fraction(1, 2), Fraction(1, 3)])
        assert space.norm((2, -3)) == 2

    def test_l1_identity_random(self):
        rng = random.Random(1)
        space = AtomicL1(["a", "b", "c"], [Fraction(1, 2), Fraction(1, 3), 2])
        for _ in range(200):
            x = random_vector(rng, space)
            y = random_vector(rng, space)
            lhs = space.norm(tuple(a + b for a, b in zip(absolute(x), absolute(y))))
            assert lhs == space.norm(x) + space.norm(y)


class TestOps:
    def test_absolute(self):
        assert absolute((-1, 2)) == (1, 2)

    def test_join(self):
        assert join((1, 0), (0, 1)) == (1, 1)

    def test_meet(self):
        assert meet((1, 0), (0, 1)) == (0, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            join((1,), (1, 2))


class TestHomomorphism:
    def test_identity_is_both(self):
        ident = identity_map(pair_space())
        assert is_lattice_homomorphism(ident) == (True, None)
        assert is_isometric_embedding(ident) == (True, None)

    def test_mixed_sign_row_fails_with_witness(self):
        space = pair_space()
        m = LatticeMap(space, space, [[1, -1], [0, 0]])
        ok, witness = is_lattice_homomorphism(m)
        assert not ok and witness == "p"

    def test_two_entry_row_fails(self):
        space = pair_space()
        m = LatticeMap(space, space, [[1, 1], [0, 0]])
        assert is_lattice_homomorphism(m)[0] is False

    def test_atom_splitting_embedding(self):
        source = AtomicL1(["a"], [1])
        target = pair_space()
        split = LatticeMap(source, target, [[1], [1]])
        assert is_isometric_embedding(split) == (True, None)

    def test_wrong_column_weight_fails(self):
        source = AtomicL1(["a"], [1])
        target = AtomicL1(["p", "q"], [Fraction(1, 2), Fraction(1, 4)])
        split = LatticeMap(source, target, [[1], [1]])
        ok, witness = is_isometric_embedding(split)
        assert not ok and witness == "a"

    def test_zero_column_fails(self):
        source = pair_space()
        target = pair_space()
        m = LatticeMap(source, target, [[1, 0], [0, 0]])
        ok, witness = is_isometric_embedding(m)
        assert not ok

    def test_homomorphism_law_random(self):
        # Shape-passing maps commute with absolute value.
        rng = random.Random(8)
        for _ in range(200):
            dim_s, dim_t = rng.randint(1, 4), rng.randint(1, 4)
            source = AtomicL1([f"s{i}" for i in range(dim_s)], [rng.randint(1, 4) for _ in range(dim_s)])
            target = AtomicL1([f"t{i}" for i in range(dim_t)], [rng.randint(1, 4) for _ in range(dim_t)])
            rows = []
            for _ in range(dim_t):
                row = [Fraction(0)] * dim_s
                if rng.random() < 0.8:
                    row[rng.randrange(dim_s)] = Fraction(rng.randint(0, 5), rng.randint(1, 3))
                rows.append(row)
            m = LatticeMap(source, target, rows)
            assert is_lattice_homomorphism(m)[0]
            x = random_vector(rng, source)
            assert m(absolute(x)) == absolute(m(x))

    def test_operator_norm(self):
        source = AtomicL1(["a"], [1])
        target = pair_space()
        assert operator_norm(LatticeMap(source, target, [[1], [1]])) == 1
        assert operator_norm(LatticeMap(source, target, [[1], [0]])) == Fraction(1, 2)
        assert operator_norm(LatticeMap(source, AtomicL1([], []), [])) == 0


class TestKakutani:
    def test_full_support_is_identity(self):
        space = pair_space()
        xstar = PositiveFunctional(space, [1, 1])
        quotient, psi = kakutani_quotient(space, xstar)
        assert quotient.atoms == space.atoms
        assert quotient.weights == space.weights
        assert psi.matrix == identity_map(space).matrix

    def test_partial_support_drops_coordinates(self):
        space = pair_space()
        xstar = PositiveFunctional(space, [1, 0])
        quotient, psi = kakutani_quotient(space, xstar)
        assert quotient.atoms == ("p",)
        assert psi((3, 7)) == (3,)

    def test_worked_example(self):
        space = pair_space()
        xstar = PositiveFunctional(space, [2, 1])
        quotient, psi = kakutani_quotient(space, xstar)
        assert quotient.weights == (Fraction(1), Fraction(1, 2))
        assert quotient.norm(psi((1, 1))) == Fraction(3, 2)
        assert xstar(absolute((1, 1))) == Fraction(3, 2)

    def test_zero_functional_gives_empty_quotient(self):
        space = pair_space()
        quotient, psi = kakutani_quotient(space, PositiveFunctional(space, [0, 0]))
        assert quotient.dim == 0
        assert psi((1, 2)) == ()

    def test_quotient_isometry_and_integral_identity_random(self):
        rng = random.Random(17)
        for _ in range(300):
            dim = rng.randint(1, 5)
            space = AtomicL1(
                [f"a{i}" for i in range(dim)],
                [Fraction(rng.randint(1, 6), rng.randint(1, 3)) for _ in range(dim)],
            )
            xstar = PositiveFunctional(
                space, [Fraction(rng.randint(0, 4), rng.randint(1, 2)) for _ in range(dim)]
            )
            quotient, psi = kakutani_quotient(space, xstar)
            z = random_vector(rng, space)
            # Quotient seminorm identity.
            assert quotient.norm(psi(z)) == xstar(absolute(z))
            # Integral identity: x*(z) equals the integral of psi(z).
            integral = sum(
                (w * v for w, v in zip(quotient.weights, psi(z))), Fraction(0)
            )
            assert integral == xstar(z)


class TestNorming:
    def test_constant_witness(self):
        space = pair_space()
        xstar, prob = norming_functional(space, (1, 1))
        assert xstar.coeffs == (1, 1)
        assert prob.weights == (Fraction(1, 2), Fraction(1, 2))

    def test_partial_support_witness(self):
        space = pair_space()
        xstar, prob = norming_functional(space, (2, 0))
        assert xstar.coeffs == (1, 0)
        assert prob.atoms == ("p",)
        assert prob.weights == (Fraction(1),)

    def test_rational_witness(self):
        space = AtomicL1(["a", "b"], [Fraction(3, 4), Fraction(1, 4)])
        xstar, prob = norming_functional(space, (Fraction(1, 3), 3))
        assert prob.weights == (Fraction(1, 4), Fraction(3, 4))
        assert xstar(space.vector({"a": Fraction(1, 3), "b": 3})) == 1
        assert xstar.norm == 1

    def test_preconditions(self):
        space = pair_space()
        with pytest.raises(PreconditionError):
            norming_functional(space, (-1, 3))
        with pytest.raises(PreconditionError):
            norming_functional(space, (1, 2))

    def test_norming_properties_random(self):
        rng = random.Random(23)
        for _ in range(200):
            dim = rng.randint(1, 5)
            space = AtomicL1(
                [f"a{i}" for i in range(dim)],
                [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(dim)],
            )
            raw = [Fraction(rng.randint(0, 5)) for _ in range(dim)]
            if all(v == 0 for v in raw):
                raw[rng.randrange(dim)] = Fraction(1)
            total = space.norm(raw)
            x = tuple(v / total for v in raw)
            xstar, prob = norming_functional(space, x)
            assert xstar(x) == 1
            assert xstar.norm == 1
            assert prob.mass == 1


class TestExtension:
    def test_identity_extension(self):
        space = pair_space()
        xstar = PositiveFunctional(space, [Fraction(1, 3), 1])
        assert extend_positive_functional(xstar, identity_map(space)) == xstar

    def test_split_extension_copies_coefficient(self):
        source = AtomicL1(["a"], [1])
        target = pair_space()
        split = LatticeMap(source, target, [[1], [1]])
        xstar = PositiveFunctional(source, [Fraction(5, 7)])
        extended = extend_positive_functional(xstar, split)
        assert extended.coeffs == (Fraction(5, 7), Fraction(5, 7))

    def test_partial_image_extension(self):
        # A 1-atom space embedded into 3 atoms using 2 of them: (2) -> (2, 2, 0).
        source = AtomicL1(["a"], [1])
        target = AtomicL1(["x", "y", "z"], [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)])
        embed = LatticeMap(source, target, [[2], [2], [0]])
        assert is_isometric_embedding(embed) == (True, None)
        xstar = PositiveFunctional(source, [2])
        extended = extend_positive_functional(xstar, embed)
        assert extended.coeffs == (2, 2, 0)
        assert extended.norm == xstar.norm == 2
        assert extended(embed((1,))) == xstar((1,))

    def test_rejects_non_embedding(self):
        source = pair_space()
        target = pair_space()
        bad = LatticeMap(source, target, [[1, 0], [0, 0]])
        with pytest.raises(PreconditionError):
            extend_positive_functional(PositiveFunctional(source, [1, 1]), bad)

    def test_extension_identity_random(self):
        rng = random.Random(29)
        for _ in range(100):
            dim = rng.randint(1, 3)
            source = AtomicL1(
                [f"a{i}" for i in range(dim)],
                [Fraction(rng.randint(1, 4)) for _ in range(dim)],
            )
            # Split each source atom into 1..2 target atoms with unit entries.
            atoms, weights, rows = [], [], []
            for j in range(dim):
                parts = rng.randint(1, 2)
                cuts = sorted(rng.sample(range(1, 8), parts - 1))
                bounds = [0] + cuts + [8]
                for p in range(parts):
                    atoms.append(f"b{j}_{p}")
                    weights.append(source.weights[j] * Fraction(bounds[p + 1] - bounds[p], 8))
            target = AtomicL1(atoms, weights)
            rows = []
            for a in target.atoms:
                j = int(a.split("_")[0][1:])
                row = [Fraction(0)] * dim
                row[j] = Fraction(1)
                rows.append(row)
            embed = LatticeMap(source, target, rows)
            assert is_isometric_embedding(embed)[0]
            xstar = PositiveFunctional(source, [Fraction(rng.randint(0, 3)) for _ in range(dim)])
            extended = extend_positive_functional(xstar, embed)
            z = random_vector(rng, source)
            assert extended(embed(z)) == xstar(z)
            assert extended.norm == xstar.norm

    def test_pullback_functional(self):
        source = AtomicL1(["a"], [1])
        target = pair_space()
        split = LatticeMap(source, target, [[1], [1]])
        ystar = PositiveFunctional(target, [2, 3])
        pulled = pullback_functional(ystar, split)
        assert pulled(source.vector((1,))) == ystar(split((1,)))
