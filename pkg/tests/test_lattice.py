import random
from fractions import Fraction

import pytest

from linforms import (
    DimensionError,
    contains,
    lattice_from_generators,
    leibman_generators,
    leibman_lattice,
    make_ap_system,
    make_cube_system,
    make_system,
    make_trivial_system,
    orthogonal_complement,
    rank,
    vector_binomial,
)
from linforms.lattice import IntegerLattice, lattice_from_text, lattice_to_text


def integer_combination_oracle(basis, v):
    """Independent membership oracle: rational solve + integrality check."""
    if not basis:
        return not any(v)
    rows = [[Fraction(x) for x in b] for b in basis]
    target = [Fraction(x) for x in v]
    # Solve c . basis = v by elimination on the transposed system.
    ncols = len(v)
    nb = len(basis)
    aug = [[rows[i][a] for i in range(nb)] + [target[a]] for a in range(ncols)]
    pivots = []
    r = 0
    for c in range(nb):
        piv = next((i for i in range(r, ncols) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(ncols):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, ncols):
        if aug[i][-1] != 0:
            return False
    coeffs = {c: aug[i][-1] for i, c in enumerate(pivots)}
    return all(val.denominator == 1 for val in coeffs.values())


AP4 = make_ap_system(4)
U2 = make_cube_system(2)


class TestVectorBinomial:
    def test_choose_two(self):
        assert vector_binomial((0, 1, 2, 3), 2) == (0, 0, 1, 3)

    def test_choose_zero(self):
        assert vector_binomial((-5, 0, 7), 0) == (1, 1, 1)

    def test_negative_entries(self):
        assert vector_binomial((-2, 4), 2) == (3, 6)
        for x in range(-6, 7):
            assert vector_binomial((x,), 2) == (x * (x - 1) // 2,)


class TestLeibmanGenerators:
    def test_ap4_degree_1(self):
        gens = leibman_generators(AP4, 1)
        assert set(gens) == {(1, 1, 1, 1), (0, 1, 2, 3)}

    def test_ap4_degree_2(self):
        gens = leibman_generators(AP4, 2)
        assert (0, 0, 1, 3) in gens
        assert all(any(g) for g in gens)  # C(v1, 2) = 0 was filtered
        # the squared column is in the span even though it is not a generator
        assert contains(lattice_from_generators(gens, 4), (0, 1, 4, 9))

    def test_u2_degree_2_cross_product(self):
        assert (0, 0, 0, 1) in leibman_generators(U2, 2)

    def test_lex_multi_index_order_deterministic(self):
        assert leibman_generators(AP4, 2) == leibman_generators(AP4, 2)


class TestLatticeFromGenerators:
    def test_ap4_degree_2_golden_basis(self):
        lat = leibman_lattice(AP4, 2)
        assert lat.basis == ((1, 1, 1, 1), (0, 1, 2, 3), (0, 0, 1, 3))
        assert rank(lat) == 3

    def test_ap4_degree_1_golden_basis(self):
        lat = leibman_lattice(AP4, 1)
        assert lat.basis == ((1, 1, 1, 1), (0, 1, 2, 3))

    def test_u2_degree_2_is_full(self):
        lat = leibman_lattice(U2, 2)
        assert rank(lat) == 4
        for i in range(4):
            unit = tuple(int(j == i) for j in range(4))
            assert contains(lat, unit)

    def test_empty_generators(self):
        lat = lattice_from_generators([], 4)
        assert rank(lat) == 0 and lat.basis == ()

    def test_shuffle_canonicality(self):
        rng = random.Random(99)
        gens = leibman_generators(AP4, 2)
        reference = lattice_from_generators(gens, 4)
        for _ in range(10):
            shuffled = list(gens)
            rng.shuffle(shuffled)
            assert lattice_from_generators(shuffled, 4).basis == reference.basis

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            lattice_from_generators([(1, 2), (1, 2, 3)], 2)


class TestRank:
    def test_u2_degree_1_is_3(self):
        assert rank(leibman_lattice(U2, 1)) == 3

    def test_three_form_degree_2_is_3(self):
        schur = make_system([(1, 0), (0, 1), (1, 1)], label="schur")
        assert rank(leibman_lattice(schur, 2)) == 3

    def test_zero_lattice(self):
        assert rank(lattice_from_generators([], 5)) == 0


class TestContains:
    def test_ap4_degree_2_contains_squared_column(self):
        assert contains(leibman_lattice(AP4, 2), (0, 1, 4, 9))
        assert integer_combination_oracle(leibman_lattice(AP4, 2).basis, (0, 1, 4, 9))

    def test_ap4_degree_1_excludes(self):
        lat = leibman_lattice(AP4, 1)
        assert not contains(lat, (0, 0, 1, 3))
        assert not integer_combination_oracle(lat.basis, (0, 0, 1, 3))

    def test_zero_vector(self):
        assert contains(leibman_lattice(AP4, 1), (0, 0, 0, 0))
        assert contains(lattice_from_generators([], 3), (0, 0, 0))

    def test_matches_oracle_on_random_vectors(self):
        rng = random.Random(4)
        lat = leibman_lattice(AP4, 2)
        for _ in range(60):
            v = tuple(rng.randint(-12, 12) for _ in range(4))
            assert contains(lat, v) == integer_combination_oracle(lat.basis, v)

    def test_closed_under_addition(self):
        rng = random.Random(11)
        lat = leibman_lattice(AP4, 2)
        members = []
        while len(members) < 8:
            coeffs = [rng.randint(-4, 4) for _ in lat.basis]
            v = [0, 0, 0, 0]
            for c, b in zip(coeffs, lat.basis):
                v = [x + c * y for x, y in zip(v, b)]
            members.append(tuple(v))
        for v in members:
            for w in members:
                assert contains(lat, tuple(x + y for x, y in zip(v, w)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            contains(leibman_lattice(AP4, 1), (1, 2, 3))


class TestOrthogonalComplement:
    def test_ap4_degree_1_second_differences(self):
        comp = orthogonal_complement(leibman_lattice(AP4, 1))
        assert rank(comp) == 2
        assert contains(comp, (1, -2, 1, 0))
        assert contains(comp, (0, 1, -2, 1))

    def test_full_lattice_has_zero_complement(self):
        full = lattice_from_generators(
            [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)], 4
        )
        assert orthogonal_complement(full).basis == ()

    def test_zero_lattice_complement_is_everything(self):
        comp = orthogonal_complement(lattice_from_generators([], 3))
        assert rank(comp) == 3
        for unit in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            assert contains(comp, unit)

    def test_exact_orthogonality(self):
        for system, deg in ((AP4, 1), (AP4, 2), (U2, 1), (make_ap_system(3), 1)):
            lat = leibman_lattice(system, deg)
            comp = orthogonal_complement(lat)
            for w in comp.basis:
                for b in lat.basis:
                    assert sum(x * y for x, y in zip(w, b)) == 0
            assert rank(comp) == lat.ambient_dim - rank(lat)


class TestNesting:
    @pytest.mark.parametrize("system", [AP4, U2, make_ap_system(3), make_trivial_system()])
    def test_degree_nesting(self, system):
        for i in (1, 2):
            inner = leibman_lattice(system, i)
            outer = leibman_lattice(system, i + 1)
            for b in inner.basis:
                assert contains(outer, b)


class TestPolynomialTupleMembership:
    """Tuples (h(row_1), ..., h(row_t)) for integer polynomial maps h with
    h(0)=0 and degree <= i must land in the degree-i lattice."""

    @pytest.mark.parametrize("system", [AP4, U2, make_ap_system(5)])
    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_random_polynomials(self, system, degree):
        from itertools import product as iproduct

        rng = random.Random(1000 * degree + system.num_forms)
        lat = leibman_lattice(system, degree)
        d = system.num_vars
        multi = [k for k in iproduct(range(degree + 1), repeat=d) if 1 <= sum(k) <= degree]
        for _ in range(10):
            coeffs = {k: rng.randint(-5, 5) for k in multi}

            def h(point):
                total = 0
                for k, a in coeffs.items():
                    term = a
                    for x, kk in zip(point, k):
                        term *= vector_binomial((x,), kk)[0]
                    total += term
                return total

            tup = tuple(h(row) for row in system.matrix)
            assert contains(lat, tup)


class TestSerialization:
    def test_round_trip(self):
        lat = leibman_lattice(AP4, 2)
        again = lattice_from_text(lattice_to_text(lat))
        assert again.basis == lat.basis and again.ambient_dim == 4

    def test_bad_text(self):
        with pytest.raises(DimensionError):
            lattice_from_text("2 3\n1 0 0")

    def test_invalid_row_length(self):
        with pytest.raises(DimensionError):
            IntegerLattice(3, ((1, 0),))
