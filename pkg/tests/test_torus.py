import numpy as np
import pytest

from linforms import (
    BudgetError,
    DimensionError,
    ValidationError,
    make_ap_system,
    make_cube_system,
    make_trivial_system,
)
from linforms.torus import (
    FilteredTorusSpec,
    GridFunction,
    TrigPolynomial,
    TupleCharacter,
    build_model,
    character_triviality_table,
    character_trivial_on_model,
    exact_trig_average,
    fourier_truncate,
    grid_from_text,
    grid_to_text,
    mc_average,
    mc_character_means,
    parse_spec,
    sample_haar,
    trig_from_text,
    trig_to_text,
)

AP3 = make_ap_system(3)
AP4 = make_ap_system(4)
U2 = make_cube_system(2)

COS1 = TrigPolynomial(2, (((0, 0), 0.5), ((1, 0), 0.25), ((-1, 0), 0.25)))


def circle_dist(x):
    frac = np.mod(x, 1.0)
    return np.minimum(frac, 1.0 - frac)


class TestSpec:
    def test_parse(self):
        assert parse_spec("1,2").degrees == (1, 2)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            FilteredTorusSpec(())
        with pytest.raises(ValidationError):
            FilteredTorusSpec((1, 0))
        with pytest.raises(ValidationError):
            parse_spec("1,x")


class TestBuildModel:
    def test_ap4_dimensions(self):
        assert build_model(parse_spec("1,2"), AP4).dimension == 5
        assert build_model(parse_spec("1"), AP4).dimension == 2
        assert build_model(parse_spec("2"), AP4).dimension == 3

    def test_product_filtration_splits(self):
        for system in (AP3, AP4, U2, make_trivial_system()):
            d12 = build_model(parse_spec("1,2"), system).dimension
            d1 = build_model(parse_spec("1"), system).dimension
            d2 = build_model(parse_spec("2"), system).dimension
            assert d12 == d1 + d2

    def test_zero_form_rejected(self):
        from linforms import make_system_relaxed

        bad = make_system_relaxed([(1, 0), (0, 0)])
        with pytest.raises(ValidationError):
            build_model(parse_spec("1"), bad)


class TestSampleHaar:
    def test_uniform_on_circle(self):
        model = build_model(parse_spec("1"), make_trivial_system())
        pts = sample_haar(model, seed=5, count=100_000)
        assert pts.shape == (100_000, 1, 1)
        mean = np.mean(np.exp(2j * np.pi * pts[:, 0, 0]))
        assert abs(mean) <= 0.02

    def test_trivial_character_averages_to_one(self):
        model = build_model(parse_spec("1"), AP3)
        pts = sample_haar(model, seed=2, count=4096)
        chi = TupleCharacter(((1,), (-2,), (1,)))  # orthogonal to both basis rows
        assert character_trivial_on_model(chi, model)
        mean = np.mean(chi.evaluate(pts))
        assert abs(mean - 1.0) < 1e-12

    def test_ap4_second_differences_vanish(self):
        model = build_model(parse_spec("1"), AP4)
        pts = sample_haar(model, seed=9, count=20_000)[:, :, 0]
        r1 = pts[:, 0] - 2 * pts[:, 1] + pts[:, 2]
        r2 = pts[:, 1] - 2 * pts[:, 2] + pts[:, 3]
        assert circle_dist(r1).max() <= 1e-9
        assert circle_dist(r2).max() <= 1e-9

    def test_deterministic_and_chunk_stable(self):
        model = build_model(parse_spec("1,2"), AP3)
        a = sample_haar(model, seed=7, count=70_000)
        b = sample_haar(model, seed=7, count=70_000)
        assert np.array_equal(a, b)
        first_chunk = sample_haar(model, seed=7, count=65_536)
        assert np.array_equal(a[:65_536], first_chunk)

    def test_count_validation(self):
        model = build_model(parse_spec("1"), AP3)
        with pytest.raises(ValidationError):
            sample_haar(model, seed=1, count=0)


class TestCharacterTriviality:
    def test_zero_character(self):
        model = build_model(parse_spec("1"), AP3)
        assert character_trivial_on_model(TupleCharacter(((0,), (0,), (0,))), model)

    def test_second_difference_character(self):
        model = build_model(parse_spec("1"), AP3)
        assert character_trivial_on_model(TupleCharacter(((1,), (-2,), (1,))), model)

    def test_sum_character_not_trivial(self):
        model = build_model(parse_spec("1"), AP3)
        assert not character_trivial_on_model(TupleCharacter(((1,), (1,), (1,))), model)

    def test_dimension_mismatch(self):
        model = build_model(parse_spec("1"), AP3)
        with pytest.raises(DimensionError):
            character_trivial_on_model(TupleCharacter(((1, 0), (0, 0), (0, 0))), model)


class TestExactTrigAverage:
    def test_constant(self):
        model = build_model(parse_spec("1,2"), AP4)
        one = TrigPolynomial(2, (((0, 0), 1.0),))
        assert exact_trig_average(one, model) == pytest.approx(1.0)

    def test_cosine_average_on_ap4(self):
        model = build_model(parse_spec("1,2"), AP4)
        value = exact_trig_average(COS1, model)
        assert value.real == pytest.approx(9 / 128, abs=1e-12)
        assert value.imag == pytest.approx(0.0, abs=1e-12)

    def test_conjugation_pattern_kills_u2_character(self):
        f = TrigPolynomial(1, (((1,), 1.0),))
        deg2 = build_model(parse_spec("2"), U2)
        assert exact_trig_average(f, deg2, pattern=(1, -1, -1, 1)) == 0
        deg1 = build_model(parse_spec("1"), U2)
        assert exact_trig_average(f, deg1, pattern=(1, -1, -1, 1)) == pytest.approx(1.0)

    def test_budget_guard(self):
        model = build_model(parse_spec("1,2"), AP4)
        f = TrigPolynomial(2, tuple(((k, 0), 0.1) for k in range(-5, 6)))
        with pytest.raises(BudgetError):
            exact_trig_average(f, model, term_budget=100)

    def test_pattern_validation(self):
        model = build_model(parse_spec("1"), AP3)
        f = TrigPolynomial(1, (((0,), 1.0),))
        with pytest.raises(ValidationError):
            exact_trig_average(f, model, pattern=(1, 1))
        with pytest.raises(ValidationError):
            exact_trig_average(f, model, pattern=(1, 2, 1))


class TestMcAverage:
    def test_constant_function(self):
        model = build_model(parse_spec("1"), AP3)
        est, err = mc_average(lambda x: np.ones(x.shape[0]), model, samples=1000, seed=3)
        assert est == pytest.approx(1.0)
        assert err == 0.0

    def test_matches_exact_on_cosine(self):
        model = build_model(parse_spec("1,2"), AP4)
        est, err = mc_average(COS1, model, samples=120_000, seed=11)
        assert abs(est - 9 / 128) <= 4 * err

    def test_indicator_mean(self):
        model = build_model(parse_spec("1,2"), make_trivial_system())
        vals = np.zeros((8, 8))
        vals[:4, :] = 1.0  # indicator of [0, 1/2) x T
        grid = GridFunction(2, 8, vals)
        est, err = mc_average(grid, model, samples=50_000, seed=21)
        assert abs(est - 0.5) <= 3 * err + 1e-12

    def test_exact_vs_mc_random_trig(self):
        rng = np.random.default_rng(17)
        model = build_model(parse_spec("1"), AP3)
        for trial in range(4):
            terms = []
            for k in range(-2, 3):
                c = complex(rng.normal(), rng.normal()) * 0.3
                terms.append(((k,), c))
            poly = TrigPolynomial(1, tuple(terms))
            exact = exact_trig_average(poly, model)
            est, err = mc_average(poly, model, samples=60_000, seed=100 + trial)
            assert abs(est - exact) <= 4 * err + 1e-9


class TestFourierTruncate:
    def test_single_character(self):
        q = 64
        x = np.arange(q) / q
        grid = GridFunction(1, q, np.exp(2j * np.pi * x))
        poly, sup_err = fourier_truncate(grid, 4)
        coeffs = dict(poly.terms)
        assert abs(coeffs[(1,)] - (1 - 1 / 5)) <= 1e-6
        assert sup_err <= 0.25

    def test_constant(self):
        grid = GridFunction(1, 16, np.full(16, 0.7))
        poly, sup_err = fourier_truncate(grid, 2)
        assert [f for f, c in poly.terms] == [(0,)]
        assert poly.mean_term() == pytest.approx(0.7)
        assert sup_err <= 1e-12

    def test_step_function(self):
        q = 64
        vals = (np.arange(q) < q // 2).astype(float)
        poly, sup_err = fourier_truncate(GridFunction(1, q, vals), 8)
        assert abs(poly.mean_term() - 0.5) <= 1e-6
        assert sup_err <= 0.6

    def test_resolution_guard(self):
        grid = GridFunction(1, 8, np.zeros(8))
        with pytest.raises(ValidationError):
            fourier_truncate(grid, 5)


class TestCharacterDichotomy:
    def test_means_match_triviality(self):
        model = build_model(parse_spec("1,2"), AP3)
        bound = 1
        n = 30_000
        trivial = character_triviality_table(model, bound)
        means = mc_character_means(model, bound, samples=n, seed=41)
        assert means.shape == trivial.shape
        tol = 4 / np.sqrt(n)
        target = trivial.astype(float)
        assert np.max(np.abs(means - target)) <= tol

    def test_random_characters_small_models(self):
        rng = np.random.default_rng(8)
        n = 20_000
        tol = 4 / np.sqrt(n)
        for system, spec in ((U2, "2"), (AP4, "1"), (AP3, "1,2")):
            model = build_model(parse_spec(spec), system)
            pts = sample_haar(model, seed=77, count=n)
            for _ in range(12):
                freq = rng.integers(-3, 4, size=(model.num_slots, model.torus_dim))
                chi = TupleCharacter(tuple(tuple(int(x) for x in row) for row in freq))
                target = 1.0 if character_trivial_on_model(chi, model) else 0.0
                mean = np.mean(chi.evaluate(pts))
                assert abs(mean - target) <= tol


class TestSerialization:
    def test_grid_round_trip(self):
        grid = GridFunction(2, 3, np.arange(9, dtype=float).reshape(3, 3) / 10)
        again = grid_from_text(grid_to_text(grid))
        assert again.dim == 2 and again.cells == 3
        assert np.array_equal(again.values, grid.values)

    def test_grid_bad_text(self):
        with pytest.raises(ValidationError):
            grid_from_text("2 3\n1 2 3")
        with pytest.raises(ValidationError):
            grid_from_text("")

    def test_trig_round_trip(self):
        again = trig_from_text(trig_to_text(COS1))
        assert again.terms == COS1.terms

    def test_trig_bad_text(self):
        with pytest.raises(ValidationError):
            trig_from_text("1 2\n")
        with pytest.raises(ValidationError):
            trig_from_text("")

    def test_grid_value_lookup_convention(self):
        vals = np.array([[1.0, 2.0], [3.0, 4.0]])
        grid = GridFunction(2, 2, vals)
        pts = np.array([[0.1, 0.6], [0.9, 0.1]])
        assert np.array_equal(grid(pts), np.array([2.0, 3.0]))
