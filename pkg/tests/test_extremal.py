from fractions import Fraction

import numpy as np
import pytest

from linforms import BudgetError, ValidationError, make_ap_system, make_system
from linforms.cyclic import indicator, sol_discrete, sumfree_interval
from linforms.extremal import (
    AnnealingSchedule,
    ConvergenceRow,
    ConvergenceTable,
    SubsetObjective,
    as_alpha,
    convergence_experiment,
    m_discrete_exhaustive,
    m_discrete_fractional,
    m_discrete_search,
    m_torus_search,
    min_subset_size,
)
from linforms.torus import parse_spec

AP3 = make_ap_system(3)
AP4 = make_ap_system(4)
SCHUR = make_system([(1, 0), (0, 1), (1, 1)], label="schur")

FAST_SCHEDULE = AnnealingSchedule(temp_steps=8, proposals_per_temp=60)


class TestAlphaHandling:
    def test_fraction_from_float(self):
        assert as_alpha(0.4) == Fraction(2, 5)
        assert as_alpha("2/5") == Fraction(2, 5)

    def test_range_check(self):
        with pytest.raises(ValidationError):
            as_alpha(1.5)

    def test_min_subset_size_exact(self):
        assert min_subset_size(Fraction(2, 5), 5) == 2
        assert min_subset_size(Fraction(2, 5), 11) == 5
        assert min_subset_size(Fraction(1, 1), 7) == 7
        assert min_subset_size(Fraction(0, 1), 7) == 0


class TestSubsetObjective:
    def test_matches_sol_discrete(self):
        rng = np.random.default_rng(2)
        objective = SubsetObjective(AP3, 7)
        for _ in range(10):
            subset = tuple(sorted(rng.choice(7, size=3, replace=False).tolist()))
            direct = sol_discrete(indicator(7, subset), AP3).real
            assert objective.of_subset(subset) == pytest.approx(direct, abs=1e-12)

    def test_budget(self):
        with pytest.raises(BudgetError):
            SubsetObjective(AP3, 101, point_budget=100)


class TestExhaustive:
    def test_ap3_p5(self):
        cand = m_discrete_exhaustive(AP3, 5, Fraction(2, 5))
        assert cand.objective == pytest.approx(0.08, abs=1e-14)
        assert len(cand.subset) == 2
        assert cand.exact

    def test_alpha_one(self):
        cand = m_discrete_exhaustive(AP3, 5, 1)
        assert cand.objective == pytest.approx(1.0)
        assert cand.subset == (0, 1, 2, 3, 4)

    def test_alpha_zero(self):
        cand = m_discrete_exhaustive(AP3, 5, 0)
        assert cand.objective == pytest.approx(0.0)
        assert cand.subset == ()

    def test_budget_guard(self):
        with pytest.raises(BudgetError, match="m_discrete_search"):
            m_discrete_exhaustive(AP3, 41, Fraction(2, 5))

    def test_scans_all_sizes(self):
        # With alpha=3/5 on the Schur system the sumfree middle interval of
        # size 2 is infeasible, so the optimum uses a feasible size >= 3.
        cand = m_discrete_exhaustive(SCHUR, 5, Fraction(3, 5))
        assert len(cand.subset) >= 3


class TestFractional:
    def test_never_exceeds_set_restricted(self):
        sets = m_discrete_exhaustive(AP3, 5, Fraction(2, 5))
        frac = m_discrete_fractional(AP3, 5, Fraction(2, 5), levels=5)
        assert frac.objective <= sets.objective + 1e-12
        assert frac.mean >= 0.4 - 1e-12

    def test_beats_constant_when_representable(self):
        # alpha = 2/5 sits on the 5-level grid, so the constant function is
        # admissible and the minimum is at most alpha^3.
        frac = m_discrete_fractional(AP3, 5, Fraction(2, 5), levels=5)
        assert frac.objective <= (0.4 ** 3) + 1e-12

    def test_matches_sets_at_one_level(self):
        sets = m_discrete_exhaustive(AP3, 5, Fraction(2, 5))
        frac = m_discrete_fractional(AP3, 5, Fraction(2, 5), levels=1)
        assert frac.objective == pytest.approx(sets.objective, abs=1e-12)

    def test_extremes(self):
        assert m_discrete_fractional(AP3, 5, 1, levels=3).objective == pytest.approx(1.0)
        assert m_discrete_fractional(AP3, 5, 0, levels=3).objective == pytest.approx(0.0)

    def test_budget_guard(self):
        with pytest.raises(BudgetError):
            m_discrete_fractional(AP3, 31, Fraction(1, 2), levels=4)


class TestSearch:
    def test_finds_exhaustive_optimum_p5(self):
        exact = m_discrete_exhaustive(AP3, 5, Fraction(2, 5))
        found = m_discrete_search(AP3, 5, Fraction(2, 5), restarts=10, seed=1)
        assert found.objective == pytest.approx(exact.objective, abs=1e-12)
        assert not found.exact

    def test_alpha_one_is_one(self):
        cand = m_discrete_search(AP3, 101, 1, restarts=2, seed=0)
        assert cand.objective == pytest.approx(1.0)

    def test_never_beats_exhaustive(self):
        for seed in range(3):
            exact = m_discrete_exhaustive(AP3, 7, Fraction(1, 3))
            found = m_discrete_search(AP3, 7, Fraction(1, 3), restarts=4, seed=seed)
            assert found.objective >= exact.objective - 1e-12

    def test_sumfree_interval_seed_p101(self):
        # The centered interval seed is exactly the sumfree middle third, so
        # the search result cannot exceed its (zero) objective.
        target = sol_discrete(sumfree_interval(101), SCHUR).real
        cand = m_discrete_search(SCHUR, 101, Fraction(34, 101), restarts=2, seed=3)
        assert cand.objective <= target + 1e-12
        assert cand.objective == pytest.approx(0.0, abs=1e-12)


class TestTorusSearch:
    def test_alpha_one_exact(self):
        cand = m_torus_search(AP3, parse_spec("1"), 1, grid_cells=8,
                              samples=2000, seed=5, schedule=FAST_SCHEDULE,
                              search_samples=2000)
        assert cand.estimate == pytest.approx(1.0)
        assert cand.stderr == 0.0

    def test_alpha_zero_exact(self):
        cand = m_torus_search(AP3, parse_spec("1"), 0, grid_cells=8,
                              samples=2000, seed=5, schedule=FAST_SCHEDULE,
                              search_samples=2000)
        assert cand.estimate == 0.0

    def test_half_density_beats_constant(self):
        cand = m_torus_search(AP3, parse_spec("1"), Fraction(1, 2), grid_cells=32,
                              samples=50_000, seed=7, schedule=FAST_SCHEDULE,
                              search_samples=8000)
        assert cand.estimate <= 0.125 + 2 * cand.stderr
        assert cand.mean >= 0.5 - 1e-9

    def test_mean_constraint_respected(self):
        cand = m_torus_search(AP3, parse_spec("1"), Fraction(2, 5), grid_cells=16,
                              samples=5000, seed=9, schedule=FAST_SCHEDULE,
                              search_samples=4000)
        assert cand.grid.values.min() >= 0.0
        assert cand.grid.values.max() <= 1.0
        assert cand.mean >= 0.4 - 1e-9

    def test_deterministic(self):
        kwargs = dict(grid_cells=8, samples=3000, seed=11,
                      schedule=FAST_SCHEDULE, search_samples=2000)
        a = m_torus_search(AP3, parse_spec("1"), Fraction(1, 2), **kwargs)
        b = m_torus_search(AP3, parse_spec("1"), Fraction(1, 2), **kwargs)
        assert a.estimate == b.estimate
        assert np.array_equal(a.grid.values, b.grid.values)


class TestConvergence:
    def test_table_shape_and_ranges(self):
        table = convergence_experiment(
            AP3, Fraction(2, 5), [5, 7], parse_spec("1"), seed=13,
            grid_cells=8, torus_samples=4000, search_samples=2000,
        )
        assert [r.group for r in table.rows] == ["5", "7", "torus"]
        for row in table.rows:
            assert 0.0 <= row.estimate <= 1.0
        assert table.rows[0].method == "exhaustive"
        assert table.rows[0].exact

    def test_alpha_one_rows(self):
        table = convergence_experiment(
            AP3, 1, [5, 7], parse_spec("1"), seed=13,
            grid_cells=8, torus_samples=2000, search_samples=1000,
        )
        for row in table.rows:
            assert row.estimate == pytest.approx(1.0)

    def test_csv_round_trip(self):
        table = convergence_experiment(
            AP3, Fraction(2, 5), [5], parse_spec("1"), seed=1,
            grid_cells=8, torus_samples=2000, search_samples=1000,
        )
        text = table.to_csv()
        again = ConvergenceTable.from_csv(text)
        assert len(again.rows) == len(table.rows)
        for a, b in zip(again.rows, table.rows):
            assert a.estimate == b.estimate
            assert a.group == b.group and a.exact == b.exact

    def test_reproducible_modulo_timing(self):
        kwargs = dict(seed=21, grid_cells=8, torus_samples=3000, search_samples=1500)
        t1 = convergence_experiment(AP3, Fraction(2, 5), [5, 41], parse_spec("1"), **kwargs)
        t2 = convergence_experiment(AP3, Fraction(2, 5), [5, 41], parse_spec("1"), **kwargs)
        for a, b in zip(t1.rows, t2.rows):
            assert a.estimate == b.estimate and a.stderr == b.stderr
            assert a.seed == b.seed and a.method == b.method

    def test_bad_csv_header(self):
        with pytest.raises(ValidationError):
            ConvergenceTable.from_csv("a,b,c\n1,2,3\n")
