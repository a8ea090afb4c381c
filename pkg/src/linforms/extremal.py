"""Extremal experiments: minimal form-system averages on Z_p and on tori.

The discrete minimizer enumerates subsets exactly when the count fits the
budget and otherwise falls back to seeded local search; both paths share a
vectorized subset objective.  The torus minimizer anneals grid-function
cell values under the mean constraint, scoring proposals against a fixed
common-random-number sample set so the optimizer cannot exploit Monte
Carlo noise, and re-evaluates the final candidate with fresh samples.

Every search result is an upper bound on the infimum and is flagged as
such; only the exhaustive path returns certified minima.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, exp
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BudgetError, ValidationError
from .linsys import LinearFormSystem
from .torus import FilteredTorusSpec, GridFunction, build_model, haar_chunks, mc_average

AlphaLike = Union[Fraction, float, int, str]

DEFAULT_SUBSET_BUDGET = 10 ** 7
DEFAULT_POINT_BUDGET = 10 ** 9


def as_alpha(alpha: AlphaLike) -> Fraction:
    """Normalize a density parameter to an exact Fraction in [0, 1]."""
    if isinstance(alpha, float):
        value = Fraction(alpha).limit_denominator(10 ** 6)
    else:
        value = Fraction(alpha)
    if not 0 <= value <= 1:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")
    return value


def min_subset_size(alpha: Fraction, p: int) -> int:
    """ceil(alpha * p), computed exactly."""
    num = alpha.numerator * p
    den = alpha.denominator
    return -((-num) // den)


class SubsetObjective:
    """Vectorized evaluator of the form-system average of subset indicators."""

    def __init__(self, system: LinearFormSystem, p: int,
                 point_budget: int = DEFAULT_POINT_BUDGET):
        if p < 1:
            raise ValidationError(f"modulus must be >= 1, got {p}")
        if p ** system.num_vars > point_budget:
            raise BudgetError(
                f"p^D = {p}^{system.num_vars} exceeds the point budget of {point_budget}"
            )
        self.system = system
        self.p = p
        grid = np.indices((p,) * system.num_vars).reshape(system.num_vars, -1)
        self.slot_idx = [
            np.mod(sum(int(c) * grid[j] for j, c in enumerate(row)), p)
            for row in system.matrix
        ]
        self.num_points = self.slot_idx[0].size
        self._points_touching = None

    def of_mask(self, mask: np.ndarray) -> float:
        prod = mask[self.slot_idx[0]].astype(float)
        for idx in self.slot_idx[1:]:
            prod = prod * mask[idx]
        return float(prod.mean())

    def of_masks(self, masks: np.ndarray) -> np.ndarray:
        """Objectives of a (batch, p) stack of 0/1 masks."""
        prod = masks[:, self.slot_idx[0]].astype(float)
        for idx in self.slot_idx[1:]:
            prod = prod * masks[:, idx]
        return prod.mean(axis=1)

    def of_subset(self, subset: Sequence[int]) -> float:
        mask = np.zeros(self.p)
        mask[list(subset)] = 1.0
        return self.of_mask(mask)

    def point_products(self, mask: np.ndarray) -> np.ndarray:
        prod = mask[self.slot_idx[0]].astype(float)
        for idx in self.slot_idx[1:]:
            prod = prod * mask[idx]
        return prod

    @property
    def points_touching(self) -> list[np.ndarray]:
        """For each residue v, the grid points where some form evaluates to v."""
        if self._points_touching is None:
            t = len(self.slot_idx)
            flat = np.concatenate(self.slot_idx)
            point_of = np.tile(np.arange(self.num_points), t)
            order = np.argsort(flat, kind="stable")
            sorted_vals = flat[order]
            pts = point_of[order]
            bounds = np.searchsorted(sorted_vals, np.arange(self.p + 1))
            self._points_touching = [
                np.unique(pts[bounds[v]:bounds[v + 1]]) for v in range(self.p)
            ]
        return self._points_touching


@dataclass(frozen=True)
class DiscreteCandidate:
    modulus: int
    subset: tuple[int, ...]
    objective: float
    provenance: str
    exact: bool

    @property
    def density(self) -> float:
        return len(self.subset) / self.modulus


@dataclass(frozen=True)
class FractionalCandidate:
    """Minimizer over functions Z_p -> {0, 1/q, ..., 1} with mean >= alpha."""

    modulus: int
    levels: int
    values: tuple[int, ...]  # numerators over `levels`
    objective: float
    exact: bool

    @property
    def mean(self) -> float:
        return sum(self.values) / (self.levels * self.modulus)


def m_discrete_exhaustive(
    system: LinearFormSystem,
    p: int,
    alpha: AlphaLike,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> DiscreteCandidate:
    """Certified minimum of the subset average over all |A| >= ceil(alpha p).

    All admissible sizes are scanned: the objective is not multilinear (the
    degenerate diagonal contributes), so restricting to the smallest size
    is not a priori safe.
    """
    alpha = as_alpha(alpha)
    smin = min_subset_size(alpha, p)
    total = sum(comb(p, s) for s in range(smin, p + 1))
    if total > subset_budget:
        raise BudgetError(
            f"{total} subsets exceed the budget of {subset_budget}; "
            "use m_discrete_search instead"
        )
    objective = SubsetObjective(system, p, point_budget)
    best_obj = None
    best_subset: tuple[int, ...] = ()
    batch = []

    def flush():
        nonlocal best_obj, best_subset
        if not batch:
            return
        masks = np.zeros((len(batch), p))
        for i, subset in enumerate(batch):
            masks[i, list(subset)] = 1.0
        values = objective.of_masks(masks)
        i = int(np.argmin(values))
        if best_obj is None or values[i] < best_obj:
            best_obj = float(values[i])
            best_subset = batch[i]
        batch.clear()

    for s in range(smin, p + 1):
        for subset in combinations(range(p), s):
            batch.append(subset)
            if len(batch) >= 1024:
                flush()
    flush()
    return DiscreteCandidate(p, best_subset, best_obj, "exhaustive", exact=True)


def m_discrete_fractional(
    system: LinearFormSystem,
    p: int,
    alpha: AlphaLike,
    levels: int = 4,
    value_budget: int = 10 ** 6,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> FractionalCandidate:
    """Certified minimum over q-level fractional functions on Z_p.

    Values range over {0, 1/q, ..., 1}; the mean constraint is enforced
    exactly on the level numerators.  Indicators are the q-level functions
    with values in {0, 1}, so this minimum never exceeds the set-restricted
    one.
    """
    alpha = as_alpha(alpha)
    if levels < 1:
        raise ValidationError(f"need at least 1 level, got {levels}")
    total = (levels + 1) ** p
    if total > value_budget:
        raise BudgetError(
            f"{levels + 1}^{p} fractional functions exceed the budget of {value_budget}"
        )
    # mean >= alpha  <=>  sum of numerators >= alpha * levels * p, exactly.
    num = alpha.numerator * levels * p
    min_sum = -((-num) // alpha.denominator)
    objective = SubsetObjective(system, p, point_budget)
    best_obj = None
    best_values: tuple[int, ...] = ()
    batch: list[tuple[int, ...]] = []

    def flush():
        nonlocal best_obj, best_values
        if not batch:
            return
        masks = np.asarray(batch, dtype=float) / levels
        values = objective.of_masks(masks)
        i = int(np.argmin(values))
        if best_obj is None or values[i] < best_obj:
            best_obj = float(values[i])
            best_values = batch[i]
        batch.clear()

    from itertools import product as iproduct

    for values in iproduct(range(levels + 1), repeat=p):
        if sum(values) < min_sum:
            continue
        batch.append(values)
        if len(batch) >= 1024:
            flush()
    flush()
    if best_obj is None:
        raise ValidationError("mean constraint infeasible on this level grid")
    return FractionalCandidate(p, levels, best_values, best_obj, exact=True)


def _interval_seeds(p: int, s: int) -> list[tuple[int, ...]]:
    initial = tuple(range(s))
    centered_start = (p - s + 1) // 2
    centered = tuple(range(centered_start, centered_start + s))
    return [initial, centered] if centered != initial else [initial]


def _descend(objective: SubsetObjective, subset: tuple[int, ...],
             max_moves: int) -> tuple[tuple[int, ...], float]:
    """Best-improvement single-swap descent from a starting subset.

    Swap candidates are scored incrementally: a one-in-one-out swap only
    changes the per-point products on the grid points that touch either
    swapped residue.
    """
    p = objective.p
    touching = objective.points_touching
    current = set(subset)
    mask = np.zeros(p)
    mask[list(current)] = 1.0
    products = objective.point_products(mask)
    current_sum = float(products.sum())
    for _ in range(max_moves):
        inside = sorted(current)
        outside = [x for x in range(p) if x not in current]
        if not inside or not outside:
            break
        best_delta = 0.0
        best_swap = None
        best_update = None
        for out_el in inside:
            mask[out_el] = 0.0
            for in_el in outside:
                mask[in_el] = 1.0
                seg = np.union1d(touching[out_el], touching[in_el])
                new = mask[objective.slot_idx[0][seg]]
                for idx in objective.slot_idx[1:]:
                    new = new * mask[idx[seg]]
                delta = float(new.sum() - products[seg].sum())
                if delta < best_delta - 1e-12:
                    best_delta = delta
                    best_swap = (out_el, in_el)
                    best_update = (seg, new)
                mask[in_el] = 0.0
            mask[out_el] = 1.0
        if best_swap is None:
            break
        out_el, in_el = best_swap
        current.remove(out_el)
        current.add(in_el)
        mask[out_el] = 0.0
        mask[in_el] = 1.0
        seg, new = best_update
        products[seg] = new
        current_sum += best_delta
    return tuple(sorted(current)), current_sum / objective.num_points


def m_discrete_search(
    system: LinearFormSystem,
    p: int,
    alpha: AlphaLike,
    restarts: int = 10,
    steps: int = 200,
    seed: int = 0,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> DiscreteCandidate:
    """Heuristic upper bound: interval seeds plus multi-start swap descent.

    The initial segment and the centered interval are always tried, so the
    result never exceeds either interval candidate.
    """
    alpha = as_alpha(alpha)
    s = min_subset_size(alpha, p)
    objective = SubsetObjective(system, p, point_budget)
    rng = np.random.default_rng(seed)
    starts: list[tuple[str, tuple[int, ...]]] = [
        ("interval", seed_set) for seed_set in _interval_seeds(p, s)
    ]
    for _ in range(restarts):
        starts.append(("local-search",
                       tuple(sorted(rng.choice(p, size=s, replace=False).tolist()))))
    best: Optional[DiscreteCandidate] = None
    for provenance, start in starts:
        subset, value = _descend(objective, start, steps)
        if best is None or value < best.objective:
            best = DiscreteCandidate(p, subset, value, provenance, exact=False)
    return best


@dataclass(frozen=True)
class AnnealingSchedule:
    temp_steps: int = 40
    proposals_per_temp: int = 200
    t_start: float = 0.1
    t_end: float = 1e-4
    sigma: float = 0.2

    def temperatures(self) -> np.ndarray:
        return np.geomspace(self.t_start, self.t_end, self.temp_steps)


@dataclass(frozen=True)
class TorusCandidate:
    grid: GridFunction
    mean: float
    estimate: float
    stderr: float
    provenance: str

    def __post_init__(self):
        if np.iscomplexobj(self.grid.values):
            raise ValidationError("torus candidates are real-valued")


def m_torus_search(
    system: LinearFormSystem,
    spec: FilteredTorusSpec,
    alpha: AlphaLike,
    grid_cells: int = 16,
    samples: int = 100_000,
    seed: int = 0,
    schedule: Optional[AnnealingSchedule] = None,
    search_samples: int = 20_000,
) -> TorusCandidate:
    """Annealed upper bound for the minimal torus average at mean >= alpha.

    Proposals bump one grid cell and are clipped into the feasible slab, so
    the mean constraint holds throughout.  Scoring reuses one fixed sample
    set (common random numbers); the returned estimate comes from a fresh
    evaluation, and the constant-alpha grid is kept as a fallback seed that
    the result never exceeds.
    """
    alpha = as_alpha(alpha)
    if grid_cells < 2:
        raise ValidationError(f"need at least 2 cells per axis, got {grid_cells}")
    schedule = schedule or AnnealingSchedule()
    model = build_model(spec, system)
    t, m = model.num_slots, model.torus_dim
    ncells = grid_cells ** m
    alpha_f = float(alpha)

    # Fixed scoring samples, flattened to per-slot cell indices.
    pts = np.concatenate(list(haar_chunks(model, seed, search_samples)), axis=0)
    idx = np.empty((t, search_samples), dtype=np.int64)
    for a in range(t):
        flat = np.zeros(search_samples, dtype=np.int64)
        for j in range(m):
            axis = np.minimum((pts[:, a, j] * grid_cells).astype(np.int64),
                              grid_cells - 1)
            flat = flat * grid_cells + axis
        idx[a] = flat
    affected = [np.unique(np.nonzero((idx == c).any(axis=0))[0]) for c in range(ncells)]

    rng = np.random.default_rng(seed + 1)
    state = np.full(ncells, alpha_f)
    mean = alpha_f
    products = np.ones(search_samples)
    for a in range(t):
        products *= state[idx[a]]
    obj_sum = float(products.sum())

    def recompute(cells_hit, values):
        prod = np.ones(cells_hit.size)
        for a in range(t):
            prod *= values[idx[a][cells_hit]]
        return prod

    for temp in schedule.temperatures():
        for _ in range(schedule.proposals_per_temp):
            c = int(rng.integers(ncells))
            slack = (mean - alpha_f) * ncells
            lo = max(0.0, state[c] - slack)
            w = float(np.clip(state[c] + rng.normal(0.0, schedule.sigma), lo, 1.0))
            if w == state[c]:
                continue
            hit = affected[c]
            old_vals = products[hit]
            new_state_c, saved = w, state[c]
            state[c] = new_state_c
            new_vals = recompute(hit, state)
            delta = float(new_vals.sum() - old_vals.sum())
            accept = delta <= 0 or rng.random() < exp(-delta / (temp * search_samples))
            if accept:
                products[hit] = new_vals
                obj_sum += delta
                mean += (w - saved) / ncells
            else:
                state[c] = saved

    shape = (grid_cells,) * m
    annealed = GridFunction(m, grid_cells, state.reshape(shape))
    est, err = mc_average(annealed, model, samples=samples, seed=seed + 2)
    candidates = [
        TorusCandidate(annealed, float(state.mean()), float(est.real), err, "annealed")
    ]
    constant = GridFunction(m, grid_cells, np.full(shape, alpha_f))
    candidates.append(
        TorusCandidate(constant, alpha_f, alpha_f ** t, 0.0, "constant-seed")
    )
    return min(candidates, key=lambda cand: cand.estimate)


@dataclass(frozen=True)
class ConvergenceRow:
    group: str
    alpha: str
    system: str
    method: str
    estimate: float
    stderr: float
    exact: bool
    seed: int
    seconds: float


CSV_COLUMNS = ("group", "alpha", "system", "method", "estimate", "stderr",
               "exact", "seed", "seconds")


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)

    def append(self, row: ConvergenceRow):
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.group, r.alpha, r.system, r.method,
                repr(r.estimate), repr(r.stderr),
                int(r.exact), r.seed, f"{r.seconds:.3f}",
            ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != list(CSV_COLUMNS):
            raise ValidationError(f"unexpected CSV header {header}")
        table = cls()
        for parts in reader:
            if not parts:
                continue
            table.append(ConvergenceRow(
                group=parts[0], alpha=parts[1], system=parts[2], method=parts[3],
                estimate=float(parts[4]), stderr=float(parts[5]),
                exact=bool(int(parts[6])), seed=int(parts[7]),
                seconds=float(parts[8]),
            ))
        return table


def convergence_experiment(
    system: LinearFormSystem,
    alpha: AlphaLike,
    primes: Sequence[int],
    spec: FilteredTorusSpec,
    seed: int = 0,
    subset_budget: int = DEFAULT_SUBSET_BUDGET,
    point_budget: int = DEFAULT_POINT_BUDGET,
    restarts: int = 10,
    steps: int = 200,
    grid_cells: int = 16,
    torus_samples: int = 200_000,
    search_samples: int = 20_000,
) -> ConvergenceTable:
    """One discrete row per prime (exhaustive when it fits, search otherwise)
    plus a torus row, with per-row seeds derived deterministically."""
    alpha = as_alpha(alpha)
    label = system.label or f"{system.num_forms}x{system.num_vars}"
    seeds = [int(s.generate_state(1)[0]) for s in
             np.random.SeedSequence(seed).spawn(len(primes) + 1)]
    table = ConvergenceTable()
    for i, p in enumerate(primes):
        smin = min_subset_size(alpha, p)
        total = sum(comb(p, s) for s in range(smin, p + 1))
        start = time.perf_counter()
        if total <= subset_budget and p ** system.num_vars <= point_budget:
            cand = m_discrete_exhaustive(system, p, alpha, subset_budget, point_budget)
            method = "exhaustive"
        else:
            cand = m_discrete_search(system, p, alpha, restarts, steps,
                                     seeds[i], point_budget)
            method = "search"
        elapsed = time.perf_counter() - start
        table.append(ConvergenceRow(
            group=str(p), alpha=str(alpha), system=label, method=method,
            estimate=cand.objective, stderr=0.0, exact=cand.exact,
            seed=seeds[i], seconds=elapsed,
        ))
    start = time.perf_counter()
    torus = m_torus_search(system, spec, alpha, grid_cells=grid_cells,
                           samples=torus_samples, seed=seeds[-1],
                           search_samples=search_samples)
    elapsed = time.perf_counter() - start
    table.append(ConvergenceRow(
        group="torus", alpha=str(alpha), system=label, method="anneal",
        estimate=torus.estimate, stderr=torus.stderr, exact=False,
        seed=seeds[-1], seconds=elapsed,
    ))
    return table
