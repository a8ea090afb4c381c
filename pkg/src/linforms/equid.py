"""Balanced-map machinery: power maps, character thresholds, and orbits.

The power map x -> (x, kx, ..., k^{d-1}x) carries the circle into T^d.
Pulled back through it, a tuple character on (T^d)^t becomes a character
on T^t whose frequency vector is a polynomial in k; whether it dies on the
domain subtorus is an exact integer question about dot products with the
domain lattice generators.  Everything in this module that decides a
vanishing/non-vanishing dichotomy does so with exact integer arithmetic;
floating point appears only in sample coordinates and exponential sums.

Discrete orbits are rational-coefficient polynomial maps Z -> T^m whose
consistency (periodicity mod Z^m) is certified symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb, isqrt, log
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, DimensionError, ValidationError
from .lattice import leibman_lattice, orthogonal_complement
from .linsys import LinearFormSystem
from .torus import (
    FilteredTorusSpec,
    TupleCharacter,
    build_model,
    character_triviality_table,
    character_trivial_on_model,
    haar_chunks,
)

DEFAULT_CHAR_BUDGET = 10 ** 8
DEFAULT_POINT_BUDGET = 10 ** 9


@dataclass(frozen=True)
class PhiKMap:
    """The homomorphism x -> (x, kx, k^2 x, ..., k^(d-1) x) from T to T^d."""

    k: int
    d: int

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise ValidationError(f"need k >= 1 and d >= 1, got k={self.k}, d={self.d}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = [np.mod(self.k ** j * x, 1.0) for j in range(self.d)]
        return np.stack(cols, axis=-1)


def _integer_roots(coeffs: Sequence[int]) -> Optional[set[int]]:
    """All integer roots of an integer polynomial (ascending coefficients).

    Returns None when the polynomial is identically zero.
    """
    cs = list(coeffs)
    while cs and cs[-1] == 0:
        cs.pop()
    if not cs:
        return None
    shift = 0
    while cs[shift] == 0:
        shift += 1
    core = cs[shift:]
    roots = {0} if shift else set()
    c0 = abs(core[0])
    divs = set()
    for i in range(1, isqrt(c0) + 1):
        if c0 % i == 0:
            divs.update((i, c0 // i))
    for div in divs:
        for cand in (div, -div):
            if sum(c * cand ** e for e, c in enumerate(core)) == 0:
                roots.add(cand)
    return roots


def _pullback_coeffs(chi: TupleCharacter, generator: Sequence[int]) -> list[int]:
    """Coefficients (ascending in k) of the polynomial n(k) . generator."""
    return [
        sum(row[j] * v for row, v in zip(chi.freq, generator))
        for j in range(chi.torus_dim)
    ]


def min_k_threshold(
    chi: TupleCharacter,
    system: LinearFormSystem,
    domain_degree: int,
) -> Optional[int]:
    """Exact onset of character vanishing under the power-map pullback.

    The target is the degree-2 model of the d-dimensional torus; the
    character must be nontrivial there.  Returns the least k0 >= 1 such
    that for every k >= k0 the pulled-back frequency is non-orthogonal to
    the degree-``domain_degree`` lattice (so the domain-side integral is 0,
    matching the target side).  Returns None when the pullback is
    orthogonal for every k: the character never vanishes on the domain,
    which is the dimension-obstruction case.
    """
    d = chi.torus_dim
    target = build_model(FilteredTorusSpec((2,) * d), system)
    if chi.num_slots != system.num_forms:
        raise DimensionError(
            f"character has {chi.num_slots} slots, system has {system.num_forms} forms"
        )
    if character_trivial_on_model(chi, target):
        raise ValidationError("character is trivial on the target model")
    domain = leibman_lattice(system, domain_degree)
    common: Optional[set[int]] = None  # None means "all k so far"
    all_zero = True
    for gen in domain.basis:
        roots = _integer_roots(_pullback_coeffs(chi, gen))
        if roots is None:
            continue
        all_zero = False
        common = roots if common is None else (common & roots)
        if not common:
            return 1
    if all_zero:
        return None
    bad = [r for r in (common or set()) if r >= 1]
    return max(bad) + 1 if bad else 1


def phi_k_image_check(
    pmap: PhiKMap,
    system: LinearFormSystem,
    domain_degree: int,
    samples: int = 10_000,
    seed: int = 0,
) -> float:
    """Max violation of subtorus membership for power-map images.

    Samples the domain subtorus, applies the power map in every slot, and
    measures the circle distance of each target orthogonal-complement
    relation.  Membership is exact, so the returned value is pure float
    noise and must stay below 1e-9.
    """
    domain = build_model(FilteredTorusSpec((domain_degree,)), system)
    complement = orthogonal_complement(leibman_lattice(system, domain_degree))
    worst = 0.0
    if not complement.basis:
        return worst
    wmat = np.asarray(complement.basis, dtype=float).T  # (t, r)
    for points in haar_chunks(domain, seed, samples):
        x = points[:, :, 0]
        for j in range(pmap.d):
            y = np.mod(pmap.k ** j * x, 1.0)
            frac = np.mod(y @ wmat, 1.0)
            dist = np.minimum(frac, 1.0 - frac)
            worst = max(worst, float(dist.max()))
    return worst


@dataclass(frozen=True)
class BalanceReport:
    """Classification of all bounded-frequency characters at a fixed k."""

    k: int
    d: int
    domain_degree: int
    freq_bound: int
    total: int
    trivial_on_target: int
    vanishing_both: int
    violated: tuple[TupleCharacter, ...]

    @property
    def max_discrepancy(self) -> float:
        return 1.0 if self.violated else 0.0

    def is_violated(self, chi: TupleCharacter) -> bool:
        return any(v.freq == chi.freq for v in self.violated)


def phi_k_balance_report(
    pmap: PhiKMap,
    system: LinearFormSystem,
    domain_degree: int,
    freq_bound: int,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> BalanceReport:
    """Exact character census for the power map at one value of k.

    Every tuple character with entries in [-freq_bound, freq_bound] is
    classified as trivial on the target (both integrals 1), vanishing on
    both sides (both integrals 0), or violated (the two sides differ).
    An empty violated set certifies the character equality for every
    enumerated character at this k.
    """
    if freq_bound < 1:
        raise ValidationError("freq_bound must be >= 1")
    t, d = system.num_forms, pmap.d
    width = 2 * freq_bound + 1
    if width ** (d * t) > char_budget:
        raise BudgetError(
            f"{width}^{d * t} characters exceed the budget of {char_budget}"
        )
    target_lat = leibman_lattice(system, 2)
    domain_lat = leibman_lattice(system, domain_degree)
    cols = list(product(range(-freq_bound, freq_bound + 1), repeat=t))
    ncols = len(cols)
    cols_arr = np.asarray(cols, dtype=np.int64)
    t_mat = np.asarray(target_lat.basis, dtype=np.int64)
    d_mat = np.asarray(domain_lat.basis, dtype=np.int64)
    orth_target = np.all(cols_arr @ t_mat.T == 0, axis=1)
    dots_domain = cols_arr @ d_mat.T  # (ncols, r_domain)

    by_dot: dict[tuple[int, ...], list[int]] = {}
    for i in range(ncols):
        by_dot.setdefault(tuple(int(x) for x in dots_domain[i]), []).append(i)

    trivial_count = int(orth_target.sum()) ** d
    pullback_trivial: list[tuple[int, ...]] = []
    zero_dot = np.zeros(dots_domain.shape[1], dtype=np.int64)
    for tail in product(range(ncols), repeat=d - 1):
        need = zero_dot.copy()
        for i, j in enumerate(tail):
            need -= pmap.k ** (i + 1) * dots_domain[j]
        matches = by_dot.get(tuple(int(x) for x in need), ())
        for first in matches:
            pullback_trivial.append((first,) + tail)

    violated: list[TupleCharacter] = []
    vanish_both = 0
    pullback_set = set(pullback_trivial)
    for key in pullback_trivial:
        if all(orth_target[j] for j in key):
            continue  # trivial on target and on the pullback: consistent
        violated.append(_char_from_columns(cols, key, t, d))
    # Characters trivial on target whose pullback is NOT trivial (possible
    # only when the domain lattice is not contained in the target lattice).
    target_cols = [i for i in range(ncols) if orth_target[i]]
    for key in product(target_cols, repeat=d):
        if key not in pullback_set:
            violated.append(_char_from_columns(cols, key, t, d))
    vanish_both = width ** (d * t) - trivial_count - len(pullback_trivial) \
        + sum(1 for key in pullback_trivial if all(orth_target[j] for j in key))

    return BalanceReport(
        k=pmap.k,
        d=d,
        domain_degree=domain_degree,
        freq_bound=freq_bound,
        total=width ** (d * t),
        trivial_on_target=trivial_count,
        vanishing_both=vanish_both,
        violated=tuple(violated),
    )


def _char_from_columns(cols, key, t, d) -> TupleCharacter:
    freq = tuple(tuple(cols[key[i]][a] for i in range(d)) for a in range(t))
    return TupleCharacter(freq)


@dataclass(frozen=True)
class PolynomialOrbit:
    """A rational polynomial map Z -> T^m, one polynomial per coordinate.

    Coefficients are ascending in the exponent; every constant term must
    be 0 so the orbit starts at the origin.
    """

    torus_dim: int
    modulus: int
    coeffs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValidationError(f"modulus must be >= 1, got {self.modulus}")
        if len(self.coeffs) != self.torus_dim:
            raise DimensionError(
                f"{len(self.coeffs)} coordinate polynomials for dimension {self.torus_dim}"
            )
        frozen = []
        for cs in self.coeffs:
            cs = tuple(Fraction(c) for c in cs)
            if cs and cs[0] != 0:
                raise ValidationError("constant terms must vanish (orbit starts at 0)")
            frozen.append(cs)
        object.__setattr__(self, "coeffs", tuple(frozen))

    def degree(self, j: int) -> int:
        cs = self.coeffs[j]
        for e in range(len(cs) - 1, -1, -1):
            if cs[e] != 0:
                return e
        return 0

    def value(self, j: int, n: int) -> Fraction:
        return sum((c * n ** e for e, c in enumerate(self.coeffs[j])), Fraction(0))

    def phase_table(self) -> np.ndarray:
        """(m, p) table of g_j(r) mod 1 as floats, for r in Z_p."""
        p = self.modulus
        table = np.empty((self.torus_dim, p))
        for j in range(self.torus_dim):
            for r in range(p):
                v = self.value(j, r)
                table[j, r] = float(v - (v.numerator // v.denominator))
        return table


@dataclass(frozen=True)
class ConsistencyResult:
    ok: bool
    differences: tuple[tuple[Fraction, ...], ...]
    offending: Optional[tuple[int, int, Fraction]] = None  # (coordinate, power, value)

    def __bool__(self):
        return self.ok


def verify_consistency(orbit: PolynomialOrbit) -> ConsistencyResult:
    """Symbolic certificate that g(n + p) - g(n) has integer coefficients.

    Expands the difference exactly over the rationals; integrality of
    every coefficient (constant term included) makes the induced map
    Z_p -> T^m well defined.
    """
    p = orbit.modulus
    diffs = []
    offending = None
    for j, cs in enumerate(orbit.coeffs):
        deg = len(cs) - 1
        diff = []
        for i in range(deg + 1):
            coef = sum(
                (cs[e] * comb(e, i) * p ** (e - i) for e in range(i + 1, deg + 1)),
                Fraction(0),
            )
            diff.append(coef)
            if coef.denominator != 1 and offending is None:
                offending = (j, i, coef)
        diffs.append(tuple(diff))
    return ConsistencyResult(offending is None, tuple(diffs), offending)


@dataclass(frozen=True)
class WeylReport:
    """Exact character-sum census for a discrete orbit."""

    max_abs: float
    worst: Optional[TupleCharacter]
    tested: int
    skipped_trivial: int
    freq_bound: int
    lipschitz_rate: float = field(default=0.0)

    def __float__(self):
        return self.max_abs


def weyl_balance_test(
    orbit: PolynomialOrbit,
    spec: FilteredTorusSpec,
    system: LinearFormSystem,
    freq_bound: int,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> WeylReport:
    """Maximum modulus of the orbit's character sums across the system.

    For every tuple character nontrivial on the target model, computes the
    full average of the character along the orbit tuple over Z_p^D.  A
    small maximum witnesses balance at this frequency resolution; the
    reported rate log(freq_bound + 1)/freq_bound is the truncation decay
    factor that converts character bounds into Lipschitz test bounds.
    """
    if freq_bound < 1:
        raise ValidationError("freq_bound must be >= 1")
    if orbit.torus_dim != spec.dim:
        raise DimensionError(f"orbit maps into T^{orbit.torus_dim}, spec is T^{spec.dim}")
    for j, d in enumerate(spec.degrees):
        if orbit.degree(j) > d:
            raise ValidationError(
                f"coordinate {j} has degree {orbit.degree(j)} > filtration degree {d}"
            )
    consistency = verify_consistency(orbit)
    if not consistency.ok:
        raise ValidationError(
            f"orbit is not consistent: coefficient {consistency.offending} is not an integer"
        )
    p = orbit.modulus
    t, dvars = system.num_forms, system.num_vars
    m = spec.dim
    if p ** dvars > point_budget:
        raise BudgetError(f"p^D = {p}^{dvars} exceeds the point budget of {point_budget}")
    width = 2 * freq_bound + 1
    if width ** (t * m) > char_budget:
        raise BudgetError(
            f"{width}^{t * m} characters exceed the budget of {char_budget}"
        )
    model = build_model(spec, system)
    phases = orbit.phase_table()  # (m, p)

    grid = np.indices((p,) * dvars).reshape(dvars, -1)
    form_idx = [
        np.mod(sum(int(c) * grid[j] for j, c in enumerate(row)), p)
        for row in system.matrix
    ]

    trivial = character_triviality_table(model, freq_bound).ravel()
    max_abs = -1.0
    worst = None
    tested = 0
    skipped = 0
    shape = (width,) * (t * m)
    for flat_index, idx in enumerate(np.ndindex(shape)):
        if trivial[flat_index]:
            skipped += 1
            continue
        freq = tuple(
            tuple(idx[a * m + j] - freq_bound for j in range(m)) for a in range(t)
        )
        total = np.ones(form_idx[0].shape, dtype=complex)
        for a in range(t):
            row = np.asarray(freq[a], dtype=float)
            if not row.any():
                continue
            phase_a = row @ phases  # (p,)
            total = total * np.exp(2j * np.pi * phase_a[form_idx[a]])
        value = abs(complex(total.sum())) / p ** dvars
        tested += 1
        if value > max_abs:
            max_abs = value
            worst = TupleCharacter(freq)
    rate = log(freq_bound + 1) / freq_bound
    return WeylReport(
        max_abs=max(max_abs, 0.0),
        worst=worst,
        tested=tested,
        skipped_trivial=skipped,
        freq_bound=freq_bound,
        lipschitz_rate=rate,
    )
