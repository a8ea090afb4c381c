"""Exact averages over Z_N across systems of linear forms, and Gowers norms.

Discrete averages are full brute-force sums over Z_N^D (guarded by an
evaluation budget), accumulated slab-by-slab in the first variable with
compensated (Kahan) addition of the slab totals, so results are bitwise
reproducible for a fixed N regardless of scheduling.

The U^2/U^3 norms are computed by the multiplicative difference recursion;
the cube-system identity  ||f||_{U^d}^{2^d} = alternating cube average  is
kept as a cross-check rather than an implementation shortcut.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BudgetError, ValidationError
from .linsys import LinearFormSystem

logger = logging.getLogger(__name__)

DEFAULT_POINT_BUDGET = 10 ** 9

MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24 (covers 2^63)."""
    if n < 2:
        return False
    for p in MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class CyclicFunction:
    """A function Z_N -> C stored as a length-N value table."""

    modulus: int
    values: np.ndarray
    bounded: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if self.modulus < 1:
            raise ValidationError(f"modulus must be >= 1, got {self.modulus}")
        if vals.shape != (self.modulus,):
            raise ValidationError(
                f"value table has shape {vals.shape}, expected ({self.modulus},)"
            )
        if self.bounded and np.any(np.abs(vals) > 1 + 1e-12):
            raise ValidationError("bounded flag set but some |value| exceeds 1")
        object.__setattr__(self, "values", vals)

    def is_real_unit_range(self) -> bool:
        return bool(
            np.all(np.abs(self.values.imag) == 0)
            and np.all(self.values.real >= 0.0)
            and np.all(self.values.real <= 1.0)
        )


def constant_function(modulus: int, value: complex) -> CyclicFunction:
    return CyclicFunction(modulus, np.full(modulus, value, dtype=complex),
                          bounded=abs(value) <= 1)


def indicator(modulus: int, subset: Sequence[int]) -> CyclicFunction:
    vals = np.zeros(modulus, dtype=complex)
    for x in subset:
        vals[x % modulus] = 1.0
    return CyclicFunction(modulus, vals, bounded=True)


def quadratic_phase(p: int) -> CyclicFunction:
    """x -> e(x^2/p) on Z_p; p must be prime."""
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    x = np.arange(p)
    return CyclicFunction(p, np.exp(2j * np.pi * (x * x % p) / p), bounded=True)


def sumfree_interval(p: int) -> CyclicFunction:
    """Indicator of the open middle-third interval p/3 < x < 2p/3 in Z_p.

    The endpoints are strict integer inequalities, so the set is exactly
    sumfree: x + y = z has no solutions inside it.
    """
    if p < 5:
        raise ValidationError(f"need p >= 5, got {p}")
    lo = p // 3 + 1
    hi = (2 * p - 1) // 3
    return indicator(p, range(lo, hi + 1))


@dataclass(frozen=True)
class ConjugationPattern:
    """Per-form conjugation signs: +1 plain, -1 conjugated."""

    signs: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(x) for x in self.signs)
        object.__setattr__(self, "signs", s)
        if any(x not in (-1, 1) for x in s):
            raise ValidationError("pattern entries must be +1 or -1")


def alternating_pattern(system: LinearFormSystem) -> ConjugationPattern:
    """The cube-average pattern (-1)^{|v|} for a system with rows (1, v).

    Only defined for 0/1 cube-shaped systems.
    """
    for row in system.matrix:
        if row[0] != 1 or any(x not in (0, 1) for x in row[1:]):
            raise ValidationError("alternating pattern needs rows of the form (1, v in {0,1}^d)")
    return ConjugationPattern(tuple(1 - 2 * (sum(row[1:]) % 2) for row in system.matrix))


PatternLike = Union[ConjugationPattern, Sequence[int], None]


def _pattern_signs(pattern: PatternLike, t: int) -> tuple[int, ...]:
    if pattern is None:
        return (1,) * t
    signs = pattern.signs if isinstance(pattern, ConjugationPattern) else tuple(int(x) for x in pattern)
    if len(signs) != t:
        raise ValidationError(f"pattern length {len(signs)}, system has {t} forms")
    if any(s not in (-1, 1) for s in signs):
        raise ValidationError("pattern entries must be +1 or -1")
    return signs


def _kahan_sum(values) -> complex:
    total = 0j
    comp = 0j
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def sol_discrete(
    f: CyclicFunction,
    system: LinearFormSystem,
    pattern: PatternLike = None,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> complex:
    """Exact brute-force average of prod_a f(form_a(n)) over n in Z_N^D."""
    n_mod = f.modulus
    t, d = system.num_forms, system.num_vars
    if n_mod ** d > point_budget:
        hint = ""
        if (system.label or "").startswith("cube:"):
            hint = "; for cube systems the gowers recursion is the fast path"
        raise BudgetError(
            f"N^D = {n_mod}^{d} exceeds the point budget of {point_budget}{hint}"
        )
    signs = _pattern_signs(pattern, t)
    tables = [f.values if s == 1 else np.conj(f.values) for s in signs]

    # Mesh over variables 2..D, flattened; variable 1 indexes the slabs.
    if d > 1:
        rest = np.indices((n_mod,) * (d - 1)).reshape(d - 1, -1)
        base = [
            np.mod(sum(int(row[j + 1]) * rest[j] for j in range(d - 1)), n_mod)
            for row in system.matrix
        ]
    else:
        base = [np.zeros(1, dtype=np.int64) for _ in system.matrix]

    def slab_totals():
        for n1 in range(n_mod):
            prod = np.ones(base[0].shape, dtype=complex)
            for a, row in enumerate(system.matrix):
                idx = (int(row[0]) * n1 + base[a]) % n_mod
                prod *= tables[a][idx]
            yield complex(prod.sum())

    return _kahan_sum(slab_totals()) / n_mod ** d


def gowers_norm_pow(f: CyclicFunction, d: int) -> float:
    """The 2^d-th power of the U^d norm on Z_N, for d in {2, 3}.

    Uses the difference recursion with Delta_h f(x) = f(x+h) conj(f(x))
    and base ||g||_{U^1}^2 = |E g|^2; cost O(N^d).  The result is clamped
    at 0 (the raw value is logged when negative round-off occurs).
    """
    if d not in (2, 3):
        raise ValidationError(f"only U^2 and U^3 are supported, got d={d}")
    vals = f.values
    n_mod = f.modulus

    def u2_pow(g: np.ndarray) -> float:
        totals = (
            abs(complex(np.mean(np.roll(g, -h) * np.conj(g)))) ** 2
            for h in range(n_mod)
        )
        return _kahan_sum(totals).real / n_mod

    if d == 2:
        raw = u2_pow(vals)
    else:
        totals = (u2_pow(np.roll(vals, -h) * np.conj(vals)) for h in range(n_mod))
        raw = _kahan_sum(totals).real / n_mod
    if raw < 0:
        logger.debug("gowers_norm_pow raw value %r clamped to 0", raw)
        return 0.0
    return raw


def cyclic_to_text(f: CyclicFunction) -> str:
    lines = [str(f.modulus)]
    for v in f.values:
        if v.imag == 0:
            lines.append(repr(float(v.real)))
        else:
            lines.append(f"{float(v.real)!r} {float(v.imag)!r}")
    return "\n".join(lines) + "\n"


def cyclic_from_text(text: str) -> CyclicFunction:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValidationError("empty cyclic-function text")
    try:
        n_mod = int(lines[0])
    except ValueError as exc:
        raise ValidationError(f"bad modulus line {lines[0]!r}") from exc
    if len(lines) != n_mod + 1:
        raise ValidationError(f"expected {n_mod} value lines, got {len(lines) - 1}")
    vals = np.zeros(n_mod, dtype=complex)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        try:
            if len(parts) == 1:
                vals[i] = float(parts[0])
            elif len(parts) == 2:
                vals[i] = complex(float(parts[0]), float(parts[1]))
            else:
                raise ValueError("need 're im' or 'v'")
        except ValueError as exc:
            raise ValidationError(f"bad value line {line!r}: {exc}") from exc
    return CyclicFunction(n_mod, vals, bounded=bool(np.all(np.abs(vals) <= 1 + 1e-12)))


def parse_cyclic_spec(spec: str, modulus: Optional[int] = None) -> CyclicFunction:
    """Parse a CLI function spec: quadphase, sumfree, const:c, or @file."""
    if spec == "quadphase":
        if modulus is None:
            raise ValidationError("quadphase needs an explicit modulus")
        return quadratic_phase(modulus)
    if spec == "sumfree":
        if modulus is None:
            raise ValidationError("sumfree needs an explicit modulus")
        return sumfree_interval(modulus)
    if spec.startswith("const:"):
        if modulus is None:
            raise ValidationError("const needs an explicit modulus")
        try:
            value = complex(spec[6:])
        except ValueError as exc:
            raise ValidationError(f"bad constant {spec[6:]!r}") from exc
        return constant_function(modulus, value)
    if spec.startswith("@"):
        path = spec[1:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                f = cyclic_from_text(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read function file {path}: {exc}") from exc
        if modulus is not None and f.modulus != modulus:
            raise ValidationError(
                f"function file has modulus {f.modulus}, expected {modulus}"
            )
        return f
    raise ValidationError(f"unknown function spec {spec!r}")
