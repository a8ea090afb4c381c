"""Systems of integer linear forms: construction, size, and complexity.

A system is a t x D integer matrix; row i holds the coefficients of the
form  Z^D -> Z,  n -> c_1 n_1 + ... + c_D n_D.  Classification uses exact
integer arithmetic throughout: the complexity test expands (s+1)-st powers
of the forms in the monomial basis via multinomial coefficients and decides
linear independence by fraction-free rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .errors import ValidationError
from .lattice import exact_rank

Matrix = tuple[tuple[int, ...], ...]

DEFAULT_S_MAX = 4


@dataclass(frozen=True)
class LinearFormSystem:
    """A t x D matrix of integer linear forms (one form per row)."""

    matrix: Matrix
    label: Optional[str] = None

    def __post_init__(self):
        m = tuple(tuple(int(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        if not m or not m[0]:
            raise ValidationError("a system needs t >= 1 forms in D >= 1 variables")
        width = len(m[0])
        for row in m:
            if len(row) != width:
                raise ValidationError("all forms must have the same number of variables")

    @property
    def num_forms(self) -> int:
        return len(self.matrix)

    @property
    def num_vars(self) -> int:
        return len(self.matrix[0])

    def evaluate(self, n: Sequence[int]) -> tuple[int, ...]:
        """Apply every form to the integer point n."""
        if len(n) != self.num_vars:
            raise ValidationError(f"point has {len(n)} coordinates, need {self.num_vars}")
        return tuple(sum(c * x for c, x in zip(row, n)) for row in self.matrix)

    def __str__(self):
        return system_to_text(self)


def make_system(rows: Sequence[Sequence[int]], label: Optional[str] = None) -> LinearFormSystem:
    """Validated constructor: rejects zero forms and repeated forms."""
    sys_ = LinearFormSystem(tuple(tuple(r) for r in rows), label)
    _check_nondegenerate(sys_)
    return sys_


def make_system_relaxed(rows: Sequence[Sequence[int]], label: Optional[str] = None) -> LinearFormSystem:
    """Constructor for experimentation: allows zero or repeated forms.

    Classification operations still reject such systems.
    """
    return LinearFormSystem(tuple(tuple(r) for r in rows), label)


def _check_nondegenerate(system: LinearFormSystem):
    seen = set()
    for row in system.matrix:
        if not any(row):
            raise ValidationError("zero form not allowed (infinite complexity)")
        if row in seen:
            raise ValidationError(f"repeated form {row} not allowed")
        seen.add(row)


def make_ap_system(k: int) -> LinearFormSystem:
    """The k-term arithmetic progression system (n1, n1+n2, ..., n1+(k-1)n2)."""
    if k < 3:
        raise ValidationError(f"progression length must be >= 3, got {k}")
    return make_system([(1, i) for i in range(k)], label=f"ap:{k}")


def make_cube_system(d: int) -> LinearFormSystem:
    """The d-dimensional cube system with rows (1, v), v in {0,1}^d.

    Rows are ordered lexicographically in v, so for d=2 the forms are
    n1, n1+n3, n1+n2, n1+n2+n3 in that fixed order.  Only d in {2, 3} is
    supported.
    """
    if d not in (2, 3):
        raise ValidationError(f"cube dimension must be 2 or 3, got {d}")
    rows = [(1,) + v for v in product((0, 1), repeat=d)]
    return make_system(rows, label=f"cube:{d}")


def make_trivial_system() -> LinearFormSystem:
    """The single identity form n -> n."""
    return make_system([(1,)], label="trivial")


def size(system: LinearFormSystem) -> int:
    """Least L with t <= L, D <= L, and every |coefficient| <= L."""
    coeff = max(abs(x) for row in system.matrix for x in row)
    return max(system.num_forms, system.num_vars, coeff)


def _monomials(num_vars: int, degree: int) -> list[tuple[int, ...]]:
    return [e for e in product(range(degree + 1), repeat=num_vars) if sum(e) == degree]


def expand_form_power(row: Sequence[int], power: int,
                      monomials: Sequence[tuple[int, ...]]) -> list[int]:
    """Exact multinomial expansion of (c . x)^power in the given monomial basis."""
    pfac = math.factorial(power)
    out = []
    for expo in monomials:
        coeff = pfac
        for c, e in zip(row, expo):
            coeff = coeff * (c ** e) // math.factorial(e)
        out.append(coeff)
    return out


def complexity(system: LinearFormSystem, s_max: int = DEFAULT_S_MAX) -> Optional[int]:
    """Least s <= s_max such that the (s+1)-st powers of the forms are
    linearly independent over Q, or None when no such s exists below the
    bound.

    Independence is decided by the exact rank of the t x (#monomials)
    integer matrix of expanded powers.
    """
    _check_nondegenerate(system)
    if s_max < 0:
        raise ValidationError(f"s_max must be >= 0, got {s_max}")
    t, width = system.num_forms, system.num_vars
    for s in range(s_max + 1):
        monomials = _monomials(width, s + 1)
        rows = [expand_form_power(row, s + 1, monomials) for row in system.matrix]
        if exact_rank(rows) == t:
            return s
    return None


def system_to_text(system: LinearFormSystem) -> str:
    lines = [f"{system.num_forms} {system.num_vars}"]
    for row in system.matrix:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def system_from_text(text: str, label: Optional[str] = None) -> LinearFormSystem:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValidationError("system text needs a 't D' header")
    try:
        t, width = int(tokens[0]), int(tokens[1])
        body = [int(x) for x in tokens[2:]]
    except ValueError as exc:
        raise ValidationError(f"system text is not integer-valued: {exc}") from exc
    if t < 1 or width < 1:
        raise ValidationError("system text needs t >= 1 and D >= 1")
    if len(body) != t * width:
        raise ValidationError(f"expected {t * width} coefficients, got {len(body)}")
    rows = [body[i * width:(i + 1) * width] for i in range(t)]
    return make_system(rows, label)


def parse_system_spec(spec: str) -> LinearFormSystem:
    """Parse a command-line system spec: ap:k, cube:d, trivial, or @file."""
    if spec == "trivial":
        return make_trivial_system()
    if spec.startswith("ap:"):
        return make_ap_system(_parse_int(spec[3:], "ap:k"))
    if spec.startswith("cube:"):
        return make_cube_system(_parse_int(spec[5:], "cube:d"))
    if spec.startswith("@"):
        path = spec[1:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return system_from_text(fh.read(), label=f"@{path}")
        except OSError as exc:
            raise ValidationError(f"cannot read system file {path}: {exc}") from exc
    raise ValidationError(f"unknown system spec {spec!r}")


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ValidationError(f"bad integer in {what}: {text!r}") from exc
