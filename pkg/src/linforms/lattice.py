"""Exact integer-lattice algebra.

Sublattices of Z^t are stored through a canonical echelon basis computed by
fraction-free integer elimination.  The canonical form used everywhere is:

* basis rows have strictly increasing pivot (first nonzero) columns,
* every pivot is positive,
* generators are deduplicated and sorted (descending lexicographic) before
  elimination, so the basis is independent of generator order.

Entries above pivots are deliberately left unreduced; this keeps natural
generating sets such as ``(1,1,1,1), (0,1,2,3), (0,0,1,3)`` intact, which is
the documented golden form for the degree-filtered lattices built from
linear-form systems.

All arithmetic is arbitrary-precision integer arithmetic; nothing here
touches floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence, TYPE_CHECKING

from .errors import DimensionError

if TYPE_CHECKING:  # pragma: no cover
    from .linsys import LinearFormSystem

Vector = tuple[int, ...]


def vector_binomial(v: Sequence[int], k: int) -> Vector:
    """Componentwise binomial coefficient C(v[a], k).

    Defined for negative entries through the polynomial
    x(x-1)...(x-k+1)/k!, which is an integer for every integer x.
    """
    if k < 0:
        raise DimensionError(f"binomial order must be >= 0, got {k}")
    kfac = math.factorial(k)
    out = []
    for x in v:
        num = 1
        for j in range(k):
            num *= x - j
        out.append(num // kfac)
    return tuple(out)


def _echelon(rows: list[list[int]], transform: bool = False):
    """Forward integer elimination to echelon form with positive pivots.

    Returns (pivot_rows, pivot_cols) and, if ``transform`` is set, also the
    rows of the unimodular transform that were zeroed out (they span the
    left kernel of the input matrix).  Deterministic for a fixed input
    order; no reduction is performed above pivots.
    """
    work = [list(r) for r in rows]
    n = len(work)
    width = len(work[0]) if work else 0
    umat = [[int(i == j) for j in range(n)] for i in range(n)] if transform else None
    used = [False] * n
    pivots: list[int] = []
    pivot_cols: list[int] = []

    for col in range(width):
        active = [i for i in range(n) if not used[i] and work[i][col] != 0]
        while len(active) > 1:
            active.sort(key=lambda i: (abs(work[i][col]), work[i], i))
            base = active[0]
            if work[base][col] < 0:
                work[base] = [-x for x in work[base]]
                if transform:
                    umat[base] = [-x for x in umat[base]]
            b = work[base][col]
            nxt = [base]
            for i in active[1:]:
                q = work[i][col] // b
                if q:
                    work[i] = [x - q * y for x, y in zip(work[i], work[base])]
                    if transform:
                        umat[i] = [x - q * y for x, y in zip(umat[i], umat[base])]
                if work[i][col] != 0:
                    nxt.append(i)
            active = nxt
        if active:
            i = active[0]
            if work[i][col] < 0:
                work[i] = [-x for x in work[i]]
                if transform:
                    umat[i] = [-x for x in umat[i]]
            used[i] = True
            pivots.append(i)
            pivot_cols.append(col)

    basis = [work[i] for i in pivots]
    if transform:
        kernel = [umat[i] for i in range(n) if not used[i]]
        return basis, pivot_cols, kernel
    return basis, pivot_cols


def exact_rank(matrix: Iterable[Sequence[int]]) -> int:
    """Rank over Q of an integer matrix, by fraction-free elimination."""
    rows = [list(r) for r in matrix]
    if not rows:
        return 0
    basis, _ = _echelon(rows)
    return len(basis)


@dataclass(frozen=True)
class IntegerLattice:
    """A sublattice of Z^t given by its canonical echelon basis."""

    ambient_dim: int
    basis: tuple[Vector, ...]

    def __post_init__(self):
        for row in self.basis:
            if len(row) != self.ambient_dim:
                raise DimensionError(
                    f"basis row of length {len(row)} in ambient dimension {self.ambient_dim}"
                )

    @property
    def pivot_columns(self) -> tuple[int, ...]:
        return tuple(next(j for j, x in enumerate(row) if x != 0) for row in self.basis)

    def __str__(self):
        return lattice_to_text(self)


def lattice_from_generators(gens: Iterable[Sequence[int]], ambient_dim: int) -> IntegerLattice:
    """Canonical basis of the integer span of ``gens``.

    Zero generators are dropped (componentwise binomial products vanish
    often), duplicates are merged, and the surviving generators are sorted
    before elimination so that any reordering of the input yields a
    bit-identical basis.
    """
    unique: set[Vector] = set()
    for g in gens:
        if len(g) != ambient_dim:
            raise DimensionError(
                f"generator of length {len(g)} in ambient dimension {ambient_dim}"
            )
        tup = tuple(int(x) for x in g)
        if any(tup):
            unique.add(tup)
    ordered = sorted(unique, reverse=True)
    basis, _ = _echelon([list(r) for r in ordered])
    return IntegerLattice(ambient_dim, tuple(tuple(r) for r in basis))


def rank(lat: IntegerLattice) -> int:
    return len(lat.basis)


def contains(lat: IntegerLattice, v: Sequence[int]) -> bool:
    """Exact membership test by back-substitution against the echelon basis."""
    if len(v) != lat.ambient_dim:
        raise DimensionError(
            f"vector of length {len(v)} in ambient dimension {lat.ambient_dim}"
        )
    residual = [int(x) for x in v]
    for row, col in zip(lat.basis, lat.pivot_columns):
        q, r = divmod(residual[col], row[col])
        if r != 0:
            return False
        if q:
            residual = [x - q * y for x, y in zip(residual, row)]
    return not any(residual)


def orthogonal_complement(lat: IntegerLattice) -> IntegerLattice:
    """The lattice of integer vectors orthogonal to every basis vector.

    Computed as the exact integer kernel of the basis matrix (via a
    unimodular transform), so the result is saturated and has rank
    ambient_dim - rank(lat).
    """
    t = lat.ambient_dim
    if not lat.basis:
        return lattice_from_generators(
            [[int(i == j) for j in range(t)] for i in range(t)], t
        )
    transposed = [[row[a] for row in lat.basis] for a in range(t)]
    _, _, kernel = _echelon(transposed, transform=True)
    return lattice_from_generators(kernel, t)


def leibman_generators(system: "LinearFormSystem", i: int) -> list[Vector]:
    """Generators of the degree-i lattice of a linear-form system.

    These are the componentwise products  prod_j C(v_j, k_j)  over all
    multi-indices (k_1, ..., k_D) with 1 <= sum k_j <= i, where v_j are the
    columns of the system matrix.  Zero products are dropped; the order is
    ascending lexicographic in the multi-index.
    """
    if i < 1:
        raise DimensionError(f"lattice degree must be >= 1, got {i}")
    matrix = system.matrix
    t = len(matrix)
    ncols = len(matrix[0])
    columns = [tuple(row[j] for row in matrix) for j in range(ncols)]
    out: list[Vector] = []
    for ks in product(range(i + 1), repeat=ncols):
        total = sum(ks)
        if not 1 <= total <= i:
            continue
        vec = [1] * t
        for col, k in zip(columns, ks):
            if k == 0:
                continue
            b = vector_binomial(col, k)
            vec = [x * y for x, y in zip(vec, b)]
        if any(vec):
            out.append(tuple(vec))
    return out


def leibman_lattice(system: "LinearFormSystem", i: int) -> IntegerLattice:
    """Canonical basis of the degree-i lattice of ``system``."""
    t = len(system.matrix)
    return lattice_from_generators(leibman_generators(system, i), t)


def lattice_to_text(lat: IntegerLattice) -> str:
    lines = [f"{len(lat.basis)} {lat.ambient_dim}"]
    for row in lat.basis:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def lattice_from_text(text: str) -> IntegerLattice:
    tokens = text.split()
    if len(tokens) < 2:
        raise DimensionError("lattice text needs an 'r t' header")
    r, t = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != r * t:
        raise DimensionError(f"expected {r * t} entries, got {len(body)}")
    rows = [tuple(int(x) for x in body[i * t:(i + 1) * t]) for i in range(r)]
    return IntegerLattice(t, tuple(rows))
