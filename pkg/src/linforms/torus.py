"""Filtered tori, their form-system subtori, Haar sampling, and averages.

A filtered torus T^m assigns each coordinate j a degree d_j.  For a system
of t linear forms, coordinate j contributes the degree-d_j lattice of the
system; the subtorus sits inside (T^m)^t and is the image of uniform
coefficients pushed through the per-coordinate generator matrices.  That
push-forward is Haar on the image because the map is a surjective
continuous homomorphism from a torus, so no saturation of the lattice
bases is needed.

Characters decide exact integration: a tuple character integrates to 1
when it is trivial on the subtorus and to 0 otherwise.  Floating point
only ever touches coefficients and sample coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import BudgetError, DimensionError, ValidationError
from .lattice import IntegerLattice, leibman_lattice
from .linsys import LinearFormSystem

TWO_PI = 2.0 * np.pi
SAMPLE_CHUNK = 1 << 16
DEFAULT_TERM_BUDGET = 10_000_000


def e(theta):
    """The character e(theta) = exp(2 pi i theta)."""
    return np.exp(TWO_PI * 1j * np.asarray(theta))


@dataclass(frozen=True)
class FilteredTorusSpec:
    """Per-coordinate degrees (d_1, ..., d_m) of a filtered torus T^m."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        degs = tuple(int(d) for d in self.degrees)
        object.__setattr__(self, "degrees", degs)
        if not degs:
            raise ValidationError("a filtered torus needs m >= 1 coordinates")
        if any(d < 1 for d in degs):
            raise ValidationError(f"coordinate degrees must be >= 1, got {degs}")

    @property
    def dim(self) -> int:
        return len(self.degrees)


def parse_spec(text: str) -> FilteredTorusSpec:
    """Parse a comma-separated degree list such as '1,2'."""
    try:
        return FilteredTorusSpec(tuple(int(x) for x in text.split(",")))
    except ValueError as exc:
        raise ValidationError(f"bad torus spec {text!r}: {exc}") from exc


@dataclass(frozen=True)
class LeibmanTorusModel:
    """The subtorus of (T^m)^t attached to a system on a filtered torus."""

    spec: FilteredTorusSpec
    system: LinearFormSystem
    blocks: tuple[IntegerLattice, ...]

    @property
    def num_slots(self) -> int:
        return self.system.num_forms

    @property
    def torus_dim(self) -> int:
        return self.spec.dim

    @property
    def dimension(self) -> int:
        return sum(len(b.basis) for b in self.blocks)


def build_model(spec: FilteredTorusSpec, system: LinearFormSystem) -> LeibmanTorusModel:
    """Assemble the per-coordinate lattice blocks of the subtorus."""
    for row in system.matrix:
        if not any(row):
            raise ValidationError("zero form: coordinate projection would not be onto")
    cache: dict[int, IntegerLattice] = {}
    blocks = []
    for d in spec.degrees:
        if d not in cache:
            cache[d] = leibman_lattice(system, d)
        blocks.append(cache[d])
    return LeibmanTorusModel(spec, system, tuple(blocks))


@dataclass(frozen=True)
class TupleCharacter:
    """A character on (T^m)^t given by a t x m integer frequency matrix."""

    freq: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        f = tuple(tuple(int(x) for x in row) for row in self.freq)
        object.__setattr__(self, "freq", f)
        if not f:
            raise DimensionError("character needs at least one slot row")
        width = len(f[0])
        if any(len(row) != width for row in f):
            raise DimensionError("character rows must have equal length")

    @property
    def num_slots(self) -> int:
        return len(self.freq)

    @property
    def torus_dim(self) -> int:
        return len(self.freq[0])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on an (n, t, m) array of subtorus points."""
        m = np.asarray(self.freq, dtype=float)
        return e(np.tensordot(points, m, axes=([1, 2], [0, 1])))


def character_trivial_on_model(chi: TupleCharacter, model: LeibmanTorusModel) -> bool:
    """Exact 0/1 dichotomy: True means the character integrates to 1.

    The character is trivial iff for every coordinate j its j-th frequency
    column is orthogonal to every basis vector of block j.
    """
    if chi.num_slots != model.num_slots or chi.torus_dim != model.torus_dim:
        raise DimensionError(
            f"character shape {chi.num_slots}x{chi.torus_dim} does not match model "
            f"{model.num_slots}x{model.torus_dim}"
        )
    for j, block in enumerate(model.blocks):
        col = [row[j] for row in chi.freq]
        for basis_row in block.basis:
            if sum(c * v for c, v in zip(col, basis_row)) != 0:
                return False
    return True


def _block_matrices(model: LeibmanTorusModel) -> list[np.ndarray]:
    return [np.asarray(b.basis, dtype=float).reshape(len(b.basis), model.num_slots)
            for b in model.blocks]


def haar_chunks(model: LeibmanTorusModel, seed: int, count: int) -> Iterator[np.ndarray]:
    """Yield (n_chunk, t, m) sample arrays in fixed chunks.

    Each chunk uses its own counter-based stream keyed by (seed, chunk
    index), so results do not depend on how chunks are scheduled.
    """
    if count < 1:
        raise ValidationError(f"sample count must be >= 1, got {count}")
    t, m = model.num_slots, model.torus_dim
    mats = _block_matrices(model)
    ranks = [mat.shape[0] for mat in mats]
    total_rank = sum(ranks)
    done = 0
    chunk_index = 0
    while done < count:
        n = min(SAMPLE_CHUNK, count - done)
        key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(chunk_index)],
                       dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        theta = rng.random((n, total_rank))
        points = np.empty((n, t, m))
        offset = 0
        for j, (mat, r) in enumerate(zip(mats, ranks)):
            points[:, :, j] = (theta[:, offset:offset + r] @ mat) % 1.0
            offset += r
        yield points
        done += n
        chunk_index += 1


def sample_haar(model: LeibmanTorusModel, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` Haar samples from the subtorus as an (n, t, m) array."""
    return np.concatenate(list(haar_chunks(model, seed, count)), axis=0)


@dataclass(frozen=True)
class TrigPolynomial:
    """A finite character sum sum_n c_n e(n . x) on T^m."""

    dim: int
    terms: tuple[tuple[tuple[int, ...], complex], ...]

    def __post_init__(self):
        cleaned = []
        for freq, coeff in self.terms:
            freq = tuple(int(x) for x in freq)
            if len(freq) != self.dim:
                raise DimensionError(f"frequency {freq} in dimension {self.dim}")
            cleaned.append((freq, complex(coeff)))
        object.__setattr__(self, "terms", tuple(cleaned))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape[0], dtype=complex)
        for freq, coeff in self.terms:
            out += coeff * e(points @ np.asarray(freq, dtype=float))
        return out

    def mean_term(self) -> complex:
        return sum(c for f, c in self.terms if not any(f))


def trig_to_text(poly: TrigPolynomial) -> str:
    lines = []
    for freq, coeff in poly.terms:
        head = " ".join(str(x) for x in freq)
        lines.append(f"{head}  {coeff.real!r} {coeff.imag!r}")
    return "\n".join(lines) + "\n"


def trig_from_text(text: str, dim: Optional[int] = None) -> TrigPolynomial:
    terms = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ValidationError(f"trig term needs 'n_1 .. n_m re im': {line!r}")
        if dim is None:
            dim = len(parts) - 2
        if len(parts) != dim + 2:
            raise ValidationError(f"trig term has wrong arity: {line!r}")
        freq = tuple(int(x) for x in parts[:dim])
        terms.append((freq, complex(float(parts[-2]), float(parts[-1]))))
    if dim is None:
        raise ValidationError("empty trigonometric polynomial file")
    return TrigPolynomial(dim, tuple(terms))


@dataclass(frozen=True)
class GridFunction:
    """A step function on T^m, constant on half-open cells of a q-grid.

    The value on the cell containing x is values[floor(q x_1), ...,
    floor(q x_m)]; storage is row-major.
    """

    dim: int
    cells: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != (self.cells,) * self.dim:
            raise DimensionError(
                f"grid values shape {vals.shape}, expected {(self.cells,) * self.dim}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("grid values must be finite")
        object.__setattr__(self, "values", vals)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.minimum((points % 1.0 * self.cells).astype(np.int64), self.cells - 1)
        return self.values[tuple(idx[:, j] for j in range(self.dim))]

    @property
    def mean(self):
        return complex(self.values.mean()) if np.iscomplexobj(self.values) \
            else float(self.values.mean())

    def is_real_unit_range(self) -> bool:
        if np.iscomplexobj(self.values):
            return False
        return bool(np.all(self.values >= 0.0) and np.all(self.values <= 1.0))


def grid_to_text(grid: GridFunction) -> str:
    header = f"{grid.dim} {grid.cells}"
    body = " ".join(repr(float(v)) for v in np.asarray(grid.values, dtype=float).ravel())
    return header + "\n" + body + "\n"


def grid_from_text(text: str) -> GridFunction:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValidationError("grid text needs an 'm q' header")
    try:
        m, q = int(tokens[0]), int(tokens[1])
        vals = np.array([float(x) for x in tokens[2:]])
    except ValueError as exc:
        raise ValidationError(f"bad grid text: {exc}") from exc
    if m < 1 or q < 1:
        raise ValidationError("grid text needs m >= 1 and q >= 1")
    if vals.size != q ** m:
        raise ValidationError(f"expected {q ** m} grid values, got {vals.size}")
    return GridFunction(m, q, vals.reshape((q,) * m))


def _normalize_pattern(pattern: Optional[Sequence[int]], t: int) -> tuple[int, ...]:
    if pattern is None:
        return (1,) * t
    pat = tuple(int(s) for s in pattern)
    if len(pat) != t:
        raise ValidationError(f"pattern length {len(pat)}, system has {t} forms")
    if any(s not in (-1, 1) for s in pat):
        raise ValidationError("pattern entries must be +1 or -1")
    return pat


def exact_trig_average(
    f: TrigPolynomial,
    model: LeibmanTorusModel,
    pattern: Optional[Sequence[int]] = None,
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> complex:
    """Exact subtorus average of the t-fold product of a character sum.

    Expands the product over all t-tuples of terms and keeps the
    coefficients of tuples whose combined character is trivial on the
    model.  Frequencies are handled with exact integers; only the
    coefficient arithmetic is floating point.
    """
    if f.dim != model.torus_dim:
        raise DimensionError(f"function on T^{f.dim}, model on T^{model.torus_dim}")
    t = model.num_slots
    pat = _normalize_pattern(pattern, t)
    nterms = len(f.terms)
    if nterms == 0:
        return 0j
    if nterms ** t > term_budget:
        raise BudgetError(
            f"{nterms}^{t} term tuples exceed the budget of {term_budget}"
        )
    # Per (term, slot) contribution to the triviality test, flattened over
    # all (coordinate, basis row) pairs of the model blocks.
    checks: list[tuple[int, tuple[int, ...]]] = []  # (coordinate, basis row)
    for j, block in enumerate(model.blocks):
        for row in block.basis:
            checks.append((j, row))
    contrib = []
    for freq, _ in f.terms:
        per_slot = []
        for a in range(t):
            per_slot.append(tuple(freq[j] * row[a] for j, row in checks))
        contrib.append(per_slot)
    kdim = len(checks)
    zero = (0,) * kdim
    coeffs = []
    for sign in (1, -1):
        coeffs.append([coeff if sign == 1 else coeff.conjugate() for _, coeff in f.terms])

    total = 0j

    def recurse(slot: int, acc: tuple[int, ...], weight: complex):
        nonlocal total
        if slot == t:
            if acc == zero:
                total += weight
            return
        s = pat[slot]
        row_coeffs = coeffs[0] if s == 1 else coeffs[1]
        for term_index in range(nterms):
            vec = contrib[term_index][slot]
            if s == 1:
                nxt = tuple(x + y for x, y in zip(acc, vec))
            else:
                nxt = tuple(x - y for x, y in zip(acc, vec))
            recurse(slot + 1, nxt, weight * row_coeffs[term_index])

    recurse(0, zero, 1.0 + 0j)
    return total


TorusFunction = Union[GridFunction, TrigPolynomial, Callable[[np.ndarray], np.ndarray]]


def mc_average(
    f: TorusFunction,
    model: LeibmanTorusModel,
    pattern: Optional[Sequence[int]] = None,
    samples: int = 100_000,
    seed: int = 0,
) -> tuple[complex, float]:
    """Monte-Carlo subtorus average of prod_a f(x_a) with optional conjugation.

    Returns (estimate, standard error); the standard error is the sample
    standard deviation of the per-sample products divided by sqrt(n).
    Chunked evaluation with fixed chunk boundaries keeps the result
    independent of scheduling.
    """
    t = model.num_slots
    pat = _normalize_pattern(pattern, t)
    total = 0j
    total_sq = 0.0
    n_done = 0
    for points in haar_chunks(model, seed, samples):
        prod = np.ones(points.shape[0], dtype=complex)
        for a in range(t):
            vals = np.asarray(f(points[:, a, :]))
            prod *= np.conj(vals) if pat[a] == -1 else vals
        total += complex(prod.sum())
        total_sq += float((np.abs(prod) ** 2).sum())
        n_done += points.shape[0]
    estimate = total / n_done
    if n_done > 1:
        var = max(total_sq / n_done - abs(estimate) ** 2, 0.0) * n_done / (n_done - 1)
        stderr = float(np.sqrt(var / n_done))
    else:
        stderr = 0.0
    return estimate, stderr


def fourier_truncate(grid: GridFunction, order: int) -> tuple[TrigPolynomial, float]:
    """Fejer-weighted truncation of a grid function to frequencies |n|_inf <= order.

    Coefficients are the discrete Fourier coefficients of the cell values,
    damped by the product Fejer weight prod_j (1 - |n_j|/(order+1)).  Also
    returns the sup-norm error over grid points.  Requires order <= q/2 so
    the grid resolves the requested frequencies.
    """
    if order < 1:
        raise ValidationError(f"truncation order must be >= 1, got {order}")
    q = grid.cells
    if 2 * order > q:
        raise ValidationError(
            f"order {order} not resolved by a q={q} grid (need order <= q/2)"
        )
    values = np.asarray(grid.values, dtype=complex)
    spectrum = np.fft.fftn(values) / values.size
    kept = np.zeros_like(spectrum)
    terms = []
    reps = [r if r <= (q - 1) // 2 else r - q for r in range(q)]
    for bins in product(range(q), repeat=grid.dim):
        freq = tuple(reps[b] for b in bins)
        if any(abs(n) > order for n in freq):
            continue
        weight = 1.0
        for n in freq:
            weight *= 1.0 - abs(n) / (order + 1.0)
        coeff = spectrum[bins] * weight
        kept[bins] = coeff
        if coeff != 0:
            terms.append((freq, complex(coeff)))
    recon = np.fft.ifftn(kept) * values.size
    sup_err = float(np.max(np.abs(values - recon)))
    terms.sort(key=lambda item: item[0])
    return TrigPolynomial(grid.dim, tuple(terms)), sup_err


def character_triviality_table(model: LeibmanTorusModel, freq_bound: int) -> np.ndarray:
    """Boolean table of exact character triviality over all tuple characters
    with entries in [-freq_bound, freq_bound].

    Axis p = a*m + j (slot-major) corresponds to entry M[a, j]; index i
    along an axis encodes the frequency i - freq_bound.
    """
    if freq_bound < 0:
        raise ValidationError("freq_bound must be >= 0")
    t, m = model.num_slots, model.torus_dim
    width = 2 * freq_bound + 1
    cols = np.array(list(product(range(-freq_bound, freq_bound + 1), repeat=t)),
                    dtype=np.int64)
    table = np.ones((width,) * (t * m), dtype=bool)
    for j, block in enumerate(model.blocks):
        if block.basis:
            basis = np.asarray(block.basis, dtype=np.int64)
            orth = np.all(cols @ basis.T == 0, axis=1)
        else:
            orth = np.ones(len(cols), dtype=bool)
        shape = tuple(width if p % m == j else 1 for p in range(t * m))
        table &= orth.reshape((width,) * t).reshape(shape)
    return table


def mc_character_means(
    model: LeibmanTorusModel,
    freq_bound: int,
    samples: int,
    seed: int,
) -> np.ndarray:
    """Empirical means of every tuple character with entries <= freq_bound.

    Same indexing as character_triviality_table.  Uses a split-product
    matrix multiplication over sample chunks, so the full character grid is
    computed in one pass over the samples.
    """
    t, m = model.num_slots, model.torus_dim
    width = 2 * freq_bound + 1
    positions = t * m
    half = (positions + 1) // 2
    left_size = width ** half
    right_size = width ** (positions - half)
    table = np.zeros((left_size, right_size), dtype=complex)
    n_done = 0
    for points in haar_chunks(model, seed, samples):
        n = points.shape[0]
        flat = points.reshape(n, positions)
        powers = np.empty((positions, n, width), dtype=complex)
        for p in range(positions):
            base = e(flat[:, p])
            col = np.ones(n, dtype=complex)
            pos_powers = [np.ones(n, dtype=complex)]
            for _ in range(freq_bound):
                col = col * base
                pos_powers.append(col.copy())
            neg_powers = [np.conj(c) for c in pos_powers[1:]]
            ordered = neg_powers[::-1] + pos_powers
            powers[p] = np.stack(ordered, axis=1)

        def half_product(pos_list):
            block = np.ones((n, 1), dtype=complex)
            for p in pos_list:
                block = (block[:, :, None] * powers[p][:, None, :]).reshape(n, -1)
            return block

        left = half_product(range(half))
        right = half_product(range(half, positions))
        table += left.T @ right
        n_done += n
    return (table / n_done).reshape((width,) * positions)
