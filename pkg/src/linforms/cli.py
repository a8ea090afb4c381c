"""Command-line front end: argument parsing, dispatch, and result records.

Every run is described by an ExperimentConfig (command name plus a flat
key-value parameter tree).  Configs serialize to JSON and round-trip
losslessly; unknown keys are rejected against a per-command schema.  A run
produces a ResultRecord whose config hash binds the payload to its exact
inputs; with --out the payload is written to disk next to a sidecar
metadata record.

Exit codes: 0 success, 2 validation error, 3 budget exceeded, 4 numeric
failure (including failing counterexample checks).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .errors import BudgetError, NumericError, ValidationError
from . import cyclic, equid, extremal, lattice, linsys, torus

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# Config and record plumbing

COMMAND_SCHEMAS: dict[str, set[str]] = {
    "leibman": {"system", "degree", "complement"},
    "complexity": {"system", "s_max"},
    "sol-discrete": {"system", "N", "f", "pattern", "budget"},
    "sol-torus": {"system", "spec", "f", "pattern", "samples", "exact", "budget"},
    "gowers": {"N", "d", "f"},
    "min-k": {"system", "d", "chi", "domain_degree"},
    "balance-phi-k": {"system", "d", "k", "freq", "domain_degree", "budget"},
    "balance-orbit": {"system", "p", "spec", "coeffs", "freq", "budget"},
    "m-discrete": {"system", "p", "alpha", "method", "restarts", "steps",
                   "levels", "budget"},
    "m-torus": {"system", "spec", "alpha", "q", "samples", "search_samples"},
    "converge": {"system", "spec", "alpha", "primes", "q", "samples",
                 "search_samples", "restarts", "steps", "budget"},
    "counterexamples": {"p"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMAND_SCHEMAS:
            raise ValidationError(f"unknown command {self.command!r}")
        allowed = COMMAND_SCHEMAS[self.command]
        unknown = set(self.params) - allowed
        if unknown:
            raise ValidationError(
                f"unknown parameter(s) for {self.command}: {sorted(unknown)}"
            )

    def to_json(self) -> str:
        return json.dumps(
            {"command": self.command, "seed": self.seed, "params": self.params},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad config JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        extra = set(doc) - {"command", "seed", "params"}
        if extra:
            raise ValidationError(f"unknown config key(s): {sorted(extra)}")
        return cls(
            command=doc.get("command", ""),
            params=doc.get("params", {}),
            seed=int(doc.get("seed", 0)),
        )


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(config.to_json().encode()).hexdigest()


@dataclass
class ResultRecord:
    config_hash: str
    timestamp: float
    version: str
    payload: dict
    wall_time: float
    failed_checks: int = 0


# ---------------------------------------------------------------------------
# Argument parsing helpers

def parse_pattern(text: str, system: linsys.LinearFormSystem):
    if text == "alt":
        return cyclic.alternating_pattern(system)
    signs = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            signs.append(1)
        elif tok in ("-", "-1"):
            signs.append(-1)
        else:
            raise ValidationError(f"bad pattern entry {tok!r}")
    return cyclic.ConjugationPattern(tuple(signs))


def parse_chi(text: str) -> torus.TupleCharacter:
    rows = []
    for row_text in text.split(";"):
        row_text = row_text.strip()
        if not row_text:
            continue
        try:
            rows.append(tuple(int(x) for x in row_text.split(",")))
        except ValueError as exc:
            raise ValidationError(f"bad character row {row_text!r}") from exc
    if not rows:
        raise ValidationError("empty character")
    return torus.TupleCharacter(tuple(rows))


def parse_alpha(text: str) -> Fraction:
    try:
        return extremal.as_alpha(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad alpha {text!r}: {exc}") from exc


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad integer list {text!r}") from exc


def parse_orbit_coeffs(text: str, modulus: int) -> equid.PolynomialOrbit:
    """Parse per-coordinate polynomials, separated by ';'.

    Each coordinate is either a comma list of rational coefficients in
    ascending powers ('0,1/7,2/7') or an expression in n such as
    '(n^2+n)/7'.
    """
    coords = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "n" in part:
            coords.append(_poly_from_expression(part))
        else:
            try:
                coords.append(tuple(Fraction(tok.strip()) for tok in part.split(",")))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"bad coefficient list {part!r}: {exc}") from exc
    if not coords:
        raise ValidationError("empty orbit coefficient spec")
    return equid.PolynomialOrbit(len(coords), modulus, tuple(coords))


def _poly_from_expression(text: str) -> tuple[Fraction, ...]:
    import sympy

    n = sympy.Symbol("n")
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={"n": n})
        poly = sympy.Poly(sympy.together(expr), n)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
        raise ValidationError(f"bad polynomial {text!r}: {exc}") from exc
    coeffs = []
    for e in range(poly.degree() + 1):
        c = poly.coeff_monomial(n ** e)
        c = sympy.Rational(c)
        coeffs.append(Fraction(int(c.p), int(c.q)))
    return tuple(coeffs)


def _complex_payload(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


# ---------------------------------------------------------------------------
# Command handlers: each takes (config, budget) and returns a payload dict.
# Tabular payloads carry a 'csv' key.

def _budget(config_budget: Optional[int], default: int) -> int:
    return default if config_budget is None else int(config_budget)


def run_leibman(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    degree = int(cfg.params["degree"])
    lat = lattice.leibman_lattice(system, degree)
    if cfg.params.get("complement"):
        lat = lattice.orthogonal_complement(lat)
    return {
        "system": system.label,
        "degree": degree,
        "complement": bool(cfg.params.get("complement")),
        "rank": lattice.rank(lat),
        "basis": [list(row) for row in lat.basis],
        "csv": lattice.lattice_to_text(lat),
    }


def run_complexity(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    s_max = int(cfg.params.get("s_max", linsys.DEFAULT_S_MAX))
    value = linsys.complexity(system, s_max)
    return {
        "system": system.label,
        "s_max": s_max,
        "size": linsys.size(system),
        "complexity": value if value is not None else "exceeds s_max",
        "csv": f"system,size,complexity\n{system.label},{linsys.size(system)},"
               f"{value if value is not None else 'exceeds s_max'}\n",
    }


def run_sol_discrete(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    modulus = int(cfg.params["N"])
    f = cyclic.parse_cyclic_spec(cfg.params["f"], modulus)
    pattern = None
    if cfg.params.get("pattern"):
        pattern = parse_pattern(cfg.params["pattern"], system)
    budget = _budget(cfg.params.get("budget"), cyclic.DEFAULT_POINT_BUDGET)
    value = cyclic.sol_discrete(f, system, pattern, point_budget=budget)
    return {
        "system": system.label,
        "N": modulus,
        "f": cfg.params["f"],
        "pattern": cfg.params.get("pattern"),
        "average": _complex_payload(value),
        "exact": True,
    }


def run_gowers(cfg: ExperimentConfig) -> dict:
    modulus = int(cfg.params["N"])
    d = int(cfg.params["d"])
    f = cyclic.parse_cyclic_spec(cfg.params["f"], modulus)
    value = cyclic.gowers_norm_pow(f, d)
    return {"N": modulus, "d": d, "f": cfg.params["f"], "norm_power": value}


def _parse_torus_function(spec_text: str, m: int):
    if spec_text.startswith("grid:@"):
        path = spec_text[6:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                grid = torus.grid_from_text(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read grid file {path}: {exc}") from exc
        if grid.dim != m:
            raise ValidationError(f"grid on T^{grid.dim}, model needs T^{m}")
        return grid
    if spec_text.startswith("trig:@"):
        path = spec_text[6:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                poly = torus.trig_from_text(fh.read(), dim=m)
        except OSError as exc:
            raise ValidationError(f"cannot read trig file {path}: {exc}") from exc
        return poly
    if spec_text == "expr:one":
        return torus.TrigPolynomial(m, (((0,) * m, 1.0),))
    if spec_text == "expr:cos1":
        up = tuple([1] + [0] * (m - 1))
        down = tuple([-1] + [0] * (m - 1))
        return torus.TrigPolynomial(
            m, (((0,) * m, 0.5), (up, 0.25), (down, 0.25))
        )
    raise ValidationError(f"unknown torus function spec {spec_text!r}")


def run_sol_torus(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    spec = torus.parse_spec(cfg.params["spec"])
    model = torus.build_model(spec, system)
    f = _parse_torus_function(cfg.params["f"], spec.dim)
    pattern = None
    if cfg.params.get("pattern"):
        pattern = parse_pattern(cfg.params["pattern"], system).signs
    budget = _budget(cfg.params.get("budget"), torus.DEFAULT_TERM_BUDGET)
    want_exact = bool(cfg.params.get("exact")) or (
        isinstance(f, torus.TrigPolynomial) and not cfg.params.get("samples")
    )
    if want_exact:
        if not isinstance(f, torus.TrigPolynomial):
            raise ValidationError("exact averaging needs a trigonometric polynomial")
        value = torus.exact_trig_average(f, model, pattern, term_budget=budget)
        return {
            "system": system.label,
            "spec": cfg.params["spec"],
            "f": cfg.params["f"],
            "average": _complex_payload(value),
            "stderr": 0.0,
            "exact": True,
            "model_dimension": model.dimension,
        }
    samples = int(cfg.params.get("samples", 100_000))
    value, err = torus.mc_average(f, model, pattern, samples=samples, seed=cfg.seed)
    return {
        "system": system.label,
        "spec": cfg.params["spec"],
        "f": cfg.params["f"],
        "average": _complex_payload(value),
        "stderr": err,
        "exact": False,
        "samples": samples,
        "seed": cfg.seed,
        "model_dimension": model.dimension,
    }


def run_min_k(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    chi = parse_chi(cfg.params["chi"])
    d = int(cfg.params.get("d", chi.torus_dim))
    if d != chi.torus_dim:
        raise ValidationError(
            f"character has {chi.torus_dim} columns but --d is {d}"
        )
    domain_degree = int(cfg.params.get("domain_degree", 2))
    k0 = equid.min_k_threshold(chi, system, domain_degree)
    return {
        "system": system.label,
        "d": d,
        "domain_degree": domain_degree,
        "chi": [list(r) for r in chi.freq],
        "k0": k0 if k0 is not None else "never-vanishes",
    }


def run_balance_phi_k(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    d = int(cfg.params["d"])
    k = int(cfg.params["k"])
    freq = int(cfg.params["freq"])
    domain_degree = int(cfg.params.get("domain_degree", 2))
    budget = _budget(cfg.params.get("budget"), equid.DEFAULT_CHAR_BUDGET)
    report = equid.phi_k_balance_report(
        equid.PhiKMap(k, d), system, domain_degree, freq, char_budget=budget
    )
    return {
        "system": system.label,
        "k": k,
        "d": d,
        "domain_degree": domain_degree,
        "freq_bound": freq,
        "total_characters": report.total,
        "trivial_on_target": report.trivial_on_target,
        "vanishing_both": report.vanishing_both,
        "violated_count": len(report.violated),
        "violated": [[list(r) for r in chi.freq] for chi in report.violated[:200]],
        "max_discrepancy": report.max_discrepancy,
    }


def run_balance_orbit(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    spec = torus.parse_spec(cfg.params["spec"])
    p = int(cfg.params["p"])
    orbit = parse_orbit_coeffs(cfg.params["coeffs"], p)
    freq = int(cfg.params["freq"])
    budget = _budget(cfg.params.get("budget"), equid.DEFAULT_POINT_BUDGET)
    report = equid.weyl_balance_test(orbit, spec, system, freq,
                                     point_budget=budget)
    return {
        "system": system.label,
        "p": p,
        "spec": cfg.params["spec"],
        "coeffs": cfg.params["coeffs"],
        "freq_bound": freq,
        "max_abs": report.max_abs,
        "worst": [list(r) for r in report.worst.freq] if report.worst else None,
        "tested": report.tested,
        "skipped_trivial": report.skipped_trivial,
        "lipschitz_rate": report.lipschitz_rate,
        "csv": "group,alpha,system,method,estimate,stderr,exact,seed,seconds\n"
               f"{p},,{system.label},weyl-balance,{report.max_abs!r},0.0,1,"
               f"{cfg.seed},0.000\n",
    }


def run_m_discrete(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    p = int(cfg.params["p"])
    alpha = parse_alpha(str(cfg.params["alpha"]))
    method = cfg.params.get("method", "auto")
    budget = _budget(cfg.params.get("budget"), extremal.DEFAULT_SUBSET_BUDGET)
    restarts = int(cfg.params.get("restarts", 10))
    steps = int(cfg.params.get("steps", 200))
    from math import comb

    smin = extremal.min_subset_size(alpha, p)
    total = sum(comb(p, s) for s in range(smin, p + 1))
    if method == "auto":
        method = "exhaustive" if total <= budget else "search"
    if method == "exhaustive":
        cand = extremal.m_discrete_exhaustive(system, p, alpha, subset_budget=budget)
    elif method == "search":
        cand = extremal.m_discrete_search(system, p, alpha, restarts, steps, cfg.seed)
    else:
        raise ValidationError(f"unknown method {method!r}")
    payload = {
        "system": system.label,
        "p": p,
        "alpha": str(alpha),
        "method": method,
        "objective": cand.objective,
        "subset": list(cand.subset),
        "exact": cand.exact,
        "provenance": cand.provenance,
        "seed": cfg.seed,
    }
    # Companion estimate over q-level fractional functions, where feasible.
    levels = int(cfg.params.get("levels", 4))
    try:
        frac = extremal.m_discrete_fractional(system, p, alpha, levels=levels)
        payload["fractional"] = {
            "levels": levels,
            "objective": frac.objective,
            "values": list(frac.values),
            "exact": True,
        }
    except BudgetError as exc:
        payload["fractional"] = {"levels": levels, "skipped": str(exc)}
    return payload


def run_m_torus(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    spec = torus.parse_spec(cfg.params["spec"])
    alpha = parse_alpha(str(cfg.params["alpha"]))
    q = int(cfg.params.get("q", 16))
    samples = int(cfg.params.get("samples", 100_000))
    search_samples = int(cfg.params.get("search_samples", 20_000))
    cand = extremal.m_torus_search(system, spec, alpha, grid_cells=q,
                                   samples=samples, seed=cfg.seed,
                                   search_samples=search_samples)
    return {
        "system": system.label,
        "spec": cfg.params["spec"],
        "alpha": str(alpha),
        "q": q,
        "estimate": cand.estimate,
        "stderr": cand.stderr,
        "mean": cand.mean,
        "provenance": cand.provenance,
        "exact": False,
        "upper_bound": True,
        "seed": cfg.seed,
    }


def run_converge(cfg: ExperimentConfig) -> dict:
    system = linsys.parse_system_spec(cfg.params["system"])
    spec = torus.parse_spec(cfg.params["spec"])
    alpha = parse_alpha(str(cfg.params["alpha"]))
    primes = parse_int_list(str(cfg.params["primes"]))
    table = extremal.convergence_experiment(
        system, alpha, primes, spec, seed=cfg.seed,
        subset_budget=_budget(cfg.params.get("budget"), extremal.DEFAULT_SUBSET_BUDGET),
        restarts=int(cfg.params.get("restarts", 10)),
        steps=int(cfg.params.get("steps", 200)),
        grid_cells=int(cfg.params.get("q", 16)),
        torus_samples=int(cfg.params.get("samples", 200_000)),
        search_samples=int(cfg.params.get("search_samples", 20_000)),
    )
    return {
        "system": system.label,
        "alpha": str(alpha),
        "rows": [
            {"group": r.group, "method": r.method, "estimate": r.estimate,
             "stderr": r.stderr, "exact": r.exact, "seed": r.seed}
            for r in table.rows
        ],
        "csv": table.to_csv(),
    }


def run_counterexamples(cfg: ExperimentConfig) -> dict:
    p = int(cfg.params.get("p", 13))
    rows = []

    def add(check, expected, actual, ok, note=""):
        rows.append({
            "check": check,
            "expected": expected,
            "actual": actual,
            "status": "PASS" if ok else "FAIL",
            "note": note,
        })

    def skip(check, note):
        rows.append({"check": check, "expected": "", "actual": "",
                     "status": "SKIP", "note": note})

    if p == 2:
        skip("quadratic-phase-u3", "needs an odd prime")
        skip("quadratic-phase-u2", "needs an odd prime")
    else:
        f = cyclic.quadratic_phase(p)
        u3 = cyclic.gowers_norm_pow(f, 3)
        add("quadratic-phase-u3", 1.0, u3, abs(u3 - 1.0) <= 1e-9)
        u2 = cyclic.gowers_norm_pow(f, 2)
        add("quadratic-phase-u2", 1.0 / p, u2, abs(u2 - 1.0 / p) <= 1e-9)

    schur = linsys.make_system([(1, 0), (0, 1), (1, 1)], label="schur")
    for q in (7, 101):
        val = cyclic.sol_discrete(cyclic.sumfree_interval(q), schur).real
        add(f"sumfree-zero-p{q}", 0.0, val, abs(val) <= 1e-12)
    density = float(np.mean(cyclic.sumfree_interval(101).values.real))
    add("sumfree-density-p101", ">= 0.33", density, density >= 0.33)

    u2sys = linsys.make_cube_system(2)
    r1 = lattice.rank(lattice.leibman_lattice(u2sys, 1))
    r2 = lattice.rank(lattice.leibman_lattice(u2sys, 2))
    add("cube2-degree1-rank", 3, r1, r1 == 3)
    add("cube2-degree2-rank", 4, r2, r2 == 4)
    r_schur = lattice.rank(lattice.leibman_lattice(schur, 2))
    add("schur-degree2-rank", 3, r_schur, r_schur == 3)

    model = torus.build_model(torus.FilteredTorusSpec((2,)), schur)
    f_cos = torus.TrigPolynomial(1, (((0,), 0.5), ((1,), 0.25), ((-1,), 0.25)))
    val = torus.exact_trig_average(f_cos, model)
    add("schur-cube-of-mean", 0.125, val.real,
        abs(val - 0.125) <= 1e-12, "product formula on the full torus")

    failed = sum(1 for r in rows if r["status"] == "FAIL")
    lines = ["check,expected,actual,status,note"]
    for r in rows:
        lines.append(f"{r['check']},{r['expected']},{r['actual']},{r['status']},{r['note']}")
    return {
        "p": p,
        "rows": rows,
        "all_pass": failed == 0,
        "failed": failed,
        "csv": "\n".join(lines) + "\n",
    }


HANDLERS = {
    "leibman": run_leibman,
    "complexity": run_complexity,
    "sol-discrete": run_sol_discrete,
    "sol-torus": run_sol_torus,
    "gowers": run_gowers,
    "min-k": run_min_k,
    "balance-phi-k": run_balance_phi_k,
    "balance-orbit": run_balance_orbit,
    "m-discrete": run_m_discrete,
    "m-torus": run_m_torus,
    "converge": run_converge,
    "counterexamples": run_counterexamples,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Dispatch a validated config to its handler and wrap the result."""
    start = time.perf_counter()
    payload = HANDLERS[config.command](config)
    wall = time.perf_counter() - start
    failed = payload.get("failed", 0) if isinstance(payload, dict) else 0
    return ResultRecord(
        config_hash=config_hash(config),
        timestamp=time.time(),
        version=__version__,
        payload=payload,
        wall_time=wall,
        failed_checks=failed,
    )


# ---------------------------------------------------------------------------
# argparse wiring

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--threads", type=int, default=None,
                        help="accepted for compatibility; never changes results")
    common.add_argument("--budget", type=int, default=None,
                        help="override the work budget of the command")
    common.add_argument("--out", type=str, default=None,
                        help="write the payload to this path plus a .meta.json sidecar")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="payload format (default: csv for tables, json otherwise)")
    common.add_argument("--config", type=str, default=None,
                        help="load parameters from a JSON config file")

    parser = argparse.ArgumentParser(
        prog="linforms",
        description="Averages across systems of integer linear forms on Z_N and filtered tori",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("leibman", parents=[common],
                       help="canonical lattice basis of a system at a degree")
    p.add_argument("--system", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--complement", action="store_true")

    p = sub.add_parser("complexity", parents=[common],
                       help="size and independence-based complexity of a system")
    p.add_argument("--system", required=True)
    p.add_argument("--s-max", dest="s_max", type=int, default=linsys.DEFAULT_S_MAX)

    p = sub.add_parser("sol-discrete", parents=[common],
                       help="exact brute-force average over Z_N")
    p.add_argument("--system", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--f", required=True,
                   help="quadphase | sumfree | const:c | @file")
    p.add_argument("--pattern", default=None, help="'alt' or comma signs like +,-,-,+")

    p = sub.add_parser("sol-torus", parents=[common],
                       help="subtorus average (exact for trig polynomials, else Monte Carlo)")
    p.add_argument("--system", required=True)
    p.add_argument("--spec", required=True, help="comma degree list, e.g. 1,2")
    p.add_argument("--f", required=True, help="grid:@file | trig:@file | expr:cos1 | expr:one")
    p.add_argument("--pattern", default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--exact", action="store_true")

    p = sub.add_parser("gowers", parents=[common], help="U^d norm power on Z_N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--f", required=True)

    p = sub.add_parser("min-k", parents=[common],
                       help="least k from which a character vanishes under the power map")
    p.add_argument("--system", required=True)
    p.add_argument("--chi", required=True, help="rows ';'-separated, entries ','-separated")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--domain-degree", dest="domain_degree", type=int, default=2)

    balance = sub.add_parser("balance", help="balance diagnostics")
    bsub = balance.add_subparsers(dest="balance_kind")
    p = bsub.add_parser("phi-k", parents=[common],
                        help="exact character census for the power map")
    p.add_argument("--system", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--freq", type=int, required=True)
    p.add_argument("--domain-degree", dest="domain_degree", type=int, default=2)
    p = bsub.add_parser("orbit", parents=[common],
                        help="Weyl character sums of a periodic polynomial orbit")
    p.add_argument("--system", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--coeffs", required=True)
    p.add_argument("--freq", type=int, required=True)

    p = sub.add_parser("m-discrete", parents=[common],
                       help="minimal subset average on Z_p")
    p.add_argument("--system", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--method", choices=("auto", "exhaustive", "search"), default="auto")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--levels", type=int, default=4,
                   help="level count of the companion fractional estimate")

    p = sub.add_parser("m-torus", parents=[common],
                       help="annealed upper bound for the minimal torus average")
    p.add_argument("--system", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--search-samples", dest="search_samples", type=int, default=20_000)

    p = sub.add_parser("converge", parents=[common],
                       help="discrete minima across primes plus the torus bound")
    p.add_argument("--system", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--primes", required=True)
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--search-samples", dest="search_samples", type=int, default=20_000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--steps", type=int, default=200)

    p = sub.add_parser("counterexamples", parents=[common],
                       help="run the counterexample check table")
    p.add_argument("--p", type=int, default=13)

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    command = args.command
    if command == "balance":
        kind = getattr(args, "balance_kind", None)
        if kind not in ("phi-k", "orbit"):
            raise ValidationError("balance needs a subcommand: phi-k or orbit")
        command = f"balance-{kind}"
    if command is None:
        raise ValidationError("no command given")
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = ExperimentConfig.from_json(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read config file {args.config}: {exc}") from exc
        if cfg.command != command:
            raise ValidationError(
                f"config file is for {cfg.command!r}, command line says {command!r}"
            )
        return cfg
    skip = {"command", "balance_kind", "seed", "threads", "budget", "out",
            "format", "config"}
    params = {}
    for key, value in vars(args).items():
        if key in skip or value is None or value is False:
            continue
        params[key] = value
    if getattr(args, "budget", None) is not None:
        params["budget"] = args.budget
    return ExperimentConfig(command=command, params=params, seed=args.seed)


def render_payload(payload: dict, fmt: Optional[str]) -> str:
    if fmt is None:
        fmt = "csv" if "csv" in payload else "json"
    if fmt == "csv":
        if "csv" in payload:
            return payload["csv"]
        lines = ["key,value"]
        for key, value in payload.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value)
            lines.append(f"{key},{value}")
        return "\n".join(lines) + "\n"
    doc = {k: v for k, v in payload.items() if k != "csv"}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


STICKY_FLAGS = ("--chi", "--coeffs", "--pattern", "--alpha")


def _glue_flag_values(argv: list[str]) -> list[str]:
    """Join flag/value pairs whose values may start with '-' (e.g. --chi -3,1)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in STICKY_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_glue_flag_values(list(argv)))
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION
    threads = getattr(args, "threads", None) or os.environ.get("LINFORMS_THREADS")
    _ = threads  # accepted but results never depend on it
    try:
        config = _config_from_args(args)
        record = run(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = render_payload(record.payload, getattr(args, "format", None))
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        meta = {
            "config_hash": record.config_hash,
            "config": json.loads(config.to_json()),
            "timestamp": record.timestamp,
            "version": record.version,
            "wall_time": record.wall_time,
            "payload_path": out,
        }
        with open(out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    if record.failed_checks:
        return EXIT_NUMERIC
    return EXIT_OK


def entry():  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
