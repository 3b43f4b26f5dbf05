"""Command-line front end.

A run is described by a flat JSON document (see :class:`RunConfig`);
command-line flags override its values. Every route writes a table as CSV
(17 significant digits, LF line ends) or JSON, and failures produce a one
line JSON error record on stderr with a nonzero exit status.

Exit status: 0 success, 1 a diagnostic failed, 2 invalid configuration,
3 solver or oracle failure, 4 every Monte Carlo path was censored.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .montecarlo import AllCensoredError, estimate_profile
from .oracles import (OracleError, oracle_bm_annulus, oracle_bm_interval, oracle_drift_1d,
                      oracle_stable_interval)
from .process import (Annulus, BoundarySubset, Constant, ExteriorSet, Interval, Linear, Noise,
                      ProcessSpec, _check_target, coefficient_from_record)
from .solver import (MAX_FRACTIONAL_N, ExteriorData, SolverError, solve_elliptic_1d,
                     solve_fractional_1d, solve_laplace_annulus)
from .stable import ks_statistic, sample_standard_stable

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config", "run", "main",
           "PRESETS", "ROUTES"]

PRESETS = ("bm_interval", "bm_annulus", "drift_interval", "stable_interval", "custom")
ROUTES = ("mc", "solve", "oracle", "compare", "sample-check")
FORMATS = ("csv", "json")
COMPARE_COLUMNS = ("x", "mc_p", "mc_stderr", "solver_p", "oracle_p", "|mc-oracle|",
                   "|solver-oracle|")
KS_THRESHOLD = 0.02

_COMMON = {"problem", "route", "n_paths", "dt", "max_time", "grid", "seed", "sweep", "out",
           "format"}
_PRESET_KEYS = {
    "bm_interval": {"r"},
    "bm_annulus": {"r", "R"},
    "drift_interval": {"r"},
    "stable_interval": {"r", "alpha"},
    "custom": {"dim", "a", "b", "r", "R", "alpha", "drift", "diffusion", "noise",
               "target_boundary", "target_exterior"},
}
_DEFAULT_SWEEP = {
    "bm_interval": "-1.6:1.6:9",
    "bm_annulus": "2.2:3.8:9",
    "drift_interval": "-1.6:1.6:9",
    "stable_interval": "-1.6:1.6:9",
}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: Optional[str], message: str, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def record(self) -> dict:
        rec = {"error": "config", "field": self.field, "message": str(self)}
        if self.line is not None:
            rec["line"] = self.line
        return rec


@dataclass(frozen=True)
class RunConfig:
    """A validated run description.

    Common keys: ``problem``, ``route``, ``n_paths``, ``dt``, ``max_time``,
    ``grid``, ``seed``, ``sweep`` (a list or ``"START:STOP:COUNT"``),
    ``out`` and ``format``. Presets add ``r``, ``R`` and ``alpha``.
    ``custom`` problems also take ``dim``, ``a``, ``b``, ``drift`` and
    ``diffusion`` (coefficient records such as ``{"name": "linear",
    "kappa": 1}``), ``noise`` and one of ``target_boundary`` (boundary
    component names) or ``target_exterior`` (closed intervals, ``"inf"``
    allowed).
    """

    problem: str
    route: str = "compare"
    r: Optional[float] = None
    R: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    dim: Optional[int] = None
    alpha: Optional[float] = None
    drift: Optional[dict] = None
    diffusion: Optional[dict] = None
    noise: Optional[str] = None
    target_boundary: Optional[tuple] = None
    target_exterior: Optional[tuple] = None
    n_paths: int = 100_000
    dt: float = 1e-4
    max_time: float = 1e4
    grid: int = 1000
    seed: int = 1
    sweep: tuple = ()
    out: Optional[str] = None
    format: str = "csv"

    def to_record(self) -> dict:
        rec = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if f.name == "sweep":
                v = list(v)
            elif f.name == "target_boundary":
                v = list(v)
            elif f.name == "target_exterior":
                v = [[_num_out(lo), _num_out(hi)] for lo, hi in v]
            rec[f.name] = v
        return rec


# -- parsing ------------------------------------------------------------------

def _num_out(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _real(key, v, positive=False) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "-inf"):
        v = float(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"{key} must be a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise ConfigError(key, f"{key} must not be NaN")
    if positive and not (v > 0 and math.isfinite(v)):
        raise ConfigError(key, f"{key} must be positive and finite, got {v}")
    return v


def _integer(key, v, minimum=None) -> int:
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"{key} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(key, f"{key} must be at least {minimum}, got {v}")
    return v


def parse_sweep(v) -> tuple:
    """``"START:STOP:COUNT"`` (inclusive ends) or a list of numbers, sorted and deduplicated."""
    if isinstance(v, str):
        parts = v.split(":")
        if len(parts) != 3:
            raise ConfigError("sweep", f"sweep {v!r} is not START:STOP:COUNT")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError("sweep", f"sweep {v!r} is not START:STOP:COUNT") from None
        if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
            raise ConfigError("sweep", "sweep needs finite ends and a positive count")
        # rounded so that e.g. -1.6:1.6:9 gives 0.4 rather than 0.39999999999999991
        pts = ([round(v, 12) + 0.0 for v in np.linspace(start, stop, count)] if count > 1
               else [start])
    elif isinstance(v, (list, tuple)):
        pts = [_real("sweep", p) for p in v]
    else:
        raise ConfigError("sweep", f"sweep must be a list or START:STOP:COUNT, got {v!r}")
    if not pts:
        raise ConfigError("sweep", "sweep is empty")
    if not all(math.isfinite(p) for p in pts):
        raise ConfigError("sweep", "sweep points must be finite")
    return tuple(sorted(set(float(p) for p in pts)))


def _from_record(rec: dict, route_override: Optional[str] = None) -> RunConfig:
    if not isinstance(rec, dict):
        raise ConfigError(None, "configuration must be a JSON object")
    rec = dict(rec)
    if route_override is not None:
        rec["route"] = route_override
    route = rec.get("route", "compare")
    if route not in ROUTES:
        raise ConfigError("route", f"unknown route {route!r}; expected one of {list(ROUTES)}")
    if "problem" not in rec:
        if route != "sample-check":
            raise ConfigError("problem", "problem is required")
        rec["problem"] = "stable_interval"
    problem = rec["problem"]
    if problem not in PRESETS:
        raise ConfigError("problem", f"unknown problem {problem!r}; expected one of {list(PRESETS)}")
    allowed = _COMMON | _PRESET_KEYS[problem]
    if route == "sample-check":
        allowed = allowed | {"alpha"}
    for key in sorted(rec):
        if key not in allowed:
            known = key in set().union(*_PRESET_KEYS.values())
            why = f"not used by problem {problem!r}" if known else "unknown key"
            raise ConfigError(key, f"{key}: {why}")

    kw = {"problem": problem, "route": route}
    for key in ("r", "R", "a", "b"):
        if key in rec:
            kw[key] = _real(key, rec[key])
    if "alpha" in rec and rec["alpha"] is not None:
        a = _real("alpha", rec["alpha"])
        if not 0 < a < 2:
            raise ConfigError("alpha", f"alpha must lie in (0, 2), got {a}")
        kw["alpha"] = a
    if "dim" in rec:
        kw["dim"] = _integer("dim", rec["dim"])
    for key in ("drift", "diffusion"):
        if key in rec:
            if not isinstance(rec[key], dict):
                raise ConfigError(key, f"{key} must be a coefficient record like {{\"name\": \"constant\", \"value\": 0}}")
            kw[key] = dict(rec[key])
    if "noise" in rec:
        kw["noise"] = rec["noise"]
    if "target_boundary" in rec and "target_exterior" in rec:
        raise ConfigError("target_exterior", "give either target_boundary or target_exterior, not both")
    if "target_boundary" in rec:
        tb = rec["target_boundary"]
        if isinstance(tb, str):
            tb = [tb]
        if not isinstance(tb, list) or not all(isinstance(s, str) for s in tb) or not tb:
            raise ConfigError("target_boundary", "target_boundary must be a list of component names")
        kw["target_boundary"] = tuple(sorted(set(tb)))
    if "target_exterior" in rec:
        te = rec["target_exterior"]
        try:
            pieces = tuple((_real("target_exterior", lo), _real("target_exterior", hi)) for lo, hi in te)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("target_exterior", "target_exterior must be a list of [lo, hi] pairs") from None
        if not pieces:
            raise ConfigError("target_exterior", "target_exterior is empty")
        kw["target_exterior"] = tuple(sorted(pieces))

    if "n_paths" in rec:
        kw["n_paths"] = _integer("n_paths", rec["n_paths"], 1)
    if "dt" in rec:
        kw["dt"] = _real("dt", rec["dt"], positive=True)
    if "max_time" in rec:
        kw["max_time"] = _real("max_time", rec["max_time"], positive=True)
    if "grid" in rec:
        kw["grid"] = _integer("grid", rec["grid"], 5)
    if "seed" in rec:
        kw["seed"] = _integer("seed", rec["seed"], 0)
    if "out" in rec and rec["out"] is not None:
        if not isinstance(rec["out"], str):
            raise ConfigError("out", "out must be a path string")
        kw["out"] = rec["out"]
    if "format" in rec:
        if rec["format"] not in FORMATS:
            raise ConfigError("format", f"format must be one of {list(FORMATS)}")
        kw["format"] = rec["format"]

    if problem != "custom":
        kw.setdefault("r", 2.0)
        if problem == "bm_annulus":
            kw.setdefault("R", 4.0)
    sweep = rec.get("sweep", _DEFAULT_SWEEP.get(problem))
    if sweep is None and route != "sample-check":
        raise ConfigError("sweep", "custom problems need a sweep")
    kw["sweep"] = parse_sweep(sweep) if sweep is not None else ()
    cfg = RunConfig(**kw)
    if route != "sample-check":
        resolve(cfg)
    return cfg


def parse_config(text: str, route: Optional[str] = None) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(None, f"malformed document: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                          line=exc.lineno) from None
    return _from_record(rec, route)


def serialize_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_record(), sort_keys=True, indent=2) + "\n"


# -- problems -------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    spec: ProcessSpec
    domain: object
    target: object
    solver: Optional[Callable]    # grid n -> GridSolution
    oracle: Optional[Callable]    # x -> OracleResult
    dim: int

    def start(self, x: float) -> np.ndarray:
        return np.array([x]) if self.dim == 1 else np.array([x, 0.0])


def _interval_oracle_stable(r, alpha, right: bool):
    if right:
        return lambda x: oracle_stable_interval(x, r, alpha)
    return lambda x: oracle_stable_interval(-x, r, alpha)


def resolve(cfg: RunConfig) -> Problem:
    """Turn a configuration into process, domain, target, solver and oracle."""
    p = cfg.problem
    if p in ("bm_interval", "drift_interval", "stable_interval") and not cfg.r > 0:
        raise ConfigError("r", "r must be positive")
    if p == "bm_interval":
        r = cfg.r
        prob = Problem(ProcessSpec(), Interval(-r, r), BoundarySubset("right"),
                       lambda n: solve_elliptic_1d(0.0, 1.0, (-r, r), 0.0, 1.0, n),
                       lambda x: oracle_bm_interval(x, r), 1)
    elif p == "drift_interval":
        r = cfg.r
        spec = ProcessSpec(drift=Linear(1.0), diffusion=Constant(1.0))
        prob = Problem(spec, Interval(-r, r), BoundarySubset("right"),
                       lambda n: solve_elliptic_1d(spec.drift, spec.diffusion, (-r, r), 0.0, 1.0, n),
                       lambda x: oracle_drift_1d(x, r, spec.drift, spec.diffusion), 1)
    elif p == "stable_interval":
        if cfg.alpha is None:
            raise ConfigError("alpha", "stable_interval needs alpha")
        r, a = cfg.r, cfg.alpha
        ext = ExteriorData.indicator([(r, math.inf)], -r, r)
        prob = Problem(ProcessSpec(noise=Noise("stable", a)), Interval(-r, r), ExteriorSet.right_of(r),
                       lambda n: solve_fractional_1d(a, (-r, r), ext, n),
                       _interval_oracle_stable(r, a, True), 1)
    elif p == "bm_annulus":
        r, R = cfg.r, cfg.R
        if not 0 < r < R:
            raise ConfigError("R", "need 0 < r < R")
        prob = Problem(ProcessSpec(dim=2), Annulus(r, R), BoundarySubset("inner"),
                       lambda n: solve_laplace_annulus(r, R, 1.0, 0.0, n),
                       lambda x: oracle_bm_annulus(x, r, R), 2)
    else:
        prob = _resolve_custom(cfg)
    lo, hi = prob.domain.bounds
    for x in cfg.sweep:
        if not lo < x < hi:
            raise ConfigError("sweep", f"sweep point {x} is not inside the domain ({lo}, {hi})")
    if cfg.route in ("solve", "compare") and prob.spec.noise.kind == "stable" \
            and cfg.grid > MAX_FRACTIONAL_N:
        raise ConfigError("grid", f"grid must not exceed {MAX_FRACTIONAL_N} for the nonlocal solver")
    if cfg.route in ("solve", "compare") and prob.solver is None:
        raise ConfigError("route", "no deterministic solver for this problem")
    if cfg.route in ("oracle", "compare") and prob.oracle is None:
        raise ConfigError("route", "no oracle for this problem")
    return prob


def _resolve_custom(cfg: RunConfig) -> Problem:
    dim = cfg.dim if cfg.dim is not None else 1
    if dim not in (1, 2):
        raise ConfigError("dim", "dim must be 1 or 2")
    kind = cfg.noise if cfg.noise is not None else "brownian"
    try:
        noise = Noise(kind, cfg.alpha if kind != "brownian" else None)
    except (ValueError, TypeError) as exc:
        field = "alpha" if kind in ("stable", "brownian+stable") else "noise"
        raise ConfigError(field, str(exc)) from None
    if kind == "brownian" and cfg.alpha is not None:
        raise ConfigError("alpha", "alpha is only used with stable noise")
    coeffs = {}
    for key, default in (("drift", {"name": "constant", "value": 0.0}),
                         ("diffusion", {"name": "constant", "value": 1.0})):
        rec = getattr(cfg, key) or default
        try:
            coeffs[key] = coefficient_from_record(rec)
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, f"{key}: {exc}") from None
    try:
        spec = ProcessSpec(dim, coeffs["drift"], coeffs["diffusion"], noise)
    except ValueError as exc:
        raise ConfigError("dim", str(exc)) from None

    if dim == 1:
        if cfg.a is None or cfg.b is None:
            if cfg.r is None:
                raise ConfigError("a", "a 1D custom problem needs a and b (or r)")
            lo, hi = -cfg.r, cfg.r
        else:
            lo, hi = cfg.a, cfg.b
        if cfg.R is not None:
            raise ConfigError("R", "R is only used by annulus domains")
        try:
            domain = Interval(lo, hi)
        except ValueError as exc:
            raise ConfigError("b", str(exc)) from None
    else:
        if cfg.a is not None or cfg.b is not None:
            raise ConfigError("a", "2D custom problems use r and R")
        if cfg.r is None or cfg.R is None or not 0 < cfg.r < cfg.R:
            raise ConfigError("R", "a 2D custom problem needs 0 < r < R")
        domain = Annulus(cfg.r, cfg.R)

    if cfg.target_boundary is None and cfg.target_exterior is None:
        raise ConfigError("target_boundary", "custom problems need target_boundary or target_exterior")
    if cfg.target_boundary is not None:
        target = BoundarySubset(*cfg.target_boundary)
    else:
        target = ExteriorSet(*cfg.target_exterior)
    try:
        _check_target(spec, domain, target)
        spec.check_finite(domain)
    except ValueError as exc:
        raise ConfigError("target_exterior" if cfg.target_exterior else "target_boundary", str(exc)) from None

    solver = oracle = None
    zero_drift = isinstance(spec.drift, Constant) and not np.any(np.asarray(spec.drift.value))
    if dim == 1:
        ext = ExteriorData.indicator(target, lo, hi)
        gl, gr = ext.value_at(lo, -1), ext.value_at(hi, +1)
        if kind == "brownian" and not np.ndim(spec.drift(lo)) and not np.ndim(spec.diffusion(lo)):
            solver = lambda n: solve_elliptic_1d(spec.drift, spec.diffusion, (lo, hi), gl, gr, n)
            if lo == -hi and (gl, gr) in ((0.0, 1.0), (1.0, 0.0)):
                right = gr == 1.0

                def oracle(x, right=right):
                    res = oracle_drift_1d(x, hi, spec.drift, spec.diffusion)
                    if right:
                        return res
                    return type(res)(1.0 - res.value, res.abs_error_bound)
        elif kind == "stable" and zero_drift:
            solver = lambda n: solve_fractional_1d(noise.alpha, (lo, hi), ext, n)
            if lo == -hi:
                if ext.pieces == ExteriorData.indicator([(hi, math.inf)], lo, hi).pieces:
                    oracle = _interval_oracle_stable(hi, noise.alpha, True)
                elif ext.pieces == ExteriorData.indicator([(-math.inf, lo)], lo, hi).pieces:
                    oracle = _interval_oracle_stable(hi, noise.alpha, False)
    else:
        iso = isinstance(spec.diffusion, Constant) and np.allclose(spec.diffusion_at(np.zeros(2)), np.eye(2))
        if kind == "brownian" and zero_drift and iso:
            comps = set(cfg.target_boundary or ())
            if cfg.target_boundary is not None and comps in ({"inner"}, {"outer"}):
                inner = 1.0 if comps == {"inner"} else 0.0
                r, R = domain.r, domain.R
                solver = lambda n: solve_laplace_annulus(r, R, inner, 1.0 - inner, n)

                def oracle(x, inner=inner):
                    res = oracle_bm_annulus(x, r, R)
                    if inner:
                        return res
                    return type(res)(1.0 - res.value, res.abs_error_bound)
    return Problem(spec, domain, target, solver, oracle, dim)


# -- routes ---------------------------------------------------------------------

class RouteFailure(RuntimeError):
    def __init__(self, kind: str, message: str, status: int):
        super().__init__(message)
        self.kind, self.status = kind, status


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def _table(columns, rows, fmt: str, cfg: RunConfig, summary: dict) -> str:
    if fmt == "csv":
        lines = [",".join(columns)] + [",".join(_fmt(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"

    def clean(v):
        if isinstance(v, (int, np.integer)):
            return int(v)
        v = float(v)
        return v if math.isfinite(v) else None
    doc = {"config": cfg.to_record(), "columns": list(columns),
           "rows": [[clean(v) for v in row] for row in rows],
           "summary": {k: clean(v) if isinstance(v, (int, float, np.number)) else v
                       for k, v in summary.items()}}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _mc(cfg, prob):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = estimate_profile([prob.start(x) for x in cfg.sweep], prob.spec, prob.domain,
                                   prob.target, cfg.n_paths, cfg.dt, cfg.max_time, cfg.seed)
    except AllCensoredError as exc:
        raise RouteFailure("all-censored", str(exc), 4) from None
    return [est for _, est in res]


def _solve(cfg, prob):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", category=UserWarning)
            return prob.solver(cfg.grid)
    except (SolverError, UserWarning) as exc:
        raise RouteFailure("solver", str(exc), 3) from None


def _oracle(cfg, prob):
    try:
        return [prob.oracle(x) for x in cfg.sweep]
    except (OracleError, ValueError) as exc:
        raise RouteFailure("oracle", str(exc), 3) from None


def _route_table(cfg: RunConfig):
    if cfg.route == "sample-check":
        alphas = [cfg.alpha] if cfg.alpha is not None else [0.5, 1.0, 1.5]
        rows, worst = [], 0.0
        for a in alphas:
            s = sample_standard_stable(a, cfg.n_paths, seed=cfg.seed)
            d = ks_statistic(s, a)
            worst = max(worst, d)
            rows.append((a, cfg.n_paths, d, KS_THRESHOLD, int(d < KS_THRESHOLD)))
        summary = {"max_ks": worst, "threshold": KS_THRESHOLD}
        return ("alpha", "n", "ks", "threshold", "pass"), rows, summary, 0 if worst < KS_THRESHOLD else 1

    prob = resolve(cfg)
    if cfg.route == "mc":
        ests = _mc(cfg, prob)
        rows = [(x, e.p_hat, e.std_err, e.n_paths, e.n_censored, e.ci95[0], e.ci95[1])
                for x, e in zip(cfg.sweep, ests)]
        summary = {"censored": sum(e.n_censored for e in ests), "paths": sum(e.n_paths for e in ests)}
        return ("x", "p_hat", "std_err", "n_paths", "n_censored", "ci95_lo", "ci95_hi"), rows, summary, 0
    if cfg.route == "solve":
        sol = _solve(cfg, prob)
        rows = list(zip(sol.nodes.tolist(), sol.values.tolist()))
        summary = {"nodes": len(sol), "residual_inf": sol.residual_inf}
        return ("x", "value"), rows, summary, 0
    if cfg.route == "oracle":
        res = _oracle(cfg, prob)
        rows = [(x, o.value, o.abs_error_bound) for x, o in zip(cfg.sweep, res)]
        return ("x", "oracle_p", "abs_error_bound"), rows, {"points": len(rows)}, 0

    # compare
    orc = _oracle(cfg, prob)
    sol = _solve(cfg, prob)
    ests = _mc(cfg, prob)
    rows = []
    for x, o, e in zip(cfg.sweep, orc, ests):
        sp = sol.interpolate(x) if sol.covers(x) else math.nan
        rows.append((x, e.p_hat, e.std_err, sp, o.value, abs(e.p_hat - o.value), abs(sp - o.value)))
    solver_err = [row[6] for row in rows if math.isfinite(row[6])]
    summary = {
        "max_mc_oracle": max(row[5] for row in rows),
        "max_solver_oracle": max(solver_err) if solver_err else math.nan,
        "solver_points_skipped": len(rows) - len(solver_err),
        "censored": sum(e.n_censored for e in ests),
        "paths": sum(e.n_paths for e in ests),
    }
    return COMPARE_COLUMNS, rows, summary, 0


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one configuration and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        columns, rows, summary, status = _route_table(cfg)
    except ConfigError as exc:
        stderr.write(json.dumps(exc.record(), sort_keys=True) + "\n")
        return 2
    except RouteFailure as exc:
        stderr.write(json.dumps({"error": exc.kind, "message": str(exc)}, sort_keys=True) + "\n")
        return exc.status
    text = _table(columns, rows, cfg.format, cfg, summary)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    stderr.write(cfg.route + ": " + ", ".join(f"{k}={_summary_value(v)}" for k, v in summary.items()) + "\n")
    return status


def _summary_value(v):
    return f"{v:.3e}" if isinstance(v, float) else str(v)


# -- entry point ----------------------------------------------------------------

_SUBCOMMANDS = {"estimate": "mc", "solve": "solve", "oracle": "oracle", "compare": "compare",
                "sample-check": "sample-check"}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levy-escape",
                                 description="Escape probabilities by Monte Carlo, grid solvers and oracles.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, route in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {route} route")
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--problem", choices=PRESETS, help="preset, when no config file is given")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--seed", type=int)
        p.add_argument("--paths", type=int, dest="n_paths")
        p.add_argument("--dt", type=float)
        p.add_argument("--grid", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--sweep", metavar="START:STOP:COUNT")
    return ap


def _join_sweep(argv):
    # let "--sweep -1.5:1.5:7" through argparse, which would read it as a flag
    out, it = [], iter(argv)
    for a in it:
        if a == "--sweep":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--sweep={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_sweep(argv))
    route = _SUBCOMMANDS[args.command]
    try:
        rec = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
            try:
                rec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(None, f"malformed document: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                                  line=exc.lineno) from None
            if not isinstance(rec, dict):
                raise ConfigError(None, "configuration must be a JSON object")
        for key in ("problem", "out", "format", "seed", "n_paths", "dt", "grid", "alpha", "sweep"):
            v = getattr(args, key)
            if v is not None:
                rec[key] = v
        cfg = _from_record(rec, route)
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.record(), sort_keys=True) + "\n")
        return 2
    return run(cfg)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
