"""Stochastic systems, domains, targets and first-exit simulation.

The state follows the Euler scheme

    X_{n+1} = X_n + b(X_n) dt + sigma(X_n) sqrt(dt) Z + (C dt)^(1/alpha) S

with Z standard Gaussian and S standard symmetric stable (isotropic in two
dimensions, so that its exponent is ``-|z|^alpha``). Exits are detected by
inspecting the state after each step; nothing is interpolated within a step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Union

import numpy as np

from . import _kernels as K
from .rng import TAG_PATH, RandomStream, _u64
from .stable import check_alpha, stable_coeffs

__all__ = [
    "Constant", "Linear", "Table", "COEFFICIENTS", "coefficient_from_record",
    "Noise", "Brownian", "Stable", "BrownianPlusStable",
    "ProcessSpec", "Interval", "Annulus", "BoundarySubset", "ExteriorSet",
    "Outcome", "ExitRecord", "step", "classify", "simulate_until_exit",
    "DEFAULT_MAX_TIME",
]

DEFAULT_MAX_TIME = 1e4


# -- coefficients -------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    """Constant coefficient. In 2D a drift takes a pair and a diffusion a 2x2 matrix."""

    value: Union[float, tuple] = 0.0

    def __call__(self, x):
        return np.asarray(self.value, dtype=float) if np.ndim(self.value) else float(self.value)

    def _code(self):
        return 0, np.ravel(np.asarray(self.value, dtype=float)).copy()


@dataclass(frozen=True)
class Linear:
    """Linear coefficient ``offset - kappa * x`` (``b(x) = -kappa x`` by default)."""

    kappa: float = 1.0
    offset: Union[float, tuple] = 0.0

    def __call__(self, x):
        off = np.asarray(self.offset, dtype=float)
        return off - self.kappa * np.asarray(x, dtype=float) if np.ndim(x) else float(self.offset) - self.kappa * x

    def _code(self):
        return 1, np.concatenate([[float(self.kappa)], np.ravel(np.asarray(self.offset, dtype=float))])


@dataclass(frozen=True)
class Table:
    """Tabulated 1D coefficient with linear interpolation (flat beyond the ends)."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise ValueError("table needs matching 1D knots and values, at least two")
        if np.any(np.diff(k) <= 0):
            raise ValueError("table knots must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("table values must be finite")
        object.__setattr__(self, "knots", tuple(map(float, k)))
        object.__setattr__(self, "values", tuple(map(float, v)))

    def __call__(self, x):
        return float(K.table_1d(np.asarray(self.knots), np.asarray(self.values), float(x)))

    def _code(self):
        return 2, np.zeros(1)


COEFFICIENTS = {"constant": Constant, "linear": Linear, "table": Table}


def coefficient_from_record(rec: dict):
    """Build a registry coefficient from e.g. ``{"name": "linear", "kappa": 1}``."""
    rec = dict(rec)
    name = rec.pop("name", None)
    if name not in COEFFICIENTS:
        raise ValueError(f"unknown coefficient {name!r}; known: {sorted(COEFFICIENTS)}")
    return COEFFICIENTS[name](**rec)


# -- noise --------------------------------------------------------------------

@dataclass(frozen=True)
class Noise:
    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("brownian", "stable", "brownian+stable"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "brownian":
            if self.alpha is not None:
                raise ValueError("Brownian noise takes no stability index")
        else:
            object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @property
    def has_brownian(self) -> bool:
        return self.kind != "stable"

    @property
    def has_stable(self) -> bool:
        return self.kind != "brownian"


def Brownian() -> Noise:
    return Noise("brownian")


def Stable(alpha: float) -> Noise:
    return Noise("stable", alpha)


def BrownianPlusStable(alpha: float) -> Noise:
    return Noise("brownian+stable", alpha)


Coefficient = Union[Constant, Linear, Table, Callable]


@dataclass(frozen=True)
class ProcessSpec:
    """An SDE ``dX = b dt + sigma dW + dL`` in one or two dimensions.

    ``drift`` and ``diffusion`` are registry coefficients or arbitrary
    callables; only registry coefficients run in compiled code.
    """

    dim: int = 1
    drift: Coefficient = field(default_factory=Constant)
    diffusion: Coefficient = field(default_factory=lambda: Constant(1.0))
    noise: Noise = field(default_factory=Brownian)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.dim == 2:
            if isinstance(self.drift, Table) or isinstance(self.diffusion, Table):
                raise ValueError("coefficient tables are one-dimensional")
            if isinstance(self.diffusion, Linear):
                raise ValueError("2D diffusion must be constant or a callable")

    @classmethod
    def from_record(cls, rec: dict) -> "ProcessSpec":
        """From ``{"dim", "drift": {...}, "diffusion": {...}, "noise": {"kind", "alpha"}}``."""
        rec = dict(rec)
        unknown = set(rec) - {"dim", "drift", "diffusion", "noise"}
        if unknown:
            raise ValueError(f"unknown process keys: {sorted(unknown)}")
        dim = int(rec.get("dim", 1))
        drift = coefficient_from_record(rec.get("drift", {"name": "constant", "value": 0.0}))
        diff = coefficient_from_record(rec.get("diffusion", {"name": "constant", "value": 1.0}))
        noise = Noise(**rec.get("noise", {"kind": "brownian"}))
        return cls(dim, drift, diff, noise)

    @property
    def compiled(self) -> bool:
        return all(isinstance(c, (Constant, Linear, Table)) for c in (self.drift, self.diffusion))

    def drift_at(self, x: np.ndarray) -> np.ndarray:
        v = self.drift(x[0] if self.dim == 1 else x)
        return np.broadcast_to(np.asarray(v, dtype=float), (self.dim,)).copy()

    def diffusion_at(self, x: np.ndarray) -> np.ndarray:
        v = np.asarray(self.diffusion(x[0] if self.dim == 1 else x), dtype=float)
        if v.ndim == 0:
            return v * np.eye(self.dim)
        return v.reshape(self.dim, self.dim)

    def stable_scale(self, dt: float) -> float:
        if not self.noise.has_stable:
            return 0.0
        a = self.noise.alpha
        if self.dim == 1:
            return dt ** (1.0 / a)
        return (stable_coeffs(2, a).C * dt) ** (1.0 / a)

    # packed parameters for the compiled kernels
    def _packed(self):
        out = []
        for c in (self.drift, self.diffusion):
            kind, par = c._code()
            if isinstance(c, Table):
                out.append((kind, par, np.asarray(c.knots), np.asarray(c.values)))
            else:
                out.append((kind, par, np.zeros(1), np.zeros(1)))
        return out

    def check_finite(self, domain, n: int = 65) -> None:
        """Sample the coefficients on the closed domain; reject non-finite values."""
        for x in domain.sample_points(n):
            b = self.drift_at(x)
            s = self.diffusion_at(x)
            if not (np.all(np.isfinite(b)) and np.all(np.isfinite(s))):
                raise ValueError(f"non-finite drift or diffusion at x={x.tolist()}")


# -- domains and targets ----------------------------------------------------

@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    dim = 1

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError("interval needs finite a < b")

    @property
    def bounds(self):
        return float(self.a), float(self.b)

    def coordinate(self, x: np.ndarray) -> float:
        return float(x[0])

    def contains(self, x) -> bool:
        v = self.coordinate(np.atleast_1d(np.asarray(x, dtype=float)))
        return self.a < v < self.b

    def components(self):
        return {"left": (-math.inf, float(self.a)), "right": (float(self.b), math.inf)}

    def sample_points(self, n: int):
        return [np.array([v]) for v in np.linspace(self.a, self.b, n)]


@dataclass(frozen=True)
class Annulus:
    """Open annulus ``r < |x| < R`` centred at the origin."""

    r: float
    R: float
    dim = 2

    def __post_init__(self):
        if not (0 < self.r < self.R < math.inf):
            raise ValueError("annulus needs 0 < r < R")

    @property
    def bounds(self):
        return float(self.r), float(self.R)

    def coordinate(self, x: np.ndarray) -> float:
        return math.sqrt(x[0] * x[0] + x[1] * x[1])

    def contains(self, x) -> bool:
        return self.r < self.coordinate(np.asarray(x, dtype=float)) < self.R

    def components(self):
        return {"inner": (-math.inf, float(self.r)), "outer": (float(self.R), math.inf)}

    def sample_points(self, n: int):
        pts = []
        for rho in np.linspace(self.r, self.R, max(3, n // 8)):
            for th in np.linspace(0, 2 * math.pi, 8, endpoint=False):
                pts.append(np.array([rho * math.cos(th), rho * math.sin(th)]))
        return pts


Domain = Union[Interval, Annulus]


@dataclass(frozen=True)
class BoundarySubset:
    """Target made of boundary components: ``left``/``right`` or ``inner``/``outer``."""

    components: frozenset

    def __init__(self, *names):
        if len(names) == 1 and not isinstance(names[0], str):
            names = tuple(names[0])
        object.__setattr__(self, "components", frozenset(names))

    def pieces(self, domain: Domain) -> np.ndarray:
        comp = domain.components()
        bad = self.components - set(comp)
        if bad:
            raise ValueError(f"{sorted(bad)} are not boundary components of {domain}")
        return _as_pieces([comp[c] for c in sorted(self.components)])


@dataclass(frozen=True)
class ExteriorSet:
    """Target subset of the exterior, a union of closed intervals.

    In 2D the intervals refer to the radius ``|x|``; ``(0, r)`` is the
    closed inner disk.
    """

    pieces_: tuple

    def __init__(self, *pieces):
        if len(pieces) == 1 and np.ndim(pieces[0]) == 2:
            pieces = tuple(pieces[0])
        object.__setattr__(self, "pieces_", tuple((float(p[0]), float(p[1])) for p in pieces))
        for lo, hi in self.pieces_:
            if not lo <= hi:
                raise ValueError("exterior pieces need lo <= hi")

    @classmethod
    def right_of(cls, b: float) -> "ExteriorSet":
        return cls((b, math.inf))

    @classmethod
    def left_of(cls, a: float) -> "ExteriorSet":
        return cls((-math.inf, a))

    def pieces(self, domain: Domain) -> np.ndarray:
        lo, hi = domain.bounds
        for p, q in self.pieces_:
            # a closed piece must not reach into the open domain
            if p < hi and q > lo:
                raise ValueError(f"target piece [{p}, {q}] intersects the domain ({lo}, {hi})")
        return _as_pieces(self.pieces_)


Target = Union[BoundarySubset, ExteriorSet]


def _as_pieces(seq) -> np.ndarray:
    arr = np.asarray(list(seq), dtype=float).reshape(-1, 2)
    return arr if arr.size else np.zeros((0, 2))


def _check_target(spec: ProcessSpec, domain: Domain, target: Target) -> np.ndarray:
    if domain.dim != spec.dim:
        raise ValueError(f"domain is {domain.dim}D but the process is {spec.dim}D")
    if isinstance(target, BoundarySubset) and spec.noise.has_stable:
        raise ValueError("boundary targets need continuous paths; use an ExteriorSet with stable noise")
    return target.pieces(domain)


# -- stepping -----------------------------------------------------------------

class Outcome(IntEnum):
    TARGET = K.TARGET
    NON_TARGET = K.NON_TARGET
    CENSORED = K.CENSORED
    INSIDE = K.INSIDE


@dataclass(frozen=True)
class ExitRecord:
    exit_time: float
    exit_position: np.ndarray
    outcome: Outcome
    steps: int


def step(x, spec: ProcessSpec, dt: float, rng: RandomStream) -> np.ndarray:
    """One Euler step; advances ``rng``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.array(x, dtype=float).reshape(spec.dim)
    b = spec.drift_at(x)
    s = spec.diffusion_at(x)
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(s))):
        raise ValueError(f"non-finite drift or diffusion at x={x.tolist()}")
    nz = spec.noise
    alpha = nz.alpha if nz.has_stable else 1.0
    sqdt = math.sqrt(dt)
    scale = spec.stable_scale(dt)
    key, ctr = _u64(rng.key), _u64(rng.counter)
    if spec.dim == 1:
        y, ctr = K.increment_1d(x[0], b[0], s[0, 0], dt, sqdt, nz.has_brownian, nz.has_stable,
                                alpha, scale, key, ctr)
        out = np.array([y])
    else:
        y0, y1, ctr = K.increment_2d(x[0], x[1], b[0], b[1], np.ravel(s), dt, sqdt,
                                     nz.has_brownian, nz.has_stable, alpha, scale,
                                     key, ctr)
        out = np.array([y0, y1])
    rng.counter = int(ctr)
    return out


def classify(x, domain: Domain, target: Target) -> Outcome:
    """Inside the domain, in the target, or elsewhere in the exterior."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    code = K.classify_code(domain.coordinate(x), *domain.bounds, target.pieces(domain))
    if code == K.INVALID:
        raise ValueError("cannot classify a NaN state")
    return Outcome(code)


def max_steps_for(max_time: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not max_time >= dt:
        raise ValueError("max_time must be at least dt")
    return int(math.floor(max_time / dt * (1 + 1e-12)))


def _kernel_args(spec: ProcessSpec, dt: float):
    nz = spec.noise
    alpha = nz.alpha if nz.has_stable else 1.0
    return (math.sqrt(dt), nz.has_brownian, nz.has_stable, alpha, spec.stable_scale(dt))


def _path_python(x0, spec, domain, pieces, dt, max_steps, rng):
    x = np.array(x0, dtype=float)
    lo, hi = domain.bounds
    for n in range(1, max_steps + 1):
        x = step(x, spec, dt, rng)
        code = K.classify_code(domain.coordinate(x), lo, hi, pieces)
        if code == K.INVALID:
            raise ValueError("state became NaN")
        if code != K.INSIDE:
            return n, x, code
    return max_steps, x, K.CENSORED


def run_path(x0, spec, domain, pieces, dt, max_steps, rng: RandomStream):
    """One path, compiled when the coefficients allow it; advances ``rng``."""
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    if not spec.compiled:
        return _path_python(x0, spec, domain, pieces, dt, max_steps, rng)
    key, ctr = _u64(rng.key), _u64(rng.counter)
    sqdt, has_bm, has_st, alpha, scale = _kernel_args(spec, dt)
    lo, hi = domain.bounds
    (dk, dp, dkn, dv), (sk, sp, skn, sv) = spec._packed()
    if spec.dim == 1:
        n, x, c, ctr = K.path_1d(x0[0], key, ctr, dt, sqdt, max_steps, dk, dp, dkn, dv, sk, sp, skn, sv,
                            has_bm, has_st, alpha, scale, lo, hi, pieces)
        pos = np.array([x])
    else:
        s = spec.diffusion_at(x0).ravel()
        n, y0, y1, c, ctr = K.path_2d(x0[0], x0[1], key, ctr, dt, sqdt, max_steps, dk, dp, s,
                                 has_bm, has_st, alpha, scale, lo, hi, pieces)
        pos = np.array([y0, y1])
    rng.counter = int(ctr)
    if c == K.INVALID:
        raise ValueError(f"non-finite state or coefficient after {n} steps")
    return int(n), pos, int(c)


def simulate_until_exit(x0, spec: ProcessSpec, domain: Domain, target: Target, dt: float,
                        max_time: float = DEFAULT_MAX_TIME,
                        rng: RandomStream | None = None) -> ExitRecord:
    """Step from ``x0`` until the state leaves the domain or ``max_time`` passes.

    The stream is consumed from its current counter; by default the stream
    of path 0 for seed 1 is used, the same one :func:`estimate_escape` uses.
    """
    pieces = _check_target(spec, domain, target)
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    if not domain.contains(x0):
        raise ValueError(f"starting point {x0.tolist()} is not inside the domain")
    spec.check_finite(domain)
    nmax = max_steps_for(max_time, dt)
    if rng is None:
        rng = RandomStream(1, TAG_PATH, 0, 0)
    n, pos, c = run_path(x0, spec, domain, pieces, dt, nmax, rng)
    return ExitRecord(n * dt, pos, Outcome(c), n)
