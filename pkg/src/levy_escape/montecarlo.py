"""Monte Carlo escape probabilities.

Path ``j`` of starting point ``i`` always uses the stream keyed by
``(seed, i, j)``. Batches of paths are fanned out to a thread pool, and
since every path owns its stream the result is the same for any number of
workers. ``LEVY_ESCAPE_THREADS`` caps the pool size.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .process import (DEFAULT_MAX_TIME, Outcome, ProcessSpec, _check_target, _kernel_args,
                      max_steps_for, run_path)
from .rng import TAG_PATH, RandomStream, _u64

__all__ = [
    "EscapeEstimate", "PathBatch", "CensoringWarning", "AllCensoredError",
    "estimate_escape", "estimate_profile", "simulate_paths", "random_walk_escape",
    "resolve_workers",
]

CHUNK = 2048


class CensoringWarning(UserWarning):
    """More than 1% of the paths did not exit within the time budget."""


class AllCensoredError(RuntimeError):
    """No path exited, so there is nothing to estimate."""


@dataclass(frozen=True)
class EscapeEstimate:
    p_hat: float
    std_err: float
    n_paths: int
    n_censored: int
    ci95: tuple
    n_target: int

    @classmethod
    def from_counts(cls, n_target: int, n_paths: int, n_censored: int) -> "EscapeEstimate":
        m = n_paths - n_censored
        if m <= 0:
            raise AllCensoredError(f"all {n_paths} paths were censored")
        p = n_target / m
        se = math.sqrt(p * (1.0 - p) / m)
        ci = (max(0.0, p - 1.96 * se), min(1.0, p + 1.96 * se))
        return cls(p, se, int(n_paths), int(n_censored), ci, int(n_target))

    def as_dict(self) -> dict:
        return {"p_hat": self.p_hat, "std_err": self.std_err, "n_paths": self.n_paths,
                "n_censored": self.n_censored, "ci95": list(self.ci95), "n_target": self.n_target}


@dataclass(frozen=True)
class PathBatch:
    steps: np.ndarray
    positions: np.ndarray
    outcomes: np.ndarray
    dt: float

    @property
    def exit_times(self) -> np.ndarray:
        return self.steps * self.dt

    def estimate(self) -> EscapeEstimate:
        n_t = int(np.count_nonzero(self.outcomes == Outcome.TARGET))
        n_c = int(np.count_nonzero(self.outcomes == Outcome.CENSORED))
        n = int(self.outcomes.size)
        if n_c == n:
            raise AllCensoredError(f"all {n} paths were censored")
        if n_c > 0.01 * n:
            warnings.warn(f"{n_c} of {n} paths censored ({100 * n_c / n:.2f}%)", CensoringWarning,
                          stacklevel=3)
        return EscapeEstimate.from_counts(n_t, n, n_c)


def resolve_workers(workers: int | None = None) -> int:
    n = workers if workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get("LEVY_ESCAPE_THREADS")
    if cap:
        n = min(n, int(cap))
    return max(1, int(n))


def _chunks(n: int):
    return [(s, min(CHUNK, n - s)) for s in range(0, n, CHUNK)]


def simulate_paths(x0, spec: ProcessSpec, domain, target, n_paths: int, dt: float,
                   max_time: float = DEFAULT_MAX_TIME, seed: int = 1, *,
                   x_index: int = 0, workers: int | None = None) -> PathBatch:
    """Simulate ``n_paths`` independent first exits from ``x0``."""
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    pieces = _check_target(spec, domain, target)
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    if not domain.contains(x0):
        raise ValueError(f"starting point {x0.tolist()} is not inside the domain")
    spec.check_finite(domain)
    nmax = max_steps_for(max_time, dt)
    n_paths = int(n_paths)
    steps = np.zeros(n_paths, dtype=np.int64)
    pos = np.zeros((n_paths, spec.dim))
    out = np.zeros(n_paths, dtype=np.int8)

    if not spec.compiled:
        for j in range(n_paths):
            rng = RandomStream(seed, TAG_PATH, x_index, j)
            steps[j], pos[j], out[j] = run_path(x0, spec, domain, pieces, dt, nmax, rng)
        return PathBatch(steps, pos, out, dt)

    sqdt, has_bm, has_st, alpha, scale = _kernel_args(spec, dt)
    lo, hi = domain.bounds
    (dk, dp, dkn, dv), (sk, sp, skn, sv) = spec._packed()
    s64, xi = _u64(seed), _u64(x_index)

    def run(chunk):
        start, count = chunk
        sl = slice(start, start + count)
        if spec.dim == 1:
            K.batch_1d(s64, xi, start, x0[0], dt, sqdt, nmax, dk, dp, dkn, dv, sk, sp, skn, sv,
                       has_bm, has_st, alpha, scale, lo, hi, pieces,
                       steps[sl], pos[sl], out[sl])
        else:
            smat = spec.diffusion_at(x0).ravel()
            K.batch_2d(s64, xi, start, x0[0], x0[1], dt, sqdt, nmax, dk, dp, smat,
                       has_bm, has_st, alpha, scale, lo, hi, pieces,
                       steps[sl], pos[sl], out[sl])

    chunks = _chunks(n_paths)
    nw = min(resolve_workers(workers), len(chunks))
    if nw == 1:
        for c in chunks:
            run(c)
    else:
        with ThreadPoolExecutor(nw) as ex:
            list(ex.map(run, chunks))
    if np.any(out == K.INVALID):
        raise ValueError("a path produced a non-finite state or coefficient")
    return PathBatch(steps, pos, out, dt)


def estimate_escape(x0, spec: ProcessSpec, domain, target, n_paths: int, dt: float,
                    max_time: float = DEFAULT_MAX_TIME, seed: int = 1, *,
                    x_index: int = 0, workers: int | None = None) -> EscapeEstimate:
    """Escape probability from ``x0`` with binomial standard error.

    Censored paths are left out of numerator and denominator. A
    :class:`CensoringWarning` is issued above 1% censoring and
    :class:`AllCensoredError` raised if nothing exited.

    Examples
    --------
    >>> from levy_escape.process import ProcessSpec, Interval, BoundarySubset
    >>> est = estimate_escape(1.0, ProcessSpec(), Interval(-2, 2), BoundarySubset("right"),
    ...                       n_paths=2000, dt=1e-3, seed=3)
    >>> abs(est.p_hat - 0.75) < 4 * est.std_err
    True
    """
    batch = simulate_paths(x0, spec, domain, target, n_paths, dt, max_time, seed,
                           x_index=x_index, workers=workers)
    return batch.estimate()


def estimate_profile(xs, spec: ProcessSpec, domain, target, n_paths: int, dt: float,
                     max_time: float = DEFAULT_MAX_TIME, seed: int = 1, *,
                     workers: int | None = None) -> list:
    """One estimate per starting point; point ``i`` uses streams ``(seed, i, *)``."""
    pts = [np.atleast_1d(np.asarray(x, dtype=float)) for x in xs]
    for x in pts:
        if not domain.contains(x):
            raise ValueError(f"starting point {x.tolist()} is not inside the domain")
    return [(x if x.size > 1 else float(x[0]),
             estimate_escape(x, spec, domain, target, n_paths, dt, max_time, seed,
                             x_index=i, workers=workers))
            for i, x in enumerate(pts)]


def random_walk_escape(a: float, b: float, x: float, delta: float, n_walks: int,
                       seed: int = 1, *, max_steps: int = 10**9,
                       workers: int | None = None) -> EscapeEstimate:
    """Symmetric +-delta walk from ``x``; Target is reaching or passing ``b``.

    ``a``, ``b`` and ``x`` are snapped to the lattice ``delta * Z``. A warning
    is issued when snapping moves a point by more than ``delta/2 * 1e-6``.
    """
    if not a < x < b:
        raise ValueError(f"x={x} must lie strictly inside ({a}, {b})")
    if not delta > 0:
        raise ValueError("delta must be positive")
    ks = []
    for name, v in (("a", a), ("b", b), ("x", x)):
        k = round(v / delta)
        if abs(v - k * delta) > delta / 2 * 1e-6:
            warnings.warn(f"{name}={v} snapped to lattice point {k * delta}", stacklevel=2)
        ks.append(int(k))
    ka, kb, k0 = ks
    if not ka < k0 < kb:
        raise ValueError("after snapping, x must lie strictly inside (a, b)")
    n = int(n_walks)
    if n < 1:
        raise ValueError("n_walks must be at least 1")
    steps = np.zeros(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.int8)
    s64 = _u64(seed)

    def run(chunk):
        start, count = chunk
        sl = slice(start, start + count)
        K.walk_batch(s64, start, k0, ka, kb, max_steps, steps[sl], out[sl])

    chunks = _chunks(n)
    nw = min(resolve_workers(workers), len(chunks))
    if nw == 1:
        for c in chunks:
            run(c)
    else:
        with ThreadPoolExecutor(nw) as ex:
            list(ex.map(run, chunks))
    return PathBatch(steps, np.zeros((n, 1)), out, 1.0).estimate()
