"""Deterministic boundary-value solvers for escape probabilities.

* :func:`solve_elliptic_1d` for ``sigma^2/2 p'' + b p' = 0`` with Dirichlet data
* :func:`solve_laplace_annulus` for the radial Laplace equation in an annulus
* :func:`solve_fractional_1d` for the nonlocal problem of symmetric
  alpha-stable motion with data on the whole exterior of an interval

All grids are uniform with ``n`` nodes strictly inside the domain.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, linalg, special

from .stable import check_alpha, stable_coeffs

__all__ = [
    "GridSolution", "ExteriorData", "SolverError", "SolverWarning",
    "solve_elliptic_1d", "solve_laplace_annulus", "solve_fractional_1d",
    "fractional_system", "RESIDUAL_TOL", "MAX_FRACTIONAL_N",
]

RESIDUAL_TOL = 1e-10
MAX_FRACTIONAL_N = 5000
_JACOBI_NODES = 40


class SolverError(ArithmeticError):
    """The discrete system is singular or the problem data is unusable."""


class SolverWarning(UserWarning):
    """The solved system's residual exceeds the declared tolerance."""


# -- results --------------------------------------------------------------------

@dataclass(frozen=True)
class GridSolution:
    """Nodal values of a solved boundary-value problem.

    ``boundary`` holds the Dirichlet endpoints ``((x_lo, p_lo), (x_hi, p_hi))``
    for the local solvers, which lets :meth:`interpolate` reach the endpoints.
    The nonlocal solution has a boundary layer, so it is only interpolated
    between its first and last node.
    """

    nodes: np.ndarray
    values: np.ndarray
    exterior: object
    residual_inf: float
    alpha: Optional[float] = None
    tolerance: float = RESIDUAL_TOL
    boundary: Optional[tuple] = None
    kind: str = "1d"

    def __post_init__(self):
        if self.nodes.shape != self.values.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and values must be 1D arrays of equal length")
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("nodes must be strictly increasing")

    def __len__(self):
        return self.nodes.size

    def interpolate(self, x):
        """Piecewise-linear value at ``x``; raises outside the covered range."""
        xs, ps = self.nodes, self.values
        if self.boundary is not None:
            (x0, p0), (x1, p1) = self.boundary
            xs = np.concatenate(([x0], xs, [x1]))
            ps = np.concatenate(([p0], ps, [p1]))
        xq = np.asarray(x, dtype=float)
        if np.any(xq < xs[0]) or np.any(xq > xs[-1]):
            raise ValueError(f"interpolation only covers [{xs[0]}, {xs[-1]}]")
        out = np.interp(xq, xs, ps)
        return float(out) if out.ndim == 0 else out

    def covers(self, x) -> bool:
        lo, hi = ((self.boundary[0][0], self.boundary[1][0]) if self.boundary is not None
                  else (self.nodes[0], self.nodes[-1]))
        return bool(lo <= x <= hi)

    def to_csv(self, path=None) -> str:
        """``x,value`` table with 17 significant digits and LF line ends."""
        lines = ["x,value"] + [f"{x:.17g},{p:.17g}" for x, p in zip(self.nodes, self.values)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text

    @classmethod
    def read_csv(cls, path, **kw) -> "GridSolution":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        kw.setdefault("exterior", None)
        kw.setdefault("residual_inf", 0.0)
        return cls(data[:, 0].copy(), data[:, 1].copy(), **kw)


# -- exterior data ----------------------------------------------------------------

@dataclass(frozen=True)
class ExteriorData:
    """Piecewise-constant data on the complement of an interval.

    ``pieces`` is a sequence of ``(lo, hi, value)`` with ``lo < hi`` (either
    end may be infinite). Pieces may touch but not overlap.
    """

    pieces: tuple = field(default=())

    def __init__(self, pieces: Sequence):
        ps = sorted((float(lo), float(hi), float(v)) for lo, hi, v in pieces)
        for lo, hi, v in ps:
            if not lo < hi:
                raise ValueError(f"exterior piece [{lo}, {hi}] is empty")
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"exterior value {v} outside [0, 1]")
        for (_, h0, _), (l1, _, _) in zip(ps, ps[1:]):
            if l1 < h0:
                raise ValueError("exterior pieces overlap")
        object.__setattr__(self, "pieces", tuple(ps))

    @classmethod
    def constant(cls, value: float, a: float, b: float) -> "ExteriorData":
        return cls([(-math.inf, a, value), (b, math.inf, value)])

    @classmethod
    def indicator(cls, target, a: float, b: float) -> "ExteriorData":
        """Value 1 on the target set and 0 on the rest of the exterior.

        ``target`` is an ``ExteriorSet``, a ``BoundarySubset`` or a sequence of
        closed intervals ``(lo, hi)``.
        """
        from .process import Interval
        if hasattr(target, "pieces"):
            segs = [tuple(p) for p in target.pieces(Interval(a, b))]
        else:
            segs = [(float(lo), float(hi)) for lo, hi in target]
        out = []
        for side_lo, side_hi in ((-math.inf, a), (b, math.inf)):
            cuts = sorted((max(lo, side_lo), min(hi, side_hi)) for lo, hi in segs
                          if min(hi, side_hi) > max(lo, side_lo))
            pos = side_lo
            for lo, hi in cuts:
                if lo < pos:
                    lo = pos
                if lo > pos:
                    out.append((pos, lo, 0.0))
                if hi > lo:
                    out.append((lo, hi, 1.0))
                pos = max(pos, hi)
            if pos < side_hi:
                out.append((pos, side_hi, 0.0))
        return cls(out)

    def check_covers(self, a: float, b: float) -> None:
        """Raise unless the pieces cover ``(-inf, a] U [b, inf)`` and avoid ``(a, b)``."""
        for lo, hi, _ in self.pieces:
            if lo < b and hi > a:
                raise ValueError(f"exterior piece [{lo}, {hi}] intersects the domain ({a}, {b})")
        for side_lo, side_hi in ((-math.inf, a), (b, math.inf)):
            pos = side_lo
            for lo, hi, _ in self.pieces:
                if hi <= side_lo or lo >= side_hi:
                    continue
                if lo > pos:
                    break
                pos = max(pos, hi)
            if pos < side_hi:
                raise ValueError(f"exterior data leaves a gap in [{side_lo}, {side_hi}]")

    def value_at(self, y: float, side: int = 0) -> float:
        """Value at ``y``; at a shared endpoint ``side=+1`` picks the right piece."""
        hits = [p for p in self.pieces if p[0] <= y <= p[1]]
        if not hits:
            raise ValueError(f"no exterior data at {y}")
        if side > 0:
            return hits[-1][2]
        return hits[0][2]

    def __add__(self, other: "ExteriorData") -> "ExteriorData":
        cuts = sorted({c for p in self.pieces + other.pieces for c in p[:2]})
        out = []
        for lo, hi in zip(cuts, cuts[1:]):
            mid = 0.5 * (lo + hi) if math.isfinite(lo + hi) else (hi - 1 if math.isfinite(hi) else lo + 1)
            inside = [p for p in self.pieces + other.pieces if p[0] <= mid <= p[1]]
            if inside:
                out.append((lo, hi, sum(p[2] for p in inside)))
        return ExteriorData(out)

    def as_dict(self) -> dict:
        return {"pieces": [[lo, hi, v] for lo, hi, v in self.pieces]}


def _residual(M, p, f) -> float:
    # max-norm residual relative to the size of the system, so that scaling
    # the equations leaves it unchanged
    res = np.max(np.abs(M @ p - f))
    ref = np.max(np.sum(np.abs(M), axis=1)) * np.max(np.abs(p)) + np.max(np.abs(f))
    return float(res / ref) if ref > 0 else float(res)


def _check_residual(res: float, tol: float):
    if not res <= tol:
        warnings.warn(f"residual {res:.3e} exceeds tolerance {tol:.1e}", SolverWarning, stacklevel=3)


def _as_callable(c) -> Callable:
    return c if callable(c) else (lambda x, v=float(c): v)


# -- local solvers --------------------------------------------------------------

def solve_elliptic_1d(b, sigma, interval: tuple, left_value: float, right_value: float,
                      n: int) -> GridSolution:
    """Central differences for ``sigma^2/2 p'' + b p' = 0`` on ``(lo, hi)``.

    ``b`` and ``sigma`` are callables or constants. Row ``i`` reads
    ``(sigma^2 - b h) p_{i-1} - 2 sigma^2 p_i + (sigma^2 + b h) p_{i+1} = 0``.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must have lo < hi")
    if n < 3:
        raise ValueError("n must be at least 3")
    bf, sf = _as_callable(b), _as_callable(sigma)
    h = (hi - lo) / (n + 1)
    x = lo + h * np.arange(1, n + 1)
    bv = np.array([float(bf(v)) for v in x])
    s2 = np.array([float(sf(v)) ** 2 for v in x])
    if not (np.all(np.isfinite(bv)) and np.all(np.isfinite(s2))):
        raise SolverError("drift or diffusion is not finite on the grid")
    if np.any(s2 <= 0):
        raise SolverError(f"sigma vanishes at x={x[np.argmin(s2)]}")
    lower, diag, upper = s2 - bv * h, -2.0 * s2, s2 + bv * h
    f = np.zeros(n)
    f[0] -= lower[0] * left_value
    f[-1] -= upper[-1] * right_value
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        p = linalg.solve_banded((1, 1), ab, f)
    except linalg.LinAlgError as exc:
        raise SolverError(f"singular system: {exc}") from None
    if not np.all(np.isfinite(p)):
        raise SolverError("singular system")
    res = _banded_residual(lower, diag, upper, p, f)
    _check_residual(res, RESIDUAL_TOL)
    ext = {"left": float(left_value), "right": float(right_value)}
    return GridSolution(x, p, ext, res, boundary=((lo, float(left_value)), (hi, float(right_value))),
                        kind="elliptic")


def _banded_residual(lower, diag, upper, p, f) -> float:
    Mp = diag * p
    Mp[1:] += lower[1:] * p[:-1]
    Mp[:-1] += upper[:-1] * p[1:]
    rows = np.abs(diag) + np.abs(np.r_[0.0, lower[1:]]) + np.abs(np.r_[upper[:-1], 0.0])
    ref = rows.max() * np.max(np.abs(p)) + np.max(np.abs(f))
    res = np.max(np.abs(Mp - f))
    return float(res / ref) if ref > 0 else float(res)


def solve_laplace_annulus(r: float, R: float, inner_value: float, outer_value: float,
                          n: int) -> GridSolution:
    """Radial reduction ``(rho p')' = 0`` with fluxes at the half-radii."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if n < 3:
        raise ValueError("n must be at least 3")
    h = (R - r) / (n + 1)
    rho = r + h * np.arange(1, n + 1)
    wl, wr = rho - h / 2, rho + h / 2
    lower, diag, upper = wl, -(wl + wr), wr
    f = np.zeros(n)
    f[0] -= lower[0] * inner_value
    f[-1] -= upper[-1] * outer_value
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        p = linalg.solve_banded((1, 1), ab, f)
    except linalg.LinAlgError as exc:
        raise SolverError(f"singular system: {exc}") from None
    res = _banded_residual(lower, diag, upper, p, f)
    _check_residual(res, RESIDUAL_TOL)
    ext = {"inner": float(inner_value), "outer": float(outer_value)}
    return GridSolution(rho, p, ext, res, boundary=((r, float(inner_value)), (R, float(outer_value))),
                        kind="radial")


# -- nonlocal solver --------------------------------------------------------------
#
# In units of h the operator at node x_i is
#   int (p(x_i + u) - p(x_i)) |u|^(-1-alpha) du.
# |u| <= 1 uses a quadratic model of p (a second difference weighted by
# 1/(2-alpha)). Beyond that p is piecewise linear between nodes, so every
# cell contributes exact moments of |u|^(-1-alpha). The two cells between
# the outermost nodes and the boundary follow the boundary layer
# g + (p_n - g)(1-t)^(alpha/2) instead of a straight line, and the
# outermost rows use the matching two-term layer for their near field.
# Exterior data is piecewise constant and integrated in closed form.

def _moments(k: np.ndarray, a: float):
    # int_0^1 (k+t)^(-1-a) (1-t, t) dt, computed without cancellation
    k = np.asarray(k, dtype=float)
    m0 = -k ** (-a) * np.expm1(-a * np.log1p(1 / k)) / a
    if a == 1.0:
        m1 = np.log1p(1 / k)
    else:
        m1 = k ** (1 - a) * np.expm1((1 - a) * np.log1p(1 / k)) / (1 - a)
    B = m1 - k * m0
    return m0 - B, B, m0


@lru_cache(maxsize=64)
def _layer_constant(gamma_: float, a: float) -> float:
    # int_0^1 [(1-t)^g + (1+t)^g - 2] t^(-1-a) dt
    d = 0.5
    s, m = 0.0, 1
    while True:
        term = 2 * special.binom(gamma_, 2 * m) * d ** (2 * m - a) / (2 * m - a)
        s += term
        if abs(term) < 1e-17 * max(1.0, abs(s)) or m > 200:
            break
        m += 1
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    v1 = integrate.quad(lambda t: t ** (-1 - a), d, 1, weight="alg", wvar=(0.0, gamma_), **opts)[0]
    # smooth on [d, 1]
    t, w = special.roots_legendre(40)
    t = d + (1 - d) * (t + 1) / 2
    v2 = (1 - d) / 2 * float(np.sum(w * ((1 + t) ** gamma_ - 2) * t ** (-1 - a)))
    return s + v1 + v2


@lru_cache(maxsize=16)
def _jacobi(a: float):
    s, w = special.roots_jacobi(_JACOBI_NODES, a / 2, 0.0)
    return (s + 1) / 2, w / 2 ** (a / 2 + 1)


def _exterior_rhs(ext: ExteriorData, x: np.ndarray, lo: float, hi: float, h: float, a: float):
    f = np.zeros_like(x)
    for p0, p1, v in ext.pieces:
        if v == 0.0:
            continue
        if p0 >= hi:
            d1, d2 = (p0 - x) / h, (p1 - x) / h
        else:
            d1, d2 = (x - p1) / h, (x - p0) / h
        f += v * (d1 ** (-a) - d2 ** (-a)) / a
    return f


def fractional_system(alpha: float, interval: tuple, exterior: ExteriorData, n: int):
    """Assemble ``(x, M, f)`` with ``M p = f`` in units where ``h = 1``.

    The physical operator is ``C_1(alpha) h^(-alpha)`` times this system.
    """
    a = check_alpha(alpha)
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must have lo < hi")
    n = int(n)
    if n < 5:
        raise ValueError("n must be at least 5")
    if n > MAX_FRACTIONAL_N:
        raise ValueError(f"n={n} exceeds the dense-solver cap {MAX_FRACTIONAL_N}")
    exterior.check_covers(lo, hi)
    gL, gR = exterior.value_at(lo, -1), exterior.value_at(hi, +1)

    h = (hi - lo) / (n + 1)
    x = lo + h * np.arange(1, n + 1)
    k = np.arange(1, n + 2, dtype=float)
    A, B, m0 = _moments(k, a)
    t, w = _jacobi(a)
    J = ((k[:, None] + t[None, :]) ** (-1 - a)) @ w
    near = 1 / (2 - a)

    Wt = np.zeros(n)
    Wt[1] = A[0] + near
    Wt[2:] = A[1:n - 1] + B[0:n - 2]
    M = linalg.toeplitz(Wt)
    np.fill_diagonal(M, -2 * near - 2 / a)

    i = np.arange(1, n + 1)
    kr, kl = n + 1 - i, i
    rhs = gR * np.where(kr == 1, near, B[np.maximum(kr - 2, 0)])
    rhs += gL * np.where(kl == 1, near, B[np.maximum(kl - 2, 0)])
    rhs += _exterior_rhs(exterior, x, lo, hi, h, a)

    # boundary-layer profile in the cells next to the boundary
    rows = np.nonzero(kr >= 2)[0]
    kk = kr[rows] - 2
    M[rows, n - 1] += J[kk] - A[kk]
    rhs[rows] += gR * (m0[kk] - J[kk] - B[kk])
    rows = np.nonzero(kl >= 2)[0]
    kk = kl[rows] - 2
    M[rows, 0] += J[kk] - A[kk]
    rhs[rows] += gL * (m0[kk] - J[kk] - B[kk])

    # near field of the outermost rows from the layer g - c s^b - d s^(b+1)
    b = a / 2
    K1, K2 = _layer_constant(b, a), _layer_constant(b + 1, a)
    cn, cm = 2 * K1 - K2, 2 ** (-b) * (K2 - K1)
    for row, nb, g in ((n - 1, n - 2, gR), (0, 1, gL)):
        M[row, row] += 2 * near + cn
        M[row, nb] += cm - near
        rhs[row] -= near * g + (cn + cm) * g
    return x, M, -rhs


def solve_fractional_1d(alpha: float, interval: tuple, exterior: ExteriorData, n: int,
                        scale: float = 1.0, tol: float = RESIDUAL_TOL) -> GridSolution:
    """Solve the nonlocal Dirichlet problem of alpha-stable motion on an interval.

    ``exterior`` gives the data on the whole complement. The equations are
    multiplied by ``scale * C_1(alpha) h^(-alpha)``, the true generator for
    ``scale=1``; the solution does not depend on ``scale``.

    Examples
    --------
    >>> ext = ExteriorData.indicator([(2.0, float("inf"))], -2.0, 2.0)
    >>> sol = solve_fractional_1d(1.0, (-2.0, 2.0), ext, n=101)
    >>> bool(abs(sol.values[50] - 0.5) < 1e-12)
    True
    """
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError("scale must be positive")
    x, M, f = fractional_system(alpha, interval, exterior, n)
    h = x[1] - x[0]
    c = scale * stable_coeffs(1, alpha).C1 * h ** (-alpha)
    M, f = c * M, c * f
    try:
        p = linalg.solve(M, f, check_finite=True)
    except linalg.LinAlgError as exc:
        raise SolverError(f"singular system: {exc}") from None
    res = _residual(M, p, f)
    _check_residual(res, tol)
    return GridSolution(x, p, exterior, res, alpha=float(alpha), tolerance=tol, kind="fractional")
