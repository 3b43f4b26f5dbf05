"""Reference escape probabilities: closed forms and high-accuracy quadrature.

These are the ground truth for the Monte Carlo and grid solvers, so every
quadrature result carries an error bound and values outside [0, 1] raise
instead of being clamped.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .stable import check_alpha

__all__ = [
    "OracleResult", "OracleError",
    "oracle_bm_interval", "oracle_bm_annulus", "oracle_drift_1d",
    "oracle_stable_interval", "oracle_stable_interval_direct", "stable_exit_total", "beta_identity",
]

DEFAULT_TOL = 1e-10


class OracleError(ArithmeticError):
    """Quadrature failed or produced a value outside [0, 1]."""


@dataclass(frozen=True)
class OracleResult:
    value: float
    abs_error_bound: float = 0.0

    def __post_init__(self):
        v, e = self.value, self.abs_error_bound
        if not (math.isfinite(v) and math.isfinite(e) and e >= 0):
            raise OracleError(f"invalid oracle result {v!r} +- {e!r}")
        if not (-e <= v <= 1 + e):
            raise OracleError(f"oracle value {v!r} outside [0, 1]")

    def __float__(self):
        return float(self.value)


def _quad(f, a, b, tol, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=500, **kw)
        except integrate.IntegrationWarning as exc:
            raise OracleError(f"quadrature did not converge: {exc}") from None
    return val, err


# -- Brownian closed forms ----------------------------------------------------

def oracle_bm_interval(x: float, r: float) -> OracleResult:
    """Brownian motion on (-r, r), exiting through ``r``: ``(x + r) / (2r)``."""
    if not r > 0:
        raise ValueError("r must be positive")
    if not -r <= x <= r:
        raise ValueError(f"x={x} outside [-{r}, {r}]")
    return OracleResult((x + r) / (2 * r), 0.0)


def oracle_bm_annulus(rho: float, r: float, R: float) -> OracleResult:
    """Planar Brownian motion in ``r < |x| < R`` exiting through the inner circle."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if not r <= rho <= R:
        raise ValueError(f"rho={rho} outside [{r}, {R}]")
    return OracleResult((math.log(R) - math.log(rho)) / (math.log(R) - math.log(r)), 0.0)


# -- drift --------------------------------------------------------------------

def _sigma2_checked(sigma: Callable, r: float) -> Callable:
    grid = np.linspace(-r, r, 401)
    s2 = np.array([float(sigma(z)) ** 2 for z in grid])
    if not np.all(np.isfinite(s2)) or s2.min() <= 0:
        raise OracleError("sigma vanishes or is not finite on [-r, r]")
    return lambda z: float(sigma(z)) ** 2


def oracle_drift_1d(x: float, r: float, b: Callable, sigma: Callable, tol: float = DEFAULT_TOL,
                    method: str = "tabulated") -> OracleResult:
    """Escape through ``r`` for ``dX = b dt + sigma dW`` on (-r, r).

    ``p(x) = int_{-r}^x e^{-B} / int_{-r}^r e^{-B}`` with
    ``B(y) = 2 int_{-r}^y b / sigma^2``.

    ``method="tabulated"`` integrates ``B`` once with an adaptive ODE solver
    and runs the outer quadrature on its dense output. ``method="nested"`` calls
    an inner quadrature at every outer node; it is slower and serves as an
    independent check.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if not -r <= x <= r:
        raise ValueError(f"x={x} outside [-{r}, {r}]")
    s2 = _sigma2_checked(sigma, r)

    def rate(z):
        return 2.0 * float(b(z)) / s2(z)

    if method == "tabulated":
        sol = integrate.solve_ivp(lambda z, B: [rate(z)], (-r, r), [0.0], method="DOP853",
                                  rtol=1e-13, atol=1e-14, dense_output=True)
        if not sol.success:
            raise OracleError(f"drift integral failed: {sol.message}")
        B = lambda y: float(sol.sol(y)[0])
        inner_err = 1e-12 * max(1.0, float(np.max(np.abs(sol.y))))
    elif method == "nested":
        def B(y):
            return _quad(rate, -r, y, tol * 1e-2)[0] if y > -r else 0.0
        inner_err = tol * 1e-2
    else:
        raise ValueError("method must be 'tabulated' or 'nested'")

    # shift the exponent so the integrand peaks at 1
    shift = -min(B(y) for y in np.linspace(-r, r, 257))
    w = lambda y: math.exp(-B(y) - shift)
    left, e1 = _quad(w, -r, x, tol) if x > -r else (0.0, 0.0)
    right, e2 = _quad(w, x, r, tol) if x < r else (0.0, 0.0)
    total = left + right
    if not total > 0:
        raise OracleError("degenerate normalising integral")
    p = left / total
    err = (e1 + e2) / total + inner_err * p * (1 - p) * 2
    return OracleResult(p, err)


# -- stable Poisson kernel ------------------------------------------------------

def _tail_series(x: float, r: float, a: float, Y: float, tol: float):
    # int_Y^inf (y^2 - r^2)^(-a/2) / (y - x) dy, expanded in r^2/y^2 and x/y
    kmax = 400
    cj = np.ones(kmax // 2 + 1)
    for j in range(1, cj.size):
        cj[j] = cj[j - 1] * (a / 2 + j - 1) / j
    total, prev = 0.0, math.inf
    for k in range(kmax):
        ak = sum(cj[j] * r ** (2 * j) * x ** (k - 2 * j) for j in range(k // 2 + 1))
        term = ak * Y ** (-a - k) / (a + k)
        total += term
        # the envelope drops geometrically with ratio <= (|x| + r) / Y <= 1/4; odd
        # envelopes vanish at x = 0 so two consecutive ones are tested
        env = sum(cj[j] * r ** (2 * j) * abs(x) ** (k - 2 * j) for j in range(k // 2 + 1)) * Y ** (-a - k)
        if env + prev < tol * 1e-3 and k > 2:
            last = 2 * (env + prev)
            break
        prev = env
    else:
        raise OracleError("Poisson-kernel tail series did not converge")
    return total, last


def _split(x: float, r: float) -> float:
    return max(2 * r, x + 10 * r)


def oracle_stable_interval(x: float, r: float, alpha: float,
                           tol: float = DEFAULT_TOL) -> OracleResult:
    """Symmetric alpha-stable motion on (-r, r), landing in ``[r, inf)``.

    Integrates the interval Poisson kernel
    ``sin(pi a/2)/pi (r^2-x^2)^(a/2) int_r^inf (y^2-r^2)^(-a/2) (y-x)^(-1) dy``.
    With ``y = r cosh t`` the endpoint factor becomes ``sinh(t)^(1-a)`` which
    an algebraic-weight rule handles exactly; beyond ``Y = max(2r, x+10r)`` the
    integrand is expanded and integrated term by term. Points with ``x > 0``
    are evaluated as ``1 - p(-x)``.
    """
    a = check_alpha(alpha)
    if not r > 0:
        raise ValueError("r must be positive")
    if not -r < x < r:
        raise ValueError(f"x={x} must lie strictly inside (-{r}, {r}); the limits are 0 and 1")
    if x > 0:
        # 1/(r cosh t - x) is nearly singular as x -> r; the mirror point is not,
        # and the kernel has unit mass over both sides
        val, err = _poisson_integral(-x, r, a, tol)
        return OracleResult(1.0 - val, err)
    return OracleResult(*_poisson_integral(x, r, a, tol))


def _poisson_integral(x: float, r: float, a: float, tol: float):
    Y = _split(x, r)
    T = math.acosh(Y / r)

    def f(t):
        ratio = math.sinh(t) / t if t > 0 else 1.0
        return r ** (1 - a) * ratio ** (1 - a) / (r * math.cosh(t) - x)

    body, e_body = _quad(f, 0.0, T, tol * 1e-2, weight="alg", wvar=(1 - a, 0.0))
    tail, e_tail = _tail_series(x, r, a, Y, tol)
    pref = math.sin(math.pi * a / 2) / math.pi * (r * r - x * x) ** (a / 2)
    return pref * (body + tail), pref * (e_body + e_tail)


def oracle_stable_interval_direct(x: float, r: float, alpha: float,
                                  tol: float = DEFAULT_TOL) -> OracleResult:
    """Same probability by direct quadrature in ``y`` with singularity subtraction.

    The factor ``(y-r)^(-a/2)`` multiplies ``g(y) = (y+r)^(-a/2)/(y-x)``;
    ``g(r)`` is subtracted and its integral added back in closed form.
    """
    a = check_alpha(alpha)
    if not -r < x < r:
        raise ValueError(f"x={x} must lie strictly inside (-{r}, {r})")
    Y = _split(x, r)
    g = lambda y: (y + r) ** (-a / 2) / (y - x)
    g0 = g(r)

    def h(y):
        d = y - r
        return d ** (-a / 2) * (g(y) - g0) if d > 0 else 0.0

    pts = [r + (Y - r) * s for s in (1e-6, 1e-4, 1e-2, 0.1)]
    body, e_body = _quad(h, r, Y, tol * 1e-2, points=pts)
    body += g0 * (Y - r) ** (1 - a / 2) / (1 - a / 2)
    tail, e_tail = _tail_series(x, r, a, Y, tol)
    pref = math.sin(math.pi * a / 2) / math.pi * (r * r - x * x) ** (a / 2)
    return OracleResult(pref * (body + tail), pref * (e_body + e_tail))


def stable_exit_total(r: float, alpha: float, tol: float = DEFAULT_TOL) -> OracleResult:
    """The kernel's total mass at ``x = r``, which must equal 1.

    After the change of variables ``y = (r^2 - x v)/(x - v)`` the value at
    ``x = r`` is ``sin(pi a/2)/pi int_{-r}^r (r-v)^(a/2-1) (r+v)^(-a/2) dv``,
    a Beta integral equal to one.
    """
    a = check_alpha(alpha)
    val, err = _quad(lambda v: 1.0, -r, r, tol * 1e-2, weight="alg", wvar=(-a / 2, a / 2 - 1))
    c = math.sin(math.pi * a / 2) / math.pi
    return OracleResult(c * val, c * err)


def beta_identity(alpha: float) -> float:
    """``sin(pi a/2)/pi * B(a/2, 1-a/2)`` from the Beta function itself."""
    a = check_alpha(alpha)
    return math.sin(math.pi * a / 2) / math.pi * special.beta(a / 2, 1 - a / 2)
