"""Compiled path kernels.

Coefficient codes: 0 constant, 1 linear ``offset - kappa * x``, 2 table
(1D linear interpolation). Outcome codes follow :class:`process.Outcome`.
"""
import math

import numba as nb
import numpy as np

from .rng import (TAG_PATH, TAG_WALK, U64, _derive, next_normal, next_positive_stable,
                  next_raw, next_stable)

TARGET, NON_TARGET, CENSORED, INSIDE, INVALID = 0, 1, 2, 3, 4


@nb.njit(inline="always", cache=True)
def table_1d(knots, vals, x):
    # same values as np.interp; written out so the hot loop makes no calls
    n = knots.shape[0]
    if not x > knots[0]:
        return vals[0] if x == x else x
    if x >= knots[n - 1]:
        return vals[n - 1]
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if knots[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - knots[lo]) / (knots[hi] - knots[lo])
    return vals[lo] + t * (vals[hi] - vals[lo])


@nb.njit(inline="always", cache=True)
def coef_1d(kind, par, knots, vals, x):
    if kind == 0:
        return par[0]
    if kind == 1:
        return par[1] - par[0] * x
    return table_1d(knots, vals, x)


@nb.njit(inline="always", cache=True)
def increment_1d(x, b, s, dt, sqdt, has_bm, has_st, alpha, scale, key, ctr):
    y = x + b * dt
    if has_bm:
        z, ctr = next_normal(key, ctr)
        y = y + s * sqdt * z
    if has_st:
        l, ctr = next_stable(alpha, key, ctr)
        y = y + scale * l
    return y, ctr


@nb.njit(inline="always", cache=True)
def increment_2d(x0, x1, b0, b1, s, dt, sqdt, has_bm, has_st, alpha, scale, key, ctr):
    y0 = x0 + b0 * dt
    y1 = x1 + b1 * dt
    if has_bm:
        z0, ctr = next_normal(key, ctr)
        z1, ctr = next_normal(key, ctr)
        y0 = y0 + (s[0] * z0 + s[1] * z1) * sqdt
        y1 = y1 + (s[2] * z0 + s[3] * z1) * sqdt
    if has_st:
        # isotropic stable vector by Gaussian subordination
        g0, ctr = next_normal(key, ctr)
        g1, ctr = next_normal(key, ctr)
        a, ctr = next_positive_stable(0.5 * alpha, key, ctr)
        w = scale * math.sqrt(2.0 * a)
        y0 = y0 + w * g0
        y1 = y1 + w * g1
    return y0, y1, ctr


@nb.njit(inline="always", cache=True)
def in_pieces(v, pieces):
    for j in range(pieces.shape[0]):
        if pieces[j, 0] <= v <= pieces[j, 1]:
            return True
    return False


@nb.njit(inline="always", cache=True)
def classify_code(v, lo, hi, pieces):
    # v is x in 1D and |x| in 2D
    if math.isnan(v):
        return INVALID
    if lo < v < hi:
        return INSIDE
    if in_pieces(v, pieces):
        return TARGET
    return NON_TARGET


@nb.njit(nogil=True, cache=True)
def path_1d(x0, key, ctr, dt, sqdt, max_steps, dk, dp, dkn, dv, sk, sp, skn, sv,
            has_bm, has_st, alpha, scale, lo, hi, pieces):
    x = x0
    n = 0
    # constant coefficients are evaluated (and checked) once
    b = coef_1d(dk, dp, dkn, dv, x)
    s = coef_1d(sk, sp, skn, sv, x)
    vary = dk != 0 or sk != 0
    while n < max_steps:
        if vary:
            b = coef_1d(dk, dp, dkn, dv, x)
            s = coef_1d(sk, sp, skn, sv, x)
        if not (math.isfinite(b) and math.isfinite(s)):
            return n, x, INVALID, ctr
        x, ctr = increment_1d(x, b, s, dt, sqdt, has_bm, has_st, alpha, scale, key, ctr)
        n += 1
        if not lo < x < hi:
            return n, x, classify_code(x, lo, hi, pieces), ctr
    return n, x, CENSORED, ctr


@nb.njit(nogil=True, cache=True)
def path_2d(x0, x1, key, ctr, dt, sqdt, max_steps, dk, dp, sp,
            has_bm, has_st, alpha, scale, lo, hi, pieces):
    n = 0
    while n < max_steps:
        if dk == 0:
            b0 = dp[0]
            b1 = dp[1]
        else:
            b0 = dp[1] - dp[0] * x0
            b1 = dp[2] - dp[0] * x1
        x0, x1, ctr = increment_2d(x0, x1, b0, b1, sp, dt, sqdt, has_bm, has_st,
                                   alpha, scale, key, ctr)
        n += 1
        rho = math.sqrt(x0 * x0 + x1 * x1)
        if not lo < rho < hi:
            return n, x0, x1, classify_code(rho, lo, hi, pieces), ctr
    return n, x0, x1, CENSORED, ctr


@nb.njit(nogil=True, cache=True)
def batch_1d(seed, xi, start, x0, dt, sqdt, max_steps, dk, dp, dkn, dv, sk, sp, skn, sv,
             has_bm, has_st, alpha, scale, lo, hi, pieces, steps, pos, out):
    for j in range(steps.shape[0]):
        key = _derive(seed, U64(TAG_PATH), xi, U64(start + j))
        n, x, c, _ = path_1d(x0, key, U64(0), dt, sqdt, max_steps, dk, dp, dkn, dv, sk, sp, skn, sv,
                          has_bm, has_st, alpha, scale, lo, hi, pieces)
        steps[j] = n
        pos[j, 0] = x
        out[j] = c


@nb.njit(nogil=True, cache=True)
def batch_2d(seed, xi, start, x0, x1, dt, sqdt, max_steps, dk, dp, sp,
             has_bm, has_st, alpha, scale, lo, hi, pieces, steps, pos, out):
    for j in range(steps.shape[0]):
        key = _derive(seed, U64(TAG_PATH), xi, U64(start + j))
        n, y0, y1, c, _ = path_2d(x0, x1, key, U64(0), dt, sqdt, max_steps, dk, dp, sp,
                               has_bm, has_st, alpha, scale, lo, hi, pieces)
        steps[j] = n
        pos[j, 0] = y0
        pos[j, 1] = y1
        out[j] = c


@nb.njit(nogil=True, cache=True)
def walk_batch(seed, start, k0, ka, kb, max_steps, steps, out):
    # symmetric +-1 walk on the integer lattice, one raw bit per step
    for j in range(steps.shape[0]):
        key = _derive(seed, U64(TAG_WALK), U64(0), U64(start + j))
        ctr = U64(0)
        k = k0
        n = 0
        bits = U64(0)
        left = 0
        c = CENSORED
        while n < max_steps:
            if left == 0:
                bits, ctr = next_raw(key, ctr)
                left = 64
            if bits & U64(1):
                k += 1
            else:
                k -= 1
            bits = bits >> U64(1)
            left -= 1
            n += 1
            if k >= kb:
                c = TARGET
                break
            if k <= ka:
                c = NON_TARGET
                break
        steps[j] = n
        out[j] = c
