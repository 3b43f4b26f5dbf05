"""Counter-based random streams.

Every draw is a pure function of a 64-bit key and a counter, so a path's
randomness depends only on ``(seed, x index, path index)`` and never on
how paths are scheduled across workers.

The k-th raw word of a stream with key ``K`` is ``mix64(K + G * (k + 1))``
where ``mix64`` is the SplitMix64 finalizer and ``G`` the golden-ratio
increment. Normal variates use a 128-box ziggurat, exponentials use
``-log(U)`` and symmetric stable variates the Chambers-Mallows-Stuck map.

The jitted primitives here are shared with the path kernels, which is what
makes the Python-level :class:`RandomStream` reproduce kernel draws exactly.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

__all__ = ["RandomStream", "derive_key", "TAG_PATH", "TAG_WALK", "TAG_SAMPLE"]

U64 = nb.uint64
_INV53 = 1.0 / 9007199254740992.0

# stream tags keep unrelated consumers of one seed apart
TAG_PATH = 1
TAG_WALK = 2
TAG_SAMPLE = 3

# ziggurat tables (128 boxes); compiled code reads them as constants
_ZIG_R = 3.442619855899
_ZIG_V = 9.91256303526217e-3


def _zig_tables():
    n = 128
    x = np.zeros(n + 1)
    f = math.exp(-0.5 * _ZIG_R * _ZIG_R)
    x[0] = _ZIG_V / f
    x[1] = _ZIG_R
    for i in range(2, n):
        x[i] = math.sqrt(-2.0 * math.log(_ZIG_V / x[i - 1] + f))
        f = math.exp(-0.5 * x[i] * x[i])
    ratio = x[1:] / x[:-1]
    return x, ratio


ZIG_X, ZIG_RATIO = _zig_tables()


@nb.njit(inline="always", cache=True)
def mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@nb.njit(inline="always", cache=True)
def next_raw(key, ctr):
    ctr = ctr + U64(1)
    return mix64(key + U64(0x9E3779B97F4A7C15) * ctr), ctr


@nb.njit(inline="always", cache=True)
def next_open(key, ctr):
    # uniform on the open interval (0, 1)
    w, ctr = next_raw(key, ctr)
    return ((w >> U64(11)) + 0.5) * _INV53, ctr


@nb.njit(inline="always", cache=True)
def next_exponential(key, ctr):
    u, ctr = next_open(key, ctr)
    return -math.log(u), ctr


@nb.njit(cache=True)
def _normal_rest(key, ctr, i, u):
    # rejected by the box test: finish the ziggurat draw out of line
    while True:
        if i == 0:
            # base strip: sample the tail beyond R
            while True:
                a, ctr = next_open(key, ctr)
                b, ctr = next_open(key, ctr)
                t = -math.log(a) / _ZIG_R
                s = -math.log(b)
                if s + s >= t * t:
                    break
            if u < 0.0:
                return -(_ZIG_R + t), ctr
            return _ZIG_R + t, ctr
        x = u * ZIG_X[i]
        f0 = math.exp(-0.5 * (ZIG_X[i] * ZIG_X[i] - x * x))
        f1 = math.exp(-0.5 * (ZIG_X[i + 1] * ZIG_X[i + 1] - x * x))
        c, ctr = next_open(key, ctr)
        if f1 + c * (f0 - f1) < 1.0:
            return x, ctr
        w, ctr = next_raw(key, ctr)
        i = int(w & U64(127))
        u = 2.0 * ((w >> U64(11)) * _INV53) - 1.0
        if abs(u) < ZIG_RATIO[i]:
            return u * ZIG_X[i], ctr


@nb.njit(inline="always", cache=True)
def next_normal(key, ctr):
    w, ctr = next_raw(key, ctr)
    i = int(w & U64(127))
    u = 2.0 * ((w >> U64(11)) * _INV53) - 1.0
    if abs(u) < ZIG_RATIO[i]:
        return u * ZIG_X[i], ctr
    return _normal_rest(key, ctr, i, u)


@nb.njit(inline="always", cache=True)
def next_stable(alpha, key, ctr):
    # symmetric CMS map, characteristic function exp(-|z|^alpha)
    u, ctr = next_open(key, ctr)
    w, ctr = next_exponential(key, ctr)
    v = math.pi * (u - 0.5)
    if alpha == 1.0:
        return math.tan(v), ctr
    return (math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha)
            * (math.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)), ctr


@nb.njit(inline="always", cache=True)
def next_positive_stable(rho, key, ctr):
    # Kanter's representation, Laplace transform exp(-s^rho), 0 < rho < 1
    u, ctr = next_open(key, ctr)
    w, ctr = next_exponential(key, ctr)
    t = math.pi * u
    return (math.sin(rho * t) / math.sin(t) ** (1.0 / rho)
            * (math.sin((1.0 - rho) * t) / w) ** ((1.0 - rho) / rho)), ctr


@nb.njit(cache=True)
def _derive(seed, a, b, c):
    g = U64(0x9E3779B97F4A7C15)
    h = mix64(seed + g)
    h = mix64(h ^ mix64(a + g * U64(2)))
    h = mix64(h ^ mix64(b + g * U64(3)))
    h = mix64(h ^ mix64(c + g * U64(4)))
    return h


def _u64(v: int) -> np.uint64:
    return np.uint64(int(v) % (1 << 64))


def derive_key(seed: int, *indices: int) -> int:
    """Key of the stream labelled by ``seed`` and up to three indices."""
    if len(indices) > 3:
        raise ValueError("at most three stream indices are supported")
    idx = list(indices) + [0] * (3 - len(indices))
    return int(_derive(_u64(seed), _u64(idx[0]), _u64(idx[1]), _u64(idx[2])))


@nb.njit(cache=True)
def _fill(kind, par, key, ctr, out):
    for j in range(out.shape[0]):
        if kind == 0:
            out[j], ctr = next_open(key, ctr)
        elif kind == 1:
            out[j], ctr = next_normal(key, ctr)
        elif kind == 2:
            out[j], ctr = next_exponential(key, ctr)
        elif kind == 3:
            out[j], ctr = next_stable(par, key, ctr)
        else:
            out[j], ctr = next_positive_stable(par, key, ctr)
    return ctr


class RandomStream:
    """A reproducible stream of variates.

    Parameters
    ----------
    seed : int
        Master seed.
    *indices : int
        Up to three labels (for example tag, x index, path index).

    Examples
    --------
    >>> s = RandomStream(1, 0, 5)
    >>> a = s.normals(3)
    >>> b = RandomStream(1, 0, 5).normals(3)
    >>> bool((a == b).all())
    True
    """

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, *indices: int):
        self.key = derive_key(seed, *indices)
        self.counter = 0

    @classmethod
    def from_key(cls, key: int, counter: int = 0) -> "RandomStream":
        s = cls.__new__(cls)
        s.key = int(key)
        s.counter = int(counter)
        return s

    def _draw(self, kind: int, size: int, par: float = 0.0) -> np.ndarray:
        out = np.empty(int(size))
        ctr = _fill(kind, float(par), _u64(self.key), _u64(self.counter), out)
        self.counter = int(ctr)
        return out

    def uniform(self) -> float:
        return float(self._draw(0, 1)[0])

    def normal(self) -> float:
        return float(self._draw(1, 1)[0])

    def exponential(self) -> float:
        return float(self._draw(2, 1)[0])

    def standard_stable(self, alpha: float) -> float:
        return float(self._draw(3, 1, alpha)[0])

    def uniforms(self, size: int) -> np.ndarray:
        return self._draw(0, size)

    def normals(self, size: int) -> np.ndarray:
        return self._draw(1, size)

    def exponentials(self, size: int) -> np.ndarray:
        return self._draw(2, size)

    def stables(self, alpha: float, size: int) -> np.ndarray:
        return self._draw(3, size, alpha)

    def positive_stables(self, rho: float, size: int) -> np.ndarray:
        return self._draw(4, size, rho)
