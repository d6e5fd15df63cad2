"""Seeded random streams, special functions and slope fitting.

Random streams are built in two stages. A master seed and a stream id are
mixed with one round of SplitMix64; the 64-bit output seeds numpy's PCG64
bit generator (PCG-XSL-RR 128/64). Both algorithms are fixed, so a given
``(seed, stream_id)`` pair yields the same sequence on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma, then finalize."""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class RngStream:
    """A reproducible stream of uniform and normal variates.

    ``state`` is the 64-bit word that seeds the PCG64 generator; streams are
    meant to be created with :func:`derive_stream` and consumed by a single
    owner.
    """

    state: int
    stream_id: int
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._gen = np.random.Generator(np.random.PCG64(self.state))

    def uniform(self, count: int) -> np.ndarray:
        """Uniform variates on [0, 1) with 53 random bits each."""
        return self._gen.random(int(count))

    def normal(self, count: int) -> np.ndarray:
        return std_normal(self, count)


def derive_stream(master_seed: int, stream_id: int) -> RngStream:
    if stream_id < 0:
        raise InputError(f"stream_id must be nonnegative, got {stream_id}")
    mixed = (int(master_seed) & _MASK64) ^ ((int(stream_id) * _GOLDEN_GAMMA) & _MASK64)
    return RngStream(state=splitmix64(mixed), stream_id=int(stream_id))


def std_normal(stream: RngStream, count: int) -> np.ndarray:
    """Standard normal variates by the basic Box-Muller transform.

    Each pair of uniforms (u1, u2) produces the two outputs
    ``r cos(2 pi u2)`` and ``r sin(2 pi u2)`` with ``r = sqrt(-2 log u1)``,
    stored consecutively. An odd count drops the final sine.
    """
    count = int(count)
    if count < 0:
        raise InputError("count must be nonnegative")
    if count == 0:
        return np.empty(0)
    pairs = (count + 1) // 2
    u = stream.uniform(2 * pairs).reshape(pairs, 2)
    # 1 - u lies in (0, 1], keeping the log finite
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * math.pi * u[:, 1]
    out = np.empty((pairs, 2))
    out[:, 0] = r * np.cos(angle)
    out[:, 1] = r * np.sin(angle)
    return out.ravel()[:count]


def normal_cdf(z):
    """Standard normal distribution function.

    Uses ``Phi(z) = erfc(-z / sqrt 2) / 2``, which keeps full relative
    accuracy in the lower tail. Accepts scalars or arrays.
    """
    if np.ndim(z) == 0:
        z = float(z)
        if not math.isfinite(z):
            raise InputError("normal_cdf needs a finite argument")
        return 0.5 * math.erfc(-z / math.sqrt(2.0))
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("normal_cdf needs finite arguments")
    flat = [0.5 * math.erfc(-v / math.sqrt(2.0)) for v in arr.ravel()]
    return np.asarray(flat).reshape(arr.shape)


def normal_sf(z: float) -> float:
    """Upper tail ``1 - Phi(z)`` without cancellation."""
    return 0.5 * math.erfc(float(z) / math.sqrt(2.0))


_GAMMA_EPS = 1e-15
_GAMMA_MAXITER = 1000
_TINY = 1e-300


def _gamma_series(a: float, x: np.ndarray) -> np.ndarray:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
    term = np.ones_like(x) / a
    total = term.copy()
    ap = np.full_like(x, a)
    active = np.ones(x.shape, dtype=bool)
    for _ in range(_GAMMA_MAXITER):
        ap[active] += 1.0
        term[active] *= x[active] / ap[active]
        total[active] += term[active]
        active &= np.abs(term) > np.abs(total) * _GAMMA_EPS
        if not active.any():
            break
    return total * np.exp(-x + a * np.log(x) - math.lgamma(a))


def _gamma_contfrac(a: float, x: np.ndarray) -> np.ndarray:
    # Q(a, x) by the modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _GAMMA_MAXITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d_new = an * d + b
        d_new = np.where(np.abs(d_new) < _TINY, _TINY, d_new)
        c_new = b + an / c
        c_new = np.where(np.abs(c_new) < _TINY, _TINY, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _GAMMA_EPS
        if not active.any():
            break
    return np.exp(-x + a * np.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x):
    """Regularized lower incomplete gamma P(a, x) for scalar ``a``.

    Series expansion for ``x < a + 1``, continued fraction otherwise.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise InputError("incomplete gamma needs finite x >= 0")
    out = np.zeros_like(xs)
    pos = xs > 0
    low = pos & (xs < a + 1.0)
    high = pos & ~low
    if low.any():
        out[low] = _gamma_series(a, xs[low])
    if high.any():
        out[high] = 1.0 - _gamma_contfrac(a, xs[high])
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def chisq_cdf(x, dof: int):
    """Chi-square distribution function with ``dof`` degrees of freedom."""
    if int(dof) != dof or dof < 1:
        raise InputError(f"dof must be a positive integer, got {dof}")
    if np.any(np.asarray(x) < 0):
        raise InputError("chisq_cdf is defined for x >= 0")
    return regularized_gamma_p(dof / 2.0, np.asarray(x, dtype=float) / 2.0)


def chisq_sf(x, dof: int):
    """Upper tail of the chi-square law, accurate when it is small."""
    if int(dof) != dof or dof < 1:
        raise InputError(f"dof must be a positive integer, got {dof}")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise InputError("chisq_sf is defined for x >= 0")
    a = dof / 2.0
    h = xs / 2.0
    out = np.ones_like(xs)
    low = (h > 0) & (h < a + 1.0)
    high = h >= a + 1.0
    if low.any():
        out[low] = 1.0 - _gamma_series(a, h[low])
    if high.any():
        out[high] = _gamma_contfrac(a, h[high])
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def fit_loglog_slope(pairs) -> float:
    """Least-squares slope of log(value) against log(size)."""
    pairs = list(pairs)
    if len(pairs) < 2:
        raise InputError("need at least two (size, value) points")
    sizes = np.array([p[0] for p in pairs], dtype=float)
    values = np.array([p[1] for p in pairs], dtype=float)
    if np.any(sizes <= 0) or np.any(values <= 0):
        raise InputError("sizes and values must be positive for a log-log fit")
    if np.unique(sizes).size < 2:
        raise InputError("need at least two distinct sizes")
    lx = np.log(sizes)
    ly = np.log(values)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def ks_distance(values, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a continuous ``cdf``."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise InputError("KS distance needs at least one value")
    f = np.asarray(cdf(v), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
