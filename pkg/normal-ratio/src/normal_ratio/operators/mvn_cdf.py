#  Licensed to the Apache Software Foundation (ASF) under one or more
#  contributor license agreements.  See the NOTICE file distributed with
#  this work for additional information regarding copyright ownership.
#  The ASF licenses this file to You under the Apache License, Version 2.0
#  (the "License"); you may not use this file except in compliance with
#  the License.  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Normal orthant and rectangle probabilities.

d = 1 uses Phi, d = 2 the Drezner-Wesolowsky/Genz single-integral form
with fixed Gauss-Legendre rules, and d >= 3 the Genz sequential
conditioning transform integrated by a randomly shifted rank-1 lattice
(fast component-by-component construction) with a tent periodization.
"""

import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.random import Generator, Philox
from scipy.fft import fft, ifft
from scipy.special import log_ndtr, ndtr, ndtri, roots_legendre

from normal_ratio.config import ratio_settings
from normal_ratio.numerics.linalg import SpdMatrix
from normal_ratio.numerics.special_fn import erfc
from normal_ratio.structure import MvnMethod, MvnProbability
from normal_ratio.utils.decorators import log_time
from normal_ratio.utils.exceptions import (
    DimensionMismatchError,
    MvnConsistencyError,
    NonFiniteInputError,
    NotPositiveDefiniteError,
)
from normal_ratio.utils.log import log

MAX_DIM = 25
# error reported by the deterministic d <= 2 paths
DETERMINISTIC_ERROR = 1e-15
ROUNDING_SLACK = 1e-12
_NDTRI_EPS = 2.0**-53
_TWO_PI = 2.0 * math.pi


def std_normal_cdf(x: float) -> float:
    if not math.isfinite(x):
        raise NonFiniteInputError(f"x must be finite, got {x!r}")
    return 0.5 * erfc(-x / math.sqrt(2.0))


def log_std_normal_cdf(x: float) -> float:
    if not math.isfinite(x):
        raise NonFiniteInputError(f"x must be finite, got {x!r}")
    return float(log_ndtr(x))


@lru_cache(maxsize=None)
def _legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes moved to (0, 2)."""
    x, w = roots_legendre(n)
    return 1.0 + x, w


def _bvnu(dh: float, dk: float, r: float) -> float:
    """P(Z1 > dh, Z2 > dk) for standard bivariate normal with correlation r."""
    if dh == math.inf or dk == math.inf:
        return 0.0
    if dh == -math.inf:
        return 1.0 if dk == -math.inf else float(ndtr(-dk))
    if dk == -math.inf:
        return float(ndtr(-dh))
    if r == 0:
        return float(ndtr(-dh) * ndtr(-dk))

    h, k = dh, dk
    hk = h * k
    if abs(r) < 0.3:
        x, w = _legendre_rule(12)
    elif abs(r) < 0.75:
        x, w = _legendre_rule(24)
    else:
        x, w = _legendre_rule(40)

    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        sn = np.sin(asr * x)
        bvn = float(np.exp((sn * hk - hs) / (1.0 - sn * sn)) @ w)
        bvn = bvn * asr / _TWO_PI + float(ndtr(-h) * ndtr(-k))
        return min(1.0, max(0.0, bvn))

    if r < 0:
        k = -k
        hk = -hk
    bvn = 0.0
    if abs(r) < 1:
        as_ = 1.0 - r * r
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        asr = -0.5 * (bs / as_ + hk)
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        if asr > -100:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_)
        if hk > -100:
            b = math.sqrt(bs)
            sp = math.sqrt(_TWO_PI) * float(ndtr(-b / a))
            bvn -= math.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
        a *= 0.5
        xs = (a * x) ** 2
        asr_x = -0.5 * (bs / xs + hk)
        ix = asr_x > -100
        xs = xs[ix]
        sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(-0.5 * hk * xs / (1.0 + rs) ** 2) / rs
        bvn = (a * float((np.exp(asr_x[ix]) * (sp - ep)) @ w[ix]) - bvn) / _TWO_PI

    if r > 0:
        bvn += float(ndtr(-max(h, k)))
    elif h >= k:
        bvn = -bvn
    else:
        lower = float(ndtr(k) - ndtr(h)) if h < 0 else float(ndtr(-h) - ndtr(-k))
        bvn = lower - bvn
    return min(1.0, max(0.0, bvn))


def bvn_cdf(h: float, k: float, rho: float) -> float:
    """P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation rho."""
    if not -1.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (-1, 1), got {rho!r}")
    if math.isnan(h) or math.isnan(k):
        raise NonFiniteInputError("bivariate cdf bounds must not be NaN")
    # symmetric in (h, k) as evaluated
    lo, hi = min(h, k), max(h, k)
    return _bvnu(-lo, -hi, rho)


def _primes_upto(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(math.isqrt(n)) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)


def _factorize_int(n: int) -> list:
    """Sorted unique prime factors of n."""
    factors = set()
    for p in _primes_upto(math.isqrt(n) + 1):
        p = int(p)
        while n % p == 0:
            factors.add(p)
            n //= p
        if n == 1:
            break
    if n != 1:
        factors.add(n)
    return sorted(factors)


def _primitive_root(p: int) -> int:
    pm = p - 1
    factors = _factorize_int(pm)
    r, k = 2, 0
    while k < len(factors):
        if pow(r, pm // factors[k], p) == 1:
            r += 1
            k = 0
        else:
            k += 1
    return r


@lru_cache(maxsize=32)
def _cbc_lattice(n_dim: int, n_points: int) -> Tuple[Tuple[float, ...], int]:
    """Fast CBC rank-1 lattice generator; n_points is rounded down to a prime."""
    n_points = int(_primes_upto(n_points)[-1])
    gm = np.hstack([1.0, 0.8 ** np.arange(n_dim - 1)])
    q = np.ones(1)
    w = 0
    z = np.arange(1, n_dim + 1)
    m = (n_points - 1) // 2
    g = _primitive_root(n_points)
    perm = np.ones(m, dtype=np.int64)
    for j in range(m - 1):
        perm[j + 1] = (g * perm[j]) % n_points
    perm = np.minimum(n_points - perm, perm)
    pn = perm / n_points
    c = pn * pn - pn + 1.0 / 6
    fc = fft(c)
    for s in range(1, n_dim):
        reordered = np.hstack([c[: w + 1][::-1], c[w + 1 : m][::-1]])
        q = q * (1.0 + gm[s - 1] * reordered)
        w = int(ifft(fc * fft(q)).real.argmin())
        z[s] = perm[w]
    return tuple(float(v) for v in z / n_points), n_points


def _swap(x: np.ndarray, a, b):
    t = x[a].copy()
    x[a] = x[b]
    x[b] = t


def _permuted_cholesky(cov: np.ndarray, low: np.ndarray, high: np.ndarray, tol: float = 1e-10):
    """Scaled Cholesky factor with variables reordered by increasing conditional probability."""
    cho = np.array(cov, dtype=np.float64)
    new_lo = np.array(low, dtype=np.float64)
    new_hi = np.array(high, dtype=np.float64)
    n = cho.shape[0]
    dc = np.sqrt(np.diag(cho))
    new_lo /= dc
    new_hi /= dc
    cho /= dc
    cho /= dc[:, np.newaxis]

    y = np.zeros(n)
    sqtp = math.sqrt(_TWO_PI)
    for k in range(n):
        im, ck, dem = k, 0.0, 1.0
        lo_m = hi_m = 0.0
        for i in range(k, n):
            if cho[i, i] > tol:
                ci = math.sqrt(cho[i, i])
                s = float(cho[i, :k] @ y[:k]) if k else 0.0
                lo_i = (new_lo[i] - s) / ci
                hi_i = (new_hi[i] - s) / ci
                de = float(ndtr(hi_i) - ndtr(lo_i))
                if de <= dem:
                    ck, dem, lo_m, hi_m, im = ci, de, lo_i, hi_i, i
        if im > k:
            cho[im, im] = cho[k, k]
            _swap(cho, np.s_[im, :k], np.s_[k, :k])
            _swap(cho, np.s_[im + 1 :, im], np.s_[im + 1 :, k])
            _swap(cho, np.s_[k + 1 : im, k], np.s_[im, k + 1 : im])
            _swap(new_lo, k, im)
            _swap(new_hi, k, im)
        if ck <= (k + 1) * tol:
            raise NotPositiveDefiniteError(f"covariance is numerically singular at pivot {k}")
        cho[k, k] = ck
        cho[k, k + 1 :] = 0.0
        for i in range(k + 1, n):
            cho[i, k] /= ck
            cho[i, k + 1 : i + 1] -= cho[i, k] * cho[k + 1 : i + 1, k]
        if abs(dem) > tol:
            y[k] = (math.exp(-0.5 * lo_m * lo_m) - math.exp(-0.5 * hi_m * hi_m)) / (sqtp * dem)
        else:
            y[k] = 0.5 * (lo_m + hi_m)
            if lo_m < -10:
                y[k] = hi_m
            elif hi_m > 10:
                y[k] = lo_m
        cho[k, : k + 1] /= ck
        new_lo[k] /= ck
        new_hi[k] /= ck
    return cho, new_lo, new_hi


def _conditioned_product(cho: np.ndarray, lo: np.ndarray, hi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Integrand of the sequential conditioning transform at unit-cube points x (n_pts, d - 1)."""
    n = cho.shape[0]
    n_pts = x.shape[0]
    c = np.full(n_pts, ndtr(lo[0] / cho[0, 0]))
    dc = np.full(n_pts, ndtr(hi[0] / cho[0, 0])) - c
    pv = dc.copy()
    y = np.zeros((n - 1, n_pts))
    for i in range(1, n):
        u = np.clip(c + x[:, i - 1] * dc, _NDTRI_EPS, 1.0 - _NDTRI_EPS)
        y[i - 1] = ndtri(u)
        s = cho[i, :i] @ y[:i]
        c = ndtr((lo[i] - s) / cho[i, i])
        dc = ndtr((hi[i] - s) / cho[i, i]) - c
        pv *= dc
    return pv


@log_time("qmc orthant integration")
def _qmc_probability(cov: np.ndarray, high: np.ndarray, n_points: int, n_shifts: int, seed: int) -> Tuple[float, float]:
    """Mean over randomly shifted lattice rules and its error estimate.

    The error is three standard errors of that mean, 3 * std(shift estimates) / sqrt(n_shifts),
    not three standard deviations of a single shift.
    """
    d = cov.shape[0]
    cho, lo, hi = _permuted_cholesky(cov, np.full(d, -np.inf), high)
    q, n_pts = _cbc_lattice(d - 1, n_points)
    q = np.asarray(q)
    shifts = Generator(Philox(seed)).random((n_shifts, d - 1))
    base = np.arange(1, n_pts + 1, dtype=np.float64)[:, np.newaxis] * q
    estimates = np.empty(n_shifts)
    for j in range(n_shifts):
        frac = np.mod(base + shifts[j], 1.0)
        estimates[j] = float(np.mean(_conditioned_product(cho, lo, hi, np.abs(2.0 * frac - 1.0))))
    value = float(np.mean(estimates))
    error = 3.0 * float(np.std(estimates, ddof=1)) / math.sqrt(n_shifts)
    log.debug("QMC orthant d=%d: %.17g +- %.3g (%d points x %d shifts)", d, value, error, n_pts, n_shifts)
    return value, error


def clamp_probability(value: float, error: float) -> float:
    """Clip a probability estimate into [0, 1] when it leaves it by less than its error."""
    if value < 0.0 or value > 1.0:
        excess = -value if value < 0.0 else value - 1.0
        # sums of two estimates near 1 can overshoot by rounding alone
        if excess > error + ROUNDING_SLACK:
            raise MvnConsistencyError(f"orthant probability {value!r} is outside [0, 1] beyond its error {error!r}")
        return min(1.0, max(0.0, value))
    return value


def mvn_cdf(
    mean: Sequence[float],
    cov: SpdMatrix,
    upper: Sequence[float],
    n_points: Optional[int] = None,
    n_shifts: Optional[int] = None,
    seed: Optional[int] = None,
) -> MvnProbability:
    """P(X <= upper) componentwise for X ~ N(mean, cov)."""
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    d = cov.dim
    if mean.shape[0] != d or upper.shape[0] != d:
        raise DimensionMismatchError(f"mean ({mean.shape[0]}) and upper ({upper.shape[0]}) must match cov dim {d}")
    if d > MAX_DIM:
        raise DimensionMismatchError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(mean)) or np.any(np.isnan(upper)):
        raise NonFiniteInputError("mean must be finite and upper must not be NaN")
    high = upper - mean
    sd = np.sqrt(np.diag(cov.entries))

    if d == 1:
        z = float(high[0] / sd[0])
        value = 1.0 if z == math.inf else (0.0 if z == -math.inf else std_normal_cdf(z))
        return MvnProbability(value=value, error_estimate=DETERMINISTIC_ERROR, method=MvnMethod.UNIVARIATE)
    if d == 2:
        rho = float(cov.entries[0, 1] / (sd[0] * sd[1]))
        value = bvn_cdf(float(high[0] / sd[0]), float(high[1] / sd[1]), rho)
        return MvnProbability(value=value, error_estimate=DETERMINISTIC_ERROR, method=MvnMethod.BIVARIATE)

    n_points = n_points or ratio_settings.qmc_points
    n_shifts = n_shifts or ratio_settings.qmc_shifts
    if n_shifts < 2:
        raise ValueError(f"n_shifts must be at least 2, got {n_shifts}")
    seed = ratio_settings.default_seed if seed is None else seed
    value, error = _qmc_probability(cov.entries, high, n_points, n_shifts, seed)
    return MvnProbability(value=clamp_probability(value, error), error_estimate=error, method=MvnMethod.QMC)
