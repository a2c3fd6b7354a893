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

"""Closed-form density of Y = (x2/x1, ..., xp/x1) for X ~ N(mu, Sigma).

Along the ray X = zW the density reduces to

    g(Y) = c e^{1/2 - Ma/2} a * integral e^{-Ma^2 u^2 / 2} |au + b|^{p-1} du

after z = b + a u. Odd p expands the polynomial into full-line Gaussian
moments; even p splits at the sign change of au + b and uses truncated
moments. Everything is assembled in the log domain.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy import special

from normal_ratio.config import ratio_settings
from normal_ratio.numerics.linalg import whiten
from normal_ratio.numerics.special_fn import (
    GammaArg,
    erf,
    gamma,
    log_gamma,
    log_lower_inc_gamma,
    log_upper_inc_gamma_int,
)
from normal_ratio.structure import Intermediates, NormalRatioModel, RatioPoint
from normal_ratio.utils.decorators import log_time
from normal_ratio.utils.exceptions import DimensionMismatchError
from normal_ratio.utils.log import log

LOG_2PI = math.log(2.0 * math.pi)
LOG_SQRT_PI_HALF = 0.5 * math.log(math.pi) - math.log(2.0)


def _check_moment_args(m_q: float, a_s: float):
    if not (m_q > 0 and a_s > 0):
        raise ValueError(f"moments need m_q > 0 and a_s > 0, got m_q={m_q!r}, a_s={a_s!r}")


def _log_alpha(m_q: float, a_s: float) -> float:
    """ln(Ma^2 / 2)."""
    return math.log(0.5 * m_q) + 2.0 * math.log(a_s)


def _log_pow(x: float, e: int) -> float:
    # 0^0 = 1
    if e == 0:
        return 0.0
    if x == 0:
        return -math.inf
    return e * math.log(x)


def intermediates(model: NormalRatioModel, point: RatioPoint) -> Intermediates:
    if point.dim != model.ratio_dim:
        raise DimensionMismatchError(f"point has {point.dim} coordinates, model expects {model.ratio_dim}")
    w = point.w
    w_hat = whiten(model.sigma, w)
    mu_hat = model.whitened_mu

    m_q = float(np.dot(w_hat, w_hat))
    cross = float(np.dot(w_hat, mu_hat))
    k_l = -2.0 * cross
    l_q = float(np.dot(mu_hat, mu_hat)) + 1.0
    b_c = -k_l / (2.0 * m_q)
    # L/M - K^2/4M^2 written as (1 + |mu_hat - proj_w mu_hat|^2) / M, free of cancellation
    residual = mu_hat - (cross / m_q) * w_hat
    a_s = (1.0 + float(np.dot(residual, residual))) / m_q
    log_c = -0.5 * model.p * LOG_2PI - 0.5 * model.log_det_sigma
    return Intermediates(w=w, m_q=m_q, k_l=k_l, l_q=l_q, a_s=a_s, b_c=b_c, log_c=log_c)


def log_gaussian_even_moment(m_q: float, a_s: float, j: int) -> float:
    _check_moment_args(m_q, a_s)
    return -(0.5 + j) * _log_alpha(m_q, a_s) + log_gamma(GammaArg.half_integer(j))


def gaussian_even_moment(m_q: float, a_s: float, j: int) -> float:
    """integral over the real line of e^{-Ma^2 u^2 / 2} u^{2j}."""
    _check_moment_args(m_q, a_s)
    alpha = 0.5 * m_q * a_s * a_s
    return alpha ** -(0.5 + j) * gamma(GammaArg.half_integer(j))


def log_halfline_odd_moment(m_q: float, a_s: float, i: int) -> float:
    _check_moment_args(m_q, a_s)
    return -i * _log_alpha(m_q, a_s) - math.log(2.0) + log_gamma(GammaArg.integer(i))


def halfline_odd_moment(m_q: float, a_s: float, i: int) -> float:
    """integral over [0, inf) of e^{-Ma^2 u^2 / 2} u^{2i-1}."""
    _check_moment_args(m_q, a_s)
    alpha = 0.5 * m_q * a_s * a_s
    return 0.5 * alpha**-i * gamma(GammaArg.integer(i))


def log_truncated_even_moment(m_q: float, a_s: float, cutoff: float, i: int) -> float:
    _check_moment_args(m_q, a_s)
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff!r}")
    if cutoff == 0:
        return -math.inf
    log_alpha = _log_alpha(m_q, a_s)
    d = math.exp(0.5 * log_alpha) * cutoff
    if i == 0:
        return -0.5 * log_alpha + LOG_SQRT_PI_HALF + math.log(erf(d))
    return -math.log(2.0) - (0.5 + i) * log_alpha + log_lower_inc_gamma(i + 0.5, d * d)


def truncated_even_moment(m_q: float, a_s: float, cutoff: float, i: int) -> float:
    """integral over [0, cutoff] of e^{-Ma^2 u^2 / 2} u^{2i}."""
    return math.exp(log_truncated_even_moment(m_q, a_s, cutoff, i))


def log_truncated_odd_moment(m_q: float, a_s: float, cutoff: float, i: int) -> float:
    _check_moment_args(m_q, a_s)
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff!r}")
    log_alpha = _log_alpha(m_q, a_s)
    d2 = 0.5 * m_q * (a_s * cutoff) ** 2
    # halfline moment minus the [0, cutoff] piece, i.e. 1/2 alpha^{-i} Gamma(i, d^2)
    return -math.log(2.0) - i * log_alpha + log_upper_inc_gamma_int(i, d2)


def truncated_odd_moment(m_q: float, a_s: float, cutoff: float, i: int) -> float:
    """integral over [cutoff, inf) of e^{-Ma^2 u^2 / 2} u^{2i-1}."""
    return math.exp(log_truncated_odd_moment(m_q, a_s, cutoff, i))


def _log_odd_p_sum(n: int, a_s: float, abs_b: float, m_q: float) -> float:
    """ln integral (au + b)^n e^{-Ma^2 u^2 / 2} du for even n; only even powers of u survive."""
    terms = [
        math.log(special.comb(n, 2 * j, exact=True))
        + 2 * j * math.log(a_s)
        + _log_pow(abs_b, n - 2 * j)
        + log_gaussian_even_moment(m_q, a_s, j)
        for j in range(n // 2 + 1)
    ]
    return float(special.logsumexp(terms))


def _log_even_p_sum(n: int, a_s: float, abs_b: float, m_q: float, cutoff: float) -> float:
    """ln integral |au + |b||^n e^{-Ma^2 u^2 / 2} du for odd n, split at u = -cutoff = -|b|/a."""
    terms = []
    for k in range(n + 1):
        if k % 2:
            log_t = log_truncated_odd_moment(m_q, a_s, cutoff, (k + 1) // 2)
        else:
            log_t = log_truncated_even_moment(m_q, a_s, cutoff, k // 2)
        terms.append(math.log(special.comb(n, k, exact=True)) + k * math.log(a_s) + (n - k) * math.log(abs_b) + log_t)
    return math.log(2.0) + float(special.logsumexp(terms))


def log_density(model: NormalRatioModel, point: RatioPoint) -> float:
    """ln g(Y)."""
    inter = intermediates(model, point)
    p, m_q, a_s = model.p, inter.m_q, inter.a_s
    abs_b = abs(inter.b_c)
    prefactor = inter.log_c + 0.5 - 0.5 * m_q * a_s

    if p % 2 == 1:
        return prefactor + math.log(a_s) + _log_odd_p_sum(p - 1, a_s, abs_b, m_q)
    if abs_b <= ratio_settings.central_b_threshold * a_s:
        # |z|^{p-1} moment at b = 0: (2/M)^{p/2} Gamma(p/2)
        return prefactor + 0.5 * p * math.log(2.0 / m_q) + log_gamma(GammaArg(p))
    return prefactor + math.log(a_s) + _log_even_p_sum(p - 1, a_s, abs_b, m_q, inter.cutoff)


def density(model: NormalRatioModel, point: RatioPoint) -> float:
    # math.exp flushes to 0.0 below the subnormal range
    return math.exp(log_density(model, point))


def grid_points(lo: Sequence[float], hi: Sequence[float], steps: int) -> np.ndarray:
    """Regular grid rows in lexicographic order of the grid indices (last axis fastest)."""
    if len(lo) != len(hi):
        raise DimensionMismatchError(f"lo has {len(lo)} coordinates but hi has {len(hi)}")
    axes = [np.linspace(l, h, steps) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


@log_time("density grid")
def density_grid(
    model: NormalRatioModel, points: np.ndarray, log_scale: bool = False, workers: Optional[int] = None
) -> np.ndarray:
    """Evaluate many points; output order follows the input rows for any worker count."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[1] != model.ratio_dim:
        raise DimensionMismatchError(f"points have {points.shape[1]} columns, model expects {model.ratio_dim}")
    workers = workers or ratio_settings.workers
    fn = log_density if log_scale else density

    def _eval(row: np.ndarray) -> float:
        return fn(model, RatioPoint(row))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_eval, points))
    else:
        values = [_eval(row) for row in points]
    log.debug("Evaluated %d points with %d worker(s)", len(values), workers)
    return np.array(values, dtype=np.float64)
