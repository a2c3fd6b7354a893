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

"""Brute-force checks of the closed-form density.

density_by_quadrature integrates the defining z-integral directly with
QUADPACK (adaptive Gauss-Kronrod). With v = sqrt(M) z and beta = b sqrt(M),

    g(Y) = c e^{1/2 - Ma/2} M^{-p/2} * integral e^{-(v - beta)^2 / 2} |v|^{p-1} dv,

and the integral is taken in s = v - beta, split at the kink s = -beta and
at the two modes, with both tails compactified by s = s* +- t / (1 - t).
"""

import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate, special

from normal_ratio.config import ratio_settings
from normal_ratio.operators.ratio_density import density, intermediates
from normal_ratio.structure import NormalRatioModel, QuadratureResult, RatioPoint
from normal_ratio.utils.exceptions import DimensionMismatchError, NotConvergedError
from normal_ratio.utils.log import log

MIN_REL_TOL = 1e-13
# absolute tolerance per piece, relative to the max-shifted integrand peak of 1
ABS_TOL_FACTOR = 1e-3


def _check_rel_tol(rel_tol: float) -> float:
    rel_tol = ratio_settings.quad_rel_tol if rel_tol is None else rel_tol
    if not rel_tol >= MIN_REL_TOL:
        raise ValueError(f"rel_tol must be at least {MIN_REL_TOL}, got {rel_tol!r}")
    return rel_tol


def _quad_piece(fn: Callable[[float], float], lo: float, hi: float, rel_tol: float, limit: int, points=None):
    """(value, abserr, neval, ok) of one QUADPACK call."""
    out = integrate.quad(
        fn, lo, hi, epsabs=ABS_TOL_FACTOR * rel_tol, epsrel=rel_tol, limit=limit, full_output=1, points=points
    )
    # a trailing message is only returned when QUADPACK reports ier > 0
    ok = len(out) == 3
    return out[0], out[1], out[2]["neval"], ok


def _finish(
    value: float, err: float, neval: int, ok: bool, rel_tol: float, strict: bool, what: str, log_scale: float = 0.0
) -> QuadratureResult:
    converged = ok and err <= rel_tol * max(1.0, abs(value))
    if not converged:
        msg = f"{what} did not converge: value={value!r}, error estimate={err!r} after {neval} evaluations"
        if strict:
            raise NotConvergedError(msg)
        log.warning(msg)
    log_value = math.log(value) + log_scale if value > 0 else -math.inf
    scale = math.exp(log_scale)
    return QuadratureResult(
        value=value * scale,
        abs_error_estimate=err * scale,
        evaluations=neval,
        converged=converged,
        log_value=log_value,
    )


def density_by_quadrature(
    model: NormalRatioModel,
    point: RatioPoint,
    rel_tol: Optional[float] = None,
    max_panels: Optional[int] = None,
    strict: bool = False,
) -> QuadratureResult:
    """Integrate the z-integral of g(Y) by adaptive quadrature.

    Non-convergence logs a warning and returns the best estimate with
    converged=False; strict=True raises NotConvergedError instead.
    """
    rel_tol = _check_rel_tol(rel_tol)
    limit = max_panels or ratio_settings.quad_max_panels
    inter = intermediates(model, point)
    n = model.p - 1
    sqrt_m = math.sqrt(inter.m_q)
    beta = inter.b_c * sqrt_m

    def log_f(s: float) -> float:
        v = s + beta
        if v == 0.0:
            return -math.inf
        return -0.5 * s * s + n * math.log(abs(v))

    root = math.sqrt(beta * beta + 4.0 * n)
    s_hi = 0.5 * (beta + root) - beta
    s_lo = 0.5 * (beta - root) - beta
    s_kink = -beta
    shift = max(log_f(s_hi), log_f(s_lo))

    def body(s: float) -> float:
        return math.exp(log_f(s) - shift)

    def upper_tail(t: float) -> float:
        return math.exp(log_f(s_hi + t / (1.0 - t)) - 2.0 * math.log1p(-t) - shift)

    def lower_tail(t: float) -> float:
        return math.exp(log_f(s_lo - t / (1.0 - t)) - 2.0 * math.log1p(-t) - shift)

    pieces = [
        _quad_piece(body, s_kink, s_hi, rel_tol, limit),
        _quad_piece(body, s_lo, s_kink, rel_tol, limit),
        _quad_piece(upper_tail, 0.0, 1.0, rel_tol, limit),
        _quad_piece(lower_tail, 0.0, 1.0, rel_tol, limit),
    ]
    total = math.fsum(piece[0] for piece in pieces)
    err = math.fsum(piece[1] for piece in pieces)
    neval = sum(piece[2] for piece in pieces)
    ok = all(piece[3] for piece in pieces) and err <= rel_tol * total

    log_scale = inter.log_c + 0.5 - 0.5 * inter.m_q * inter.a_s - 0.5 * model.p * math.log(inter.m_q) + shift
    result = _finish(total, err, neval, ok, rel_tol, strict, "density quadrature", log_scale)
    log.debug("Quadrature density %.17g (+- %.3g, %d evaluations)", result.value, result.abs_error_estimate, neval)
    return result


def _breakpoints(model: NormalRatioModel) -> List[float]:
    """Angles of mu's own ratio, where the mass of a concentrated model sits."""
    mu = model.mu
    if mu[0] == 0.0:
        return []
    return [math.atan(float(v) / float(mu[0])) for v in mu[1:]]


def normalization_check(
    model: NormalRatioModel, rel_tol: Optional[float] = None, strict: bool = False
) -> QuadratureResult:
    """Integrate g over the whole Y space through y = tan(theta); the target is 1.

    Supported for p = 2 (one angle) and p = 3 (iterated over two angles).
    """
    rel_tol = _check_rel_tol(rel_tol)
    limit = ratio_settings.quad_max_panels
    half_pi = 0.5 * math.pi
    breaks = _breakpoints(model)

    if model.p == 2:

        def integrand(theta: float) -> float:
            c = math.cos(theta)
            return density(model, RatioPoint([math.tan(theta)])) / (c * c)

        value, err, neval, ok = _quad_piece(integrand, -half_pi, half_pi, rel_tol, limit, points=breaks or None)
        return _finish(value, err, neval, ok, rel_tol, strict, "normalization check")

    if model.p == 3:
        counter = {"neval": 0, "ok": True}
        inner_points = [breaks[1]] if breaks else None

        def inner(theta1: float) -> float:
            c1 = math.cos(theta1)
            y1 = math.tan(theta1)

            def integrand(theta2: float) -> float:
                c2 = math.cos(theta2)
                return density(model, RatioPoint([y1, math.tan(theta2)])) / (c2 * c2)

            value, _, neval, ok = _quad_piece(integrand, -half_pi, half_pi, rel_tol, limit, points=inner_points)
            counter["neval"] += neval
            counter["ok"] = counter["ok"] and ok
            return value / (c1 * c1)

        outer_points = [breaks[0]] if breaks else None
        value, err, _, ok = _quad_piece(inner, -half_pi, half_pi, rel_tol, limit, points=outer_points)
        return _finish(value, err, counter["neval"], ok and counter["ok"], rel_tol, strict, "normalization check")

    raise DimensionMismatchError(f"normalization check supports p in (2, 3), got p={model.p}")


def _hinkley_terms(model: NormalRatioModel) -> Tuple[float, ...]:
    sd = np.sqrt(np.diag(model.sigma.entries))
    rho = float(model.sigma.entries[0, 1] / (sd[0] * sd[1]))
    return float(model.mu[1]), float(sd[1]), float(model.mu[0]), float(sd[0]), rho


def hinkley_density(model: NormalRatioModel, point: RatioPoint) -> float:
    """Classical density of x2 / x1 for a correlated bivariate normal (p = 2 only)."""
    if model.p != 2:
        raise DimensionMismatchError(f"hinkley density needs p=2, got p={model.p}")
    if point.dim != 1:
        raise DimensionMismatchError(f"point has {point.dim} coordinates, expected 1")
    w = float(point.y[0])
    theta_x, s_x, theta_y, s_y, rho = _hinkley_terms(model)
    one_m_r2 = 1.0 - rho * rho
    sxy = s_x * s_y

    a = math.sqrt(w * w / (s_x * s_x) - 2.0 * rho * w / sxy + 1.0 / (s_y * s_y))
    b = theta_x * w / (s_x * s_x) - rho * (theta_x + theta_y * w) / sxy + theta_y / (s_y * s_y)
    c = theta_x * theta_x / (s_x * s_x) - 2.0 * rho * theta_x * theta_y / sxy + theta_y * theta_y / (s_y * s_y)
    # b^2 <= c a^2, so d <= 1
    d = math.exp((b * b - c * a * a) / (2.0 * one_m_r2 * a * a))
    q = b / (math.sqrt(one_m_r2) * a)

    first = b * d / (a**3) / (math.sqrt(2.0 * math.pi) * sxy) * float(special.ndtr(q) - special.ndtr(-q))
    second = math.sqrt(one_m_r2) / (math.pi * sxy * a * a) * math.exp(-c / (2.0 * one_m_r2))
    return first + second


def central_cauchy_density(p: int, y) -> float:
    """Gamma(p/2) pi^{-p/2} (1 + |y|^2)^{-p/2}: the mu = 0, Sigma = s^2 I law."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != p - 1:
        raise DimensionMismatchError(f"point has {y.shape[0]} coordinates, expected {p - 1}")
    log_g = special.gammaln(0.5 * p) - 0.5 * p * math.log(math.pi) - 0.5 * p * math.log1p(float(np.dot(y, y)))
    return math.exp(log_g)
