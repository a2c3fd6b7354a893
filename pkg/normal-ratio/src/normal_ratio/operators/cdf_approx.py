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

"""Pr(Y < t) through the linear combinations u_i = x_{i+1} - t_i x_1.

When x_1 > 0 the event {Y < t} is {u < 0}; approx_cdf takes that single
orthant. exact_cdf adds the sign of x_1 as an extra coordinate:

    Pr(Y < t) = Pr(u <= 0, x_1 >= 0) + Pr(u >= 0, x_1 <= 0),

and the two differ by at most Pr(x_1 <= 0) = validity_diagnostic.
"""

import math
from typing import Optional, Sequence

import numpy as np

from normal_ratio.config import ratio_settings
from normal_ratio.numerics.linalg import factorize
from normal_ratio.operators.mvn_cdf import clamp_probability, mvn_cdf, std_normal_cdf
from normal_ratio.structure import LinearizedModel, MvnProbability, NormalRatioModel
from normal_ratio.utils.exceptions import (
    DegenerateCovarianceError,
    DimensionMismatchError,
    NonFiniteInputError,
    NotPositiveDefiniteError,
)
from normal_ratio.utils.log import log


def _check_t(model: NormalRatioModel, t: Sequence[float]) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.shape[0] != model.ratio_dim:
        raise DimensionMismatchError(f"t has {t.shape[0]} coordinates, model expects {model.ratio_dim}")
    if not np.all(np.isfinite(t)):
        raise NonFiniteInputError(f"t must be finite, got {t.tolist()}")
    return t


def _spd_or_degenerate(matrix: np.ndarray, what: str):
    try:
        return factorize(matrix)
    except NotPositiveDefiniteError as e:
        raise DegenerateCovarianceError(f"{what} covariance is not positive definite") from e


def linearize(model: NormalRatioModel, t: Sequence[float]) -> LinearizedModel:
    t = _check_t(model, t)
    mu = model.mu
    s = model.sigma.entries
    mean = mu[1:] - t * mu[0]
    cov = s[1:, 1:] - np.outer(t, s[0, 1:]) - np.outer(s[1:, 0], t) + np.outer(t, t) * s[0, 0]
    mean.setflags(write=False)
    t.setflags(write=False)
    return LinearizedModel(mean=mean, cov=_spd_or_degenerate(cov, "linearized"), t=t)


def validity_diagnostic(model: NormalRatioModel) -> float:
    """P(x_1 <= 0), which bounds |approx_cdf - exact_cdf|."""
    return std_normal_cdf(-float(model.mu[0]) / math.sqrt(float(model.sigma.entries[0, 0])))


def approx_cdf(
    model: NormalRatioModel,
    t: Sequence[float],
    n_points: Optional[int] = None,
    n_shifts: Optional[int] = None,
    seed: Optional[int] = None,
) -> MvnProbability:
    lin = linearize(model, t)
    diagnostic = validity_diagnostic(model)
    if diagnostic > ratio_settings.validity_warn_threshold:
        log.warning(
            "P(x1 <= 0) = %.3g exceeds %.3g; the single-orthant approximation may be off by that much",
            diagnostic,
            ratio_settings.validity_warn_threshold,
        )
    return mvn_cdf(lin.mean, lin.cov, np.zeros(lin.dim), n_points=n_points, n_shifts=n_shifts, seed=seed)


def exact_cdf(
    model: NormalRatioModel,
    t: Sequence[float],
    n_points: Optional[int] = None,
    n_shifts: Optional[int] = None,
    seed: Optional[int] = None,
) -> MvnProbability:
    lin = linearize(model, t)
    mu = model.mu
    s = model.sigma.entries
    p = model.p

    # v = (u_1, ..., u_{p-1}, -x_1)
    mean = np.empty(p)
    mean[:-1] = lin.mean
    mean[-1] = -mu[0]
    cov = np.empty((p, p))
    cov[:-1, :-1] = lin.cov.entries
    cross = -(s[1:, 0] - lin.t * s[0, 0])
    cov[:-1, -1] = cross
    cov[-1, :-1] = cross
    cov[-1, -1] = s[0, 0]
    aug = _spd_or_degenerate(cov, "augmented")

    upper = np.zeros(p)
    positive = mvn_cdf(mean, aug, upper, n_points=n_points, n_shifts=n_shifts, seed=seed)
    negative = mvn_cdf(-mean, aug, upper, n_points=n_points, n_shifts=n_shifts, seed=seed)
    error = positive.error_estimate + negative.error_estimate
    value = clamp_probability(positive.value + negative.value, error)
    log.debug("exact cdf: %.17g + %.17g", positive.value, negative.value)
    return MvnProbability(value=value, error_estimate=error, method=positive.method)
