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

"""Scalar special functions behind the closed-form densities.

erf and the regularized incomplete gamma come from scipy.special (Cephes:
power series below s + 1, continued fraction above). Gamma at integers and
half-integers is built by the exact recurrence so that
gamma(s + 1) == s * gamma(s) holds as evaluated.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from normal_ratio.utils.exceptions import NonFiniteInputError

ERF_CLAMP = 6.0
SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class GammaArg:
    """Argument twice_value / 2, exact for integers and half-integers."""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, (int, np.integer)) or self.twice_value < 1:
            raise ValueError(f"twice_value must be a positive integer, got {self.twice_value!r}")

    @property
    def value(self) -> float:
        return self.twice_value / 2.0

    @classmethod
    def integer(cls, i: int) -> "GammaArg":
        return cls(2 * i)

    @classmethod
    def half_integer(cls, j: int) -> "GammaArg":
        """The argument j + 1/2."""
        return cls(2 * j + 1)


def erf(x: float) -> float:
    if not math.isfinite(x):
        raise NonFiniteInputError(f"erf argument must be finite, got {x!r}")
    if abs(x) >= ERF_CLAMP:
        return math.copysign(1.0, x)
    return float(special.erf(x))


def erfc(x: float) -> float:
    if not math.isfinite(x):
        raise NonFiniteInputError(f"erfc argument must be finite, got {x!r}")
    return float(special.erfc(x))


@lru_cache(maxsize=256)
def _gamma_twice(twice_value: int) -> float:
    if twice_value == 1:
        return SQRT_PI
    if twice_value == 2:
        return 1.0
    s = (twice_value - 2) / 2.0
    return s * _gamma_twice(twice_value - 2)


def gamma(g: GammaArg) -> float:
    """Gamma(g.value) by recurrence from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi)."""
    # iterate up so deep arguments do not hit the recursion limit
    for t in range(2 + g.twice_value % 2, g.twice_value, 2):
        _gamma_twice(t)
    return _gamma_twice(g.twice_value)


def log_gamma(g: GammaArg) -> float:
    return float(special.gammaln(g.value))


def _check_inc_gamma_args(s: float, x: float):
    if not (math.isfinite(s) and math.isfinite(x)):
        raise NonFiniteInputError(f"incomplete gamma arguments must be finite, got s={s!r}, x={x!r}")
    if s <= 0 or x < 0:
        raise ValueError(f"incomplete gamma requires s > 0 and x >= 0, got s={s!r}, x={x!r}")


def lower_inc_gamma(s: float, x: float) -> float:
    """gamma(s, x) = integral_0^x e^{-z} z^{s-1} dz."""
    _check_inc_gamma_args(s, x)
    if x == 0:
        return 0.0
    return float(special.gammainc(s, x) * special.gamma(s))


def log_lower_inc_gamma(s: float, x: float) -> float:
    _check_inc_gamma_args(s, x)
    if x == 0:
        return -math.inf
    regularized = special.gammainc(s, x)
    if regularized > 0:
        return float(np.log(regularized) + special.gammaln(s))
    # leading series term x^s / s once the regularized value underflows
    return float(s * math.log(x) - math.log(s) - x)


def log_upper_inc_gamma_int(i: int, x: float) -> float:
    """ln Gamma(i, x) for integer i >= 1, from (i-1)! e^{-x} sum_{k<i} x^k / k!."""
    _check_inc_gamma_args(float(i), x)
    if x == 0:
        return float(special.gammaln(i))
    k = np.arange(i, dtype=np.float64)
    series = special.logsumexp(k * math.log(x) - special.gammaln(k + 1.0))
    return float(special.gammaln(i) - x + series)
