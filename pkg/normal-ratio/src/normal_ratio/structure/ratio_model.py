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

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from normal_ratio.numerics.linalg import SpdMatrix, factorize, log_det, whiten
from normal_ratio.utils.exceptions import DimensionMismatchError, NonFiniteInputError


def _frozen_vector(values, name: str) -> np.ndarray:
    vec = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(vec)):
        raise NonFiniteInputError(f"{name} has non-finite entries: {vec.tolist()}")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True)
class NormalRatioModel:
    """X ~ N(mu, sigma); the model describes Y = (x2/x1, ..., xp/x1)."""

    mu: np.ndarray
    sigma: SpdMatrix
    # L^{-1} mu and ln|sigma|, reused by every point evaluation
    whitened_mu: np.ndarray = field(init=False, repr=False, compare=False)
    log_det_sigma: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu = _frozen_vector(self.mu, "mu")
        object.__setattr__(self, "mu", mu)
        if mu.shape[0] < 2:
            raise DimensionMismatchError(f"dimension p must be at least 2, got {mu.shape[0]}")
        if self.sigma.dim != mu.shape[0]:
            raise DimensionMismatchError(f"mu has length {mu.shape[0]} but sigma is {self.sigma.dim}x{self.sigma.dim}")
        whitened = whiten(self.sigma, mu)
        whitened.setflags(write=False)
        object.__setattr__(self, "whitened_mu", whitened)
        object.__setattr__(self, "log_det_sigma", log_det(self.sigma))

    @classmethod
    def from_arrays(cls, mu: Sequence[float], sigma: Union[np.ndarray, Sequence[Sequence[float]]]) -> "NormalRatioModel":
        return cls(mu=np.asarray(mu, dtype=np.float64), sigma=factorize(sigma))

    @property
    def p(self) -> int:
        return self.mu.shape[0]

    @property
    def ratio_dim(self) -> int:
        return self.p - 1

    @property
    def is_central(self) -> bool:
        return not np.any(self.mu)

    def scaled(self, c: float) -> "NormalRatioModel":
        """(c mu, c^2 sigma); leaves the law of Y unchanged for c > 0."""
        return NormalRatioModel.from_arrays(c * self.mu, (c * c) * self.sigma.entries)

    def reflected(self) -> "NormalRatioModel":
        """Law of -X, which has the same ratios."""
        return NormalRatioModel(mu=-self.mu, sigma=self.sigma)

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.entries.tolist()}


@dataclass(frozen=True)
class RatioPoint:
    """An evaluation point y of Y; W' = (1, y1, ..., y_{p-1})."""

    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", _frozen_vector(self.y, "y"))

    @property
    def dim(self) -> int:
        return self.y.shape[0]

    @property
    def w(self) -> np.ndarray:
        return np.concatenate(([1.0], self.y))


@dataclass(frozen=True)
class Intermediates:
    """Per-point scalars of the z-integral: exponent -1/2 M[(z - b)^2 + a] + 1/2."""

    w: np.ndarray
    m_q: float
    k_l: float
    l_q: float
    a_s: float
    b_c: float
    log_c: float

    @property
    def cutoff(self) -> float:
        """|b| / a, the truncation point of the even-p moments."""
        return abs(self.b_c) / self.a_s
