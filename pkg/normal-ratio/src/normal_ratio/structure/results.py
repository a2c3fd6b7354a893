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

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Optional

import numpy as np


class MvnMethod(str, Enum):
    """How an orthant probability was computed."""

    UNIVARIATE = "univariate"
    BIVARIATE = "bivariate"
    QMC = "qmc"


@dataclass(frozen=True)
class MvnProbability:
    value: float
    error_estimate: float
    method: MvnMethod

    def to_dict(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate, "method": self.method.value}


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool
    # ln(value); stays finite where value underflows
    log_value: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DensityHistogram:
    """Bin counts normalized by n * bin volume."""

    edges: tuple
    density: np.ndarray
    counts: np.ndarray
    n: int

    @property
    def bin_volume(self) -> float:
        return float(np.prod([e[1] - e[0] for e in self.edges]))

    @property
    def centers(self) -> tuple:
        return tuple(0.5 * (e[:-1] + e[1:]) for e in self.edges)
