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

from dataclasses import dataclass

import numpy as np

from normal_ratio.numerics.linalg import SpdMatrix


@dataclass(frozen=True)
class LinearizedModel:
    """Law of u_i = x_{i+1} - t_i x_1, i = 1..p-1."""

    mean: np.ndarray
    cov: SpdMatrix
    t: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]
