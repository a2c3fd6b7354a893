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


@dataclass(frozen=True)
class SampleBatch:
    """Ratio samples, one row per retained draw of X."""

    ratios: np.ndarray
    seed: int
    redraws: int = 0

    def __post_init__(self):
        ratios = np.array(self.ratios, dtype=np.float64, ndmin=2)
        ratios.setflags(write=False)
        object.__setattr__(self, "ratios", ratios)

    @property
    def n(self) -> int:
        return self.ratios.shape[0]

    @property
    def ratio_dim(self) -> int:
        return self.ratios.shape[1]
