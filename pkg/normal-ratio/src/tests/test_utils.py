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

import os
from typing import Optional

import numpy as np

from normal_ratio.config import resource_path
from normal_ratio.structure import NormalRatioModel


def example_path(name: str) -> str:
    """Path of a bundled example model, e.g. example_path("central_2d")."""
    return os.path.join(resource_path, "examples", f"{name}.json")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# Random covariance: A A' + eps I with a spread of scales
def random_spd(p: int, rng: np.random.Generator, eps: float = 0.3) -> np.ndarray:
    a = rng.normal(size=(p, p))
    sigma = a @ a.T + eps * np.eye(p)
    return 0.5 * (sigma + sigma.T)


def random_model(p: int, rng: np.random.Generator, mu_scale: float = 1.5, central: bool = False) -> NormalRatioModel:
    mu = np.zeros(p) if central else rng.normal(0.0, mu_scale, size=p)
    return NormalRatioModel.from_arrays(mu, random_spd(p, rng))


def identity_model(p: int, mu: Optional[np.ndarray] = None) -> NormalRatioModel:
    return NormalRatioModel.from_arrays(np.zeros(p) if mu is None else mu, np.eye(p))


def rel_err(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)
