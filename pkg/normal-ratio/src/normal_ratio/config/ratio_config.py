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

from typing import Literal, Optional

from pydantic import Field

from .models import BaseConfig


class RatioConfig(BaseConfig):
    """Numerical defaults for density evaluation, CDFs and sampling"""
    # quadrature oracle
    quad_rel_tol: float = Field(1e-10, ge=1e-13)
    quad_max_panels: int = Field(10_000, ge=50)
    # quasi-Monte Carlo orthant probabilities
    qmc_points: int = Field(1 << 14, ge=64)
    qmc_shifts: int = Field(12, ge=2)
    # sampling
    default_seed: int = Field(42, ge=0, lt=1 << 64)
    mc_samples: int = Field(1_000_000, ge=1)
    sample_stream_rows: int = Field(1 << 16, ge=1)
    workers: int = Field(1, ge=1)
    # density / cdf behaviour
    validity_warn_threshold: float = 1e-3
    central_b_threshold: float = 1e-14
    # validation suite
    validate_tol: float = 1e-8
    validate_cases: int = Field(20, ge=1)
    validate_mc_samples: int = Field(100_000, ge=1)
    # logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_file: Optional[str] = None
