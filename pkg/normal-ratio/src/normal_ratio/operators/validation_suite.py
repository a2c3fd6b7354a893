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

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from normal_ratio.config import ratio_settings
from normal_ratio.operators.cdf_approx import exact_cdf
from normal_ratio.operators.quadrature_oracle import central_cauchy_density, density_by_quadrature, hinkley_density
from normal_ratio.operators.ratio_density import density
from normal_ratio.operators.sampler import empirical_cdf, empirical_cdf_standard_error, sample_ratios
from normal_ratio.structure import NormalRatioModel, RatioPoint
from normal_ratio.utils.decorators import log_time
from normal_ratio.utils.log import log

RANDOM_P = (2, 3, 4, 5)
# oracle accuracy requested from the quadrature check
ORACLE_REL_TOL = 1e-10
# Monte Carlo agreement band, in standard errors
MC_SIGMAS = 3.0
DENSITY_CHECKS = ("quadrature", "hinkley", "cauchy")


class CheckResult(BaseModel):
    name: str
    closed_form: float
    reference: float
    rel_error: float
    bound: float
    passed: bool


class ValidationCase(BaseModel):
    index: int
    p: int
    point: List[float]
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_rel_error(self) -> float:
        """Worst relative error among the density checks."""
        return max((c.rel_error for c in self.checks if c.name in DENSITY_CHECKS), default=0.0)


class ValidationReport(BaseModel):
    seed: int
    tol: float
    mc_samples: int
    cases: List[ValidationCase] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def max_rel_error(self) -> float:
        return max((c.max_rel_error for c in self.cases), default=0.0)

    def summary(self) -> dict:
        return {
            "cases": len(self.cases),
            "failed": sum(not c.passed for c in self.cases),
            "max_rel_error": self.max_rel_error,
            "tol": self.tol,
            "mc_samples": self.mc_samples,
            "passed": self.passed,
        }


def random_spd(p: int, rng: np.random.Generator) -> np.ndarray:
    """Well-conditioned random covariance: A A' / p + I / 2, scaled per coordinate."""
    a = rng.normal(size=(p, p))
    scale = np.exp(rng.uniform(-0.5, 0.5, size=p))
    sigma = a @ a.T / p + 0.5 * np.eye(p)
    sigma = sigma * np.outer(scale, scale)
    return 0.5 * (sigma + sigma.T)


def random_model(p: int, rng: np.random.Generator, central: bool = False) -> NormalRatioModel:
    mu = np.zeros(p) if central else rng.normal(0.0, 1.5, size=p)
    return NormalRatioModel.from_arrays(mu, random_spd(p, rng))


def _is_spherical_central(model: NormalRatioModel) -> bool:
    s = model.sigma.entries
    return model.is_central and np.array_equal(s, s[0, 0] * np.eye(model.p))


def _rel_error(closed_form: float, reference: float) -> float:
    return abs(closed_form - reference) / max(abs(reference), 1e-300)


def _check(name: str, closed_form: float, reference: float, tol: float) -> CheckResult:
    rel_error = _rel_error(closed_form, reference)
    return CheckResult(
        name=name,
        closed_form=closed_form,
        reference=reference,
        rel_error=rel_error,
        bound=tol,
        passed=rel_error < tol,
    )


def mc_check(model: NormalRatioModel, point: RatioPoint, n: int, seed: int) -> CheckResult:
    """Pr(Y < point) from exact_cdf against the empirical fraction of n seeded draws.

    Passes when the two differ by at most MC_SIGMAS standard errors plus the
    orthant error estimate. `bound` holds that allowance as an absolute difference.
    """
    exact = exact_cdf(model, point.y, seed=seed)
    batch = sample_ratios(model, n, seed=seed)
    empirical = empirical_cdf(batch, point.y)
    se = max(empirical_cdf_standard_error(exact.value, batch.n), 1.0 / batch.n)
    bound = MC_SIGMAS * se + exact.error_estimate
    return CheckResult(
        name="mc",
        closed_form=exact.value,
        reference=empirical,
        rel_error=_rel_error(exact.value, empirical),
        bound=bound,
        passed=abs(exact.value - empirical) <= bound,
    )


def validate_point(
    model: NormalRatioModel,
    point: RatioPoint,
    tol: float,
    index: int = 0,
    mc_samples: Optional[int] = None,
    mc_seed: Optional[int] = None,
) -> ValidationCase:
    value = density(model, point)
    case = ValidationCase(index=index, p=model.p, point=point.y.tolist())
    oracle = density_by_quadrature(model, point, rel_tol=ORACLE_REL_TOL)
    case.checks.append(_check("quadrature", value, oracle.value, tol))
    if model.p == 2:
        case.checks.append(_check("hinkley", value, hinkley_density(model, point), tol))
    if _is_spherical_central(model):
        case.checks.append(_check("cauchy", value, central_cauchy_density(model.p, point.y), tol))
    mc_samples = mc_samples or ratio_settings.validate_mc_samples
    mc_seed = ratio_settings.default_seed if mc_seed is None else mc_seed
    case.checks.append(mc_check(model, point, mc_samples, mc_seed))
    return case


@log_time("validation suite")
def run_validation(
    model: Optional[NormalRatioModel] = None,
    cases: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    mc_samples: Optional[int] = None,
) -> ValidationReport:
    """Compare closed-form densities with independent oracles.

    With a model, `cases` random points are drawn for it; without one each
    case draws a fresh random model with p in 2..5. Every case also compares
    exact_cdf at its point with a Monte Carlo estimate from `mc_samples` draws.
    Failures are recorded in the report, never raised.
    """
    cases = cases or ratio_settings.validate_cases
    seed = ratio_settings.default_seed if seed is None else seed
    tol = ratio_settings.validate_tol if tol is None else tol
    mc_samples = mc_samples or ratio_settings.validate_mc_samples
    rng = np.random.Generator(np.random.Philox(seed))
    report = ValidationReport(seed=seed, tol=tol, mc_samples=mc_samples)

    for i in range(cases):
        case_model = model if model is not None else random_model(int(rng.choice(RANDOM_P)), rng)
        point = RatioPoint(rng.normal(0.0, 2.0, size=case_model.ratio_dim))
        mc_seed = int(rng.integers(0, 1 << 62))
        case = validate_point(case_model, point, tol, index=i, mc_samples=mc_samples, mc_seed=mc_seed)
        if not case.passed:
            log.info("Case %d (p=%d) failed: max relative error %.3g", i, case.p, case.max_rel_error)
        report.cases.append(case)
    log.info("Validation: %d/%d cases passed", sum(c.passed for c in report.cases), len(report.cases))
    return report
