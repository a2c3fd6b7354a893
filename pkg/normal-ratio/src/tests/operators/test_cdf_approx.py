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

import unittest

import numpy as np
import pytest

from normal_ratio.operators.cdf_approx import approx_cdf, exact_cdf, linearize, validity_diagnostic
from normal_ratio.operators.mvn_cdf import std_normal_cdf
from normal_ratio.operators.sampler import empirical_cdf, empirical_cdf_standard_error, sample_ratios
from normal_ratio.structure import MvnMethod, NormalRatioModel
from normal_ratio.utils.exceptions import DimensionMismatchError, NonFiniteInputError
from src.tests.test_utils import identity_model, make_rng, random_model


def _unit_correlated(p: int, rho: float) -> np.ndarray:
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


LINEARIZED_EXAMPLE = NormalRatioModel.from_arrays([10.0, 0.0, 0.0], _unit_correlated(3, 0.5))


class TestLinearize(unittest.TestCase):
    def test_worked_example(self):
        """u = (x2 - 2 x1, x3 - 3 x1) with unit variances and correlations 1/2."""
        lin = linearize(LINEARIZED_EXAMPLE, [2.0, 3.0])
        np.testing.assert_array_equal(lin.mean, [-20.0, -30.0])
        np.testing.assert_array_equal(lin.cov.entries, [[3.0, 4.0], [4.0, 7.0]])
        np.testing.assert_array_equal(lin.t, [2.0, 3.0])
        self.assertEqual(lin.dim, 2)

    def test_zero_threshold(self):
        rng = make_rng(81)
        model = random_model(4, rng)
        lin = linearize(model, np.zeros(3))
        np.testing.assert_array_equal(lin.mean, model.mu[1:])
        np.testing.assert_array_equal(lin.cov.entries, model.sigma.entries[1:, 1:])

    def test_commutes_with_mean_shift(self):
        """Shifting mu by delta shifts the mean by delta[1:] - t * delta[0]; the covariance stays."""
        sigma = [[1.0, 0.25, -0.5], [0.25, 2.0, 0.75], [-0.5, 0.75, 1.5]]
        mu = np.array([1.5, -0.25, 2.0])
        delta = np.array([0.5, 1.25, -0.75])
        t = np.array([0.5, -2.0])
        base = linearize(NormalRatioModel.from_arrays(mu, sigma), t)
        shifted = linearize(NormalRatioModel.from_arrays(mu + delta, sigma), t)
        np.testing.assert_array_equal(shifted.mean, base.mean + (delta[1:] - t * delta[0]))
        np.testing.assert_array_equal(shifted.cov.entries, base.cov.entries)

    def test_affine_in_threshold(self):
        model = NormalRatioModel.from_arrays([2.0, -0.5, 1.0], _unit_correlated(3, 0.25))
        t, t_other = np.array([0.5, 1.5]), np.array([-1.0, 0.25])
        lin, lin_other = linearize(model, t), linearize(model, t_other)
        np.testing.assert_array_equal(lin_other.mean - lin.mean, -(t_other - t) * model.mu[0])

    def test_matches_transformed_samples(self):
        model = NormalRatioModel.from_arrays([1.0, -0.5, 2.0], [[1.0, 0.3, -0.2], [0.3, 2.0, 0.4], [-0.2, 0.4, 1.5]])
        t = np.array([0.7, -1.2])
        lin = linearize(model, t)
        rng = make_rng(82)
        x = rng.multivariate_normal(model.mu, model.sigma.entries, size=200_000)
        u = x[:, 1:] - x[:, :1] * t
        np.testing.assert_allclose(u.mean(axis=0), lin.mean, atol=0.02)
        np.testing.assert_allclose(np.cov(u, rowvar=False), lin.cov.entries, atol=0.03)

    def test_bad_threshold(self):
        with self.assertRaises(DimensionMismatchError):
            linearize(LINEARIZED_EXAMPLE, [1.0])
        with self.assertRaises(NonFiniteInputError):
            linearize(LINEARIZED_EXAMPLE, [1.0, float("nan")])


class TestValidityDiagnostic(unittest.TestCase):
    def test_values(self):
        self.assertEqual(validity_diagnostic(identity_model(2)), 0.5)
        self.assertEqual(validity_diagnostic(LINEARIZED_EXAMPLE), std_normal_cdf(-10.0))
        model = NormalRatioModel.from_arrays([2.0, 0.0], [[4.0, 0.0], [0.0, 1.0]])
        self.assertEqual(validity_diagnostic(model), std_normal_cdf(-1.0))


class TestCdf(unittest.TestCase):
    def test_central_median(self):
        """Both methods give exactly 1/2 at t = 0 for the standard Cauchy."""
        self.assertEqual(approx_cdf(identity_model(2), [0.0]).value, 0.5)
        self.assertEqual(exact_cdf(identity_model(2), [0.0]).value, 0.5)

    def test_worked_example_is_nearly_certain(self):
        approx = approx_cdf(LINEARIZED_EXAMPLE, [2.0, 3.0])
        exact = exact_cdf(LINEARIZED_EXAMPLE, [2.0, 3.0])
        self.assertEqual(approx.method, MvnMethod.BIVARIATE)
        self.assertAlmostEqual(approx.value, 1.0, places=12)
        slack = validity_diagnostic(LINEARIZED_EXAMPLE) + 3.0 * exact.error_estimate + 1e-12
        self.assertLessEqual(abs(exact.value - approx.value), slack)

    def test_warns_when_denominator_may_be_negative(self):
        with self.assertLogs("normal_ratio", level="WARNING") as logs:
            approx_cdf(identity_model(2, np.array([0.5, 0.0])), [0.3])
        self.assertTrue(any("P(x1 <= 0)" in line for line in logs.output))

    def test_approximation_bound(self):
        """|approx - exact| <= P(x1 <= 0) + both error estimates."""
        rng = make_rng(83)
        for _ in range(30):
            p = int(rng.integers(2, 7))
            model = random_model(p, rng)
            t = rng.normal(0.0, 1.5, size=p - 1)
            approx = approx_cdf(model, t, seed=5)
            exact = exact_cdf(model, t, seed=5)
            slack = validity_diagnostic(model) + approx.error_estimate + exact.error_estimate + 1e-12
            self.assertLessEqual(abs(approx.value - exact.value), slack, msg=f"p={p}")
            self.assertTrue(0.0 <= exact.value <= 1.0)

    def test_exact_monotone_in_each_threshold(self):
        rng = make_rng(85)
        for p in (2, 3):
            for _ in range(5):
                model = random_model(p, rng)
                base = rng.normal(size=p - 1)
                for j in range(p - 1):
                    previous = None
                    for step in (-2.0, -1.0, 0.0, 1.0, 2.0):
                        t = base.copy()
                        t[j] += step
                        current = exact_cdf(model, t, seed=10)
                        if previous is not None:
                            slack = previous.error_estimate + current.error_estimate + 1e-12
                            self.assertGreaterEqual(current.value, previous.value - slack, msg=f"p={p} j={j}")
                        previous = current

    def test_far_denominator_limit(self):
        """With mu1 = 50 sigma1 the two methods coincide."""
        model = NormalRatioModel.from_arrays([50.0, 10.0, -5.0], [[1.0, 0.2, 0.1], [0.2, 1.0, 0.3], [0.1, 0.3, 1.0]])
        t = [0.3, -0.05]
        approx = approx_cdf(model, t, seed=6)
        exact = exact_cdf(model, t, seed=6)
        self.assertLessEqual(abs(approx.value - exact.value), 1e-12 + approx.error_estimate + exact.error_estimate)

    def test_exact_against_monte_carlo(self):
        model = identity_model(2, np.array([1.0, 1.0]))
        exact = exact_cdf(model, [1.0])
        batch = sample_ratios(model, 1_000_000, seed=7)
        q = empirical_cdf(batch, [1.0])
        self.assertLess(abs(exact.value - q), 3.0 * empirical_cdf_standard_error(q, batch.n))

    def test_exact_against_monte_carlo_trivariate(self):
        model = NormalRatioModel.from_arrays([0.8, 0.5, -0.3], [[1.0, 0.3, 0.1], [0.3, 1.2, -0.2], [0.1, -0.2, 0.9]])
        t = [0.4, 0.2]
        exact = exact_cdf(model, t, seed=8)
        batch = sample_ratios(model, 1_000_000, seed=8)
        q = empirical_cdf(batch, t)
        self.assertLess(abs(exact.value - q), 3.0 * empirical_cdf_standard_error(q, batch.n) + exact.error_estimate)

    @pytest.mark.slow
    def test_exact_against_monte_carlo_sweep(self):
        rng = make_rng(84)
        for _ in range(20):
            p = int(rng.integers(2, 5))
            model = random_model(p, rng)
            t = rng.normal(0.0, 1.0, size=p - 1)
            exact = exact_cdf(model, t, seed=9)
            batch = sample_ratios(model, 1_000_000, seed=int(rng.integers(0, 1 << 32)))
            q = empirical_cdf(batch, t)
            bound = 3.0 * max(empirical_cdf_standard_error(q, batch.n), 1e-6) + exact.error_estimate
            self.assertLess(abs(exact.value - q), bound, msg=f"p={p}")


if __name__ == "__main__":
    unittest.main()
