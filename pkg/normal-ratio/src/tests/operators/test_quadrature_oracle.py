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

import math
import unittest

import numpy as np
import pytest

from normal_ratio.operators.quadrature_oracle import (
    central_cauchy_density,
    density_by_quadrature,
    hinkley_density,
    normalization_check,
)
from normal_ratio.operators.ratio_density import log_density
from normal_ratio.structure import NormalRatioModel, RatioPoint
from normal_ratio.utils.exceptions import DimensionMismatchError, NotConvergedError
from src.tests.test_utils import identity_model, make_rng, random_model, rel_err


class TestDensityByQuadrature(unittest.TestCase):
    def test_cauchy(self):
        for y in (-3.0, 0.0, 0.3, 12.0):
            result = density_by_quadrature(identity_model(2), RatioPoint([y]), rel_tol=1e-12)
            self.assertTrue(result.converged)
            self.assertLess(rel_err(result.value, 1.0 / (math.pi * (1.0 + y * y))), 1e-10)
            self.assertGreater(result.evaluations, 0)

    def test_central_three_dimensional(self):
        result = density_by_quadrature(identity_model(3), RatioPoint([0.0, 0.0]))
        self.assertLess(rel_err(result.value, 1.0 / (2.0 * math.pi)), 1e-9)

    def test_halving_tolerance_stays_within_error(self):
        rng = make_rng(63)
        for _ in range(50):
            p = int(rng.integers(2, 6))
            model = random_model(p, rng)
            point = RatioPoint(rng.normal(size=p - 1))
            coarse = density_by_quadrature(model, point, rel_tol=1e-8)
            fine = density_by_quadrature(model, point, rel_tol=5e-9)
            # slack for the rescaling of the max-shifted integral
            self.assertLessEqual(abs(fine.value - coarse.value), coarse.abs_error_estimate + 1e-14 * coarse.value)

    def test_log_value_survives_underflow(self):
        model = identity_model(2, np.array([50.0, 0.0]))
        point = RatioPoint([1e8])
        result = density_by_quadrature(model, point)
        self.assertEqual(result.value, 0.0)
        self.assertTrue(math.isfinite(result.log_value))
        self.assertLess(abs(result.log_value - log_density(model, point)), 1e-7)

    def test_not_converged_flag(self):
        """One panel per piece cannot reach 1e-13 on the compactified tails."""
        model = NormalRatioModel.from_arrays([3.0, 1.0, -2.0, 0.5, 1.0, 2.0], np.eye(6))
        point = RatioPoint([0.4, -0.3, 1.0, 0.2, -1.5])
        result = density_by_quadrature(model, point, rel_tol=1e-13, max_panels=1)
        self.assertFalse(result.converged)
        self.assertGreater(result.value, 0.0)
        with self.assertRaises(NotConvergedError):
            density_by_quadrature(model, point, rel_tol=1e-13, max_panels=1, strict=True)

    def test_rel_tol_floor(self):
        with self.assertRaises(ValueError):
            density_by_quadrature(identity_model(2), RatioPoint([0.0]), rel_tol=1e-15)


class TestNormalization(unittest.TestCase):
    def test_two_dimensional(self):
        rng = make_rng(61)
        models = [random_model(2, rng) for _ in range(5)]
        models.append(identity_model(2))
        models.append(identity_model(2, np.array([2.0, 1.0])))
        for model in models:
            result = normalization_check(model, rel_tol=1e-10)
            self.assertTrue(result.converged)
            self.assertLess(abs(result.value - 1.0), 1e-8)

    def test_concentrated_model(self):
        """A denominator far from zero puts nearly all mass near mu2 / mu1."""
        model = NormalRatioModel.from_arrays([20.0, 10.0], [[1.0, 0.3], [0.3, 0.5]])
        result = normalization_check(model, rel_tol=1e-10)
        self.assertLess(abs(result.value - 1.0), 1e-8)

    @pytest.mark.slow
    def test_three_dimensional(self):
        rng = make_rng(64)
        for _ in range(3):
            result = normalization_check(random_model(3, rng), rel_tol=1e-8)
            self.assertLess(abs(result.value - 1.0), 1e-6)

    def test_unsupported_dimension(self):
        with self.assertRaises(DimensionMismatchError):
            normalization_check(identity_model(4))


class TestReferenceDensities(unittest.TestCase):
    def test_central_cauchy(self):
        self.assertAlmostEqual(central_cauchy_density(2, [0.0]), 1.0 / math.pi, places=15)
        self.assertAlmostEqual(central_cauchy_density(3, [0.0, 0.0]), 1.0 / (2.0 * math.pi), places=15)
        self.assertAlmostEqual(central_cauchy_density(2, [1.0]), 0.5 / math.pi, places=15)
        with self.assertRaises(DimensionMismatchError):
            central_cauchy_density(3, [1.0])

    def test_hinkley_matches_quadrature(self):
        rng = make_rng(62)
        for _ in range(20):
            model = random_model(2, rng)
            point = RatioPoint([rng.normal(0.0, 2.0)])
            oracle = density_by_quadrature(model, point, rel_tol=1e-11)
            self.assertLess(rel_err(hinkley_density(model, point), oracle.value), 1e-9)

    def test_hinkley_central(self):
        self.assertAlmostEqual(hinkley_density(identity_model(2), RatioPoint([0.0])), 1.0 / math.pi, places=14)

    def test_hinkley_needs_two_dimensions(self):
        with self.assertRaises(DimensionMismatchError):
            hinkley_density(identity_model(3), RatioPoint([0.0, 0.0]))


if __name__ == "__main__":
    unittest.main()
