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
import tempfile
import unittest
from unittest import mock

from dotenv import dotenv_values
from pydantic import ValidationError

from normal_ratio.config import RatioConfig, ratio_settings, resource_path
from normal_ratio.config.models import base_config


class TestRatioConfig(unittest.TestCase):
    def test_defaults(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            config = RatioConfig()
        self.assertEqual(config.quad_rel_tol, 1e-10)
        self.assertEqual(config.qmc_points, 16384)
        self.assertEqual(config.qmc_shifts, 12)
        self.assertEqual(config.default_seed, 42)
        self.assertEqual(config.sample_stream_rows, 65536)
        self.assertEqual(config.central_b_threshold, 1e-14)
        self.assertIsNone(config.log_file)

    def test_environment_override(self):
        env = {"NORMAL_RATIO_QMC_POINTS": "4096", "normal_ratio_workers": "3", "NORMAL_RATIO_LOG_LEVEL": "DEBUG"}
        with mock.patch.dict(os.environ, env, clear=True):
            config = RatioConfig()
        self.assertEqual(config.qmc_points, 4096)
        self.assertEqual(config.workers, 3)
        self.assertEqual(config.log_level, "DEBUG")

    def test_rejects_out_of_range(self):
        with mock.patch.dict(os.environ, {"NORMAL_RATIO_QUAD_REL_TOL": "1e-20"}, clear=True):
            with self.assertRaises(ValidationError):
                RatioConfig()
        with self.assertRaises(ValidationError):
            RatioConfig(log_level="LOUD")
        with self.assertRaises(ValidationError):
            RatioConfig(default_seed=1 << 64)

    def test_singleton_and_resources(self):
        self.assertIsInstance(ratio_settings, RatioConfig)
        self.assertTrue(os.path.isdir(os.path.join(resource_path, "examples")))


class TestEnvFile(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.env_path = os.path.join(self.tmp.name, ".env")
        patcher = mock.patch.object(base_config, "env_path", self.env_path)
        patcher.start()
        self.addCleanup(patcher.stop)
        self.addCleanup(self.tmp.cleanup)

    def test_generate_then_update(self):
        RatioConfig(workers=3).generate_env()
        values = dotenv_values(self.env_path)
        self.assertEqual(values["NORMAL_RATIO_WORKERS"], "3")
        self.assertEqual(values["NORMAL_RATIO_LOG_FILE"], "")

        # an existing file is merged instead of overwritten
        RatioConfig(workers=5).generate_env()
        self.assertEqual(dotenv_values(self.env_path)["NORMAL_RATIO_WORKERS"], "5")

    def test_update_adds_missing_keys(self):
        with open(self.env_path, "w", encoding="utf-8") as f:
            f.write("NORMAL_RATIO_SEED_UNUSED=1\n")
        RatioConfig().update_env()
        values = dotenv_values(self.env_path)
        self.assertEqual(values["NORMAL_RATIO_DEFAULT_SEED"], "42")
        self.assertEqual(values["NORMAL_RATIO_SEED_UNUSED"], "1")


if __name__ == "__main__":
    unittest.main()
