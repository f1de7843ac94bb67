# Copyright 2021 The Magpauli Authors. All rights reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import shutil
import tempfile
import unittest

import pyaml
import yaml

from magpauli.core.utils import to_plain

_test_data_dir = "test_data"
_configs_dir = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    "configs",
)


class MagpauliTest(unittest.TestCase):
    def setUp(self):
        self.out_dir = tempfile.mkdtemp(prefix="magpauli-test-")

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    @staticmethod
    def config_path(name):
        return os.path.join(_configs_dir, name)

    @staticmethod
    def rounded(x, digits=10):
        # Floats are compared to ``digits`` places so goldens survive
        # last-bit differences between BLAS builds.
        if isinstance(x, dict):
            return {k: MagpauliTest.rounded(v, digits) for k, v in x.items()}
        if isinstance(x, list):
            return [MagpauliTest.rounded(v, digits) for v in x]
        if isinstance(x, float):
            return round(x, digits) + 0.0
        return x

    def assertComplexAlmostEqual(self, first, second, tol=1e-12):
        first, second = complex(first), complex(second)
        self.assertLessEqual(
            abs(first - second),
            tol * max(1.0, abs(second)),
            "%s != %s within %s" % (first, second, tol),
        )

    def check_golden(self, value, expected_fn):
        test_data_dir = os.path.join(os.path.dirname(__file__), _test_data_dir)
        with open(os.path.join(test_data_dir, expected_fn), "r") as f:
            expected = yaml.safe_load(f)
        output = yaml.safe_load(
            pyaml.dump(to_plain(value), string_val_style="plain")
        )

        def dump(x):
            return json.dumps(self.rounded(x), indent=2, sort_keys=True)

        self.maxDiff = None
        self.assertEqual(dump(output), dump(expected))
