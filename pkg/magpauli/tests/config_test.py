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
import unittest
from unittest import mock

from magpauli.core import config, errors
from magpauli.core.constants import Defaults, RunMode, Tolerance
from magpauli.tests.magpauli_test import MagpauliTest


def _polygon_config(**extra):
    tree = {
        "mode": "polygon",
        "terms": [
            {"kappa": [1, 0], "alpha": 0, "beta": 0},
            {"kappa": [1, 0], "alpha": 0, "beta": 1},
        ],
    }
    tree.update(extra)
    return json.dumps(tree)


class ConfigTest(MagpauliTest):
    def test_shipped_configs_parse(self):
        for name in sorted(os.listdir(os.path.dirname(self.config_path("x")))):
            cfg = config.load_config(self.config_path(name))
            self.assertTrue(RunMode.valid(cfg.mode), name)

    def test_terms(self):
        cfg = config.parse_config(_polygon_config())
        self.assertEqual(cfg.mode, RunMode.Polygon.value)
        self.assertEqual(cfg.get("terms")[1], ("real", 1 + 0j, 0.0, 1.0))
        self.assertEqual(cfg.block("polygon")["oracle_points"], 401)
        self.assertNotIn("polygon", cfg)

    def test_spectral(self):
        cfg = config.load_config(self.config_path("example2.json"))
        block = cfg.get("spectral")
        self.assertEqual(block["k_points"][2], -10j)
        self.assertEqual(block["s"], -1 + 0j)
        self.assertEqual(len(block["divisor"]), 4)

    def test_distinct_points(self):
        text = json.dumps(
            {
                "mode": "genus0",
                "spectral": {
                    "k_points": [[0, 0], [1, 0], [1, 0]],
                    "p_points": [[0, 0], [1, 0], [2, 0]],
                    "divisor": [[3, 0], [4, 0]],
                },
                "grid": {"x0": 0, "y0": 0, "hx": 0.1, "hy": 0.1, "nx": 5, "ny": 5},
            }
        )
        with self.assertRaises(errors.SchemaError) as ctx:
            config.parse_config(text)
        self.assertEqual(ctx.exception.key, "spectral.k_points")
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_parse_error_position(self):
        with self.assertRaises(errors.ParseError) as ctx:
            config.parse_config('{\n  "mode": "polygon",\n  "terms": [\n}')
        self.assertEqual(ctx.exception.line, 4)
        self.assertEqual(ctx.exception.exit_code, 3)
        with self.assertRaises(errors.ParseError) as ctx:
            config.parse_config("")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (1, 1))
        with self.assertRaises(errors.SchemaError):
            config.parse_config("[1, 2]")

    def test_unknown_keys(self):
        text = _polygon_config(colour="red")
        with self.assertRaises(errors.SchemaError) as ctx:
            config.parse_config(text)
        self.assertEqual(ctx.exception.key, "colour")
        with self.assertLogs(level="WARNING"):
            cfg = config.parse_config(text, lenient=True)
        self.assertNotIn("colour", cfg)
        with self.assertRaises(errors.SchemaError):
            config.parse_config(_polygon_config(polygon={"probs": []}))

    def test_required_blocks(self):
        with self.assertRaises(errors.SchemaError) as ctx:
            terms = [{"kappa": 1, "alpha": 1, "beta": 0}]
            config.parse_config(json.dumps({"mode": "flux-scan", "terms": terms}))
        self.assertEqual(ctx.exception.key, "flux")
        with self.assertRaises(errors.SchemaError):
            config.parse_config(json.dumps({"mode": "nonsense"}))
        with self.assertRaises(errors.SchemaError):
            config.parse_config(json.dumps({"terms": []}))

    def test_value_checks(self):
        with self.assertRaises(errors.SchemaError):
            config.parse_config(_polygon_config(flags={"field_sign": 2}))
        with self.assertRaises(errors.SchemaError):
            config.parse_config(_polygon_config(flags={"fd_order": 3}))
        with self.assertRaises(errors.SchemaError):
            config.parse_config(_polygon_config(polygon={"oracle_radius": -1}))
        with self.assertRaises(errors.SchemaError):
            config.parse_config(_polygon_config(polygon={"queries": [[0, True]]}))

    def test_tolerances_and_flags(self):
        cfg = config.parse_config(
            _polygon_config(tolerances={"quad": 1e-8}, flags={"field_sign": 1})
        )
        self.assertEqual(cfg.tolerance("quad"), 1e-8)
        self.assertEqual(cfg.tolerance("NEWTON"), Tolerance.NEWTON)
        self.assertEqual(cfg.field_sign, 1)
        self.assertEqual(cfg.fd_order, Defaults.FD_ORDER)
        self.assertIn("quad", config.tolerance_names())

    def test_exponent_floats(self):
        cfg = config.parse_config('{"mode": "polygon", "terms": [{"kappa": 1e-3, "alpha": 2E+1, "beta": 0}]}')
        self.assertEqual(cfg.get("terms")[0], ("real", 0.001 + 0j, 20.0, 0.0))

    def test_threads(self):
        with mock.patch.dict(os.environ, {Defaults.THREADS_ENV: "3"}):
            self.assertEqual(config.resolve_threads(), 3)
            self.assertEqual(config.resolve_threads(2), 2)
        with mock.patch.dict(os.environ, {Defaults.THREADS_ENV: ""}):
            self.assertEqual(config.resolve_threads(), 1)
        with mock.patch.dict(os.environ, {Defaults.THREADS_ENV: "many"}):
            with self.assertRaises(errors.SchemaError):
                config.resolve_threads()
        with self.assertRaises(errors.SchemaError):
            config.resolve_threads(0)


if __name__ == "__main__":
    unittest.main()
