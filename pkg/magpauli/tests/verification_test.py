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

import unittest

import numpy as np

from magpauli import growth, verification
from magpauli.core.constants import Defaults, Membership, Suite
from magpauli.tests.magpauli_test import MagpauliTest


class VerificationTest(MagpauliTest):
    def check_suite(self, suite):
        checks = verification.run_suite(suite)
        self.assertTrue(checks)
        failed = [c for c in checks if not c.passed]
        self.assertEqual(failed, [], verification.format_report(failed))
        self.assertTrue(all(c.suite == suite for c in checks))
        return checks

    def test_genus0_suite(self):
        checks = {c.name: c for c in self.check_suite(Suite.Genus0.value)}
        self.assertTrue(checks["example3_membership_oracle"].detail.startswith("25 points"))
        groups = checks["zero_mode_richardson"].detail.split("; ")
        self.assertEqual(
            [g.split(":")[0] for g in groups],
            ["example1", "example2", "example3", "random1", "random2"],
        )
        for g in groups:
            ratios = [float(r) for r in g.split(":")[1].split()]
            self.assertEqual(len(ratios), 5)
            self.assertTrue(all(3.5 <= r <= 4.5 for r in ratios), g)

    def test_flux_suite(self):
        self.check_suite(Suite.Flux.value)

    def test_genus1_suite(self):
        checks = {c.name: c for c in self.check_suite(Suite.Genus1.value)}
        self.assertEqual(Defaults.UNITARIZE_SAMPLES, 100)
        self.assertEqual(checks["unitarized_multipliers"].detail, "100 random p")

    def test_richardson_cases(self):
        cases = verification.richardson_cases()
        self.assertEqual(len(cases), 5)
        for name, c, gauges, _ in cases:
            self.assertEqual(len(gauges), 5, name)
            profile = growth.polygon_T(growth.positive_forms(c))
            expected = {
                "example1": Membership.Boundary.value,
                "example2": None,
            }.get(name, Membership.Interior.value)
            if expected is None:
                continue
            for W in gauges:
                self.assertEqual(profile.membership(W), expected, (name, W))
        self.assertTrue(cases[3][1].is_real_exponential())
        self.assertGreater(min(cases[3][1].kappas.real), 0.0)

    def test_oracle_points_leave_the_boundary(self):
        c = verification.example3_sum()
        polygon = growth.polygon_T(growth.positive_forms(c)).polygon
        for W in ([0.0, -1.0], [-0.5, -0.5], [1.05, 1.0], [-1.02, 0.0]):
            moved = verification._off_boundary(polygon, np.array(W))
            self.assertGreaterEqual(verification._distance_to_boundary(polygon, moved), 0.1)
        inside = verification._off_boundary(polygon, np.array([-0.5, -0.45]))
        self.assertEqual(polygon.membership(tuple(inside)), Membership.Interior.value)
        outside = verification._off_boundary(polygon, np.array([1.05, 1.0]))
        self.assertEqual(polygon.membership(tuple(outside)), Membership.Exterior.value)

    def test_format_report(self):
        checks = [
            verification.Check("flux", "q_log", 1e-14, 1e-10, True, ""),
            verification.Check("flux", "decay", 0.5, 0.1, False, "R = 40"),
        ]
        text = verification.format_report(checks)
        lines = text.splitlines()
        self.assertEqual(len(lines), 3)
        self.assertIn("PASS", lines[0])
        self.assertIn("FAIL", lines[1])
        self.assertTrue(lines[1].endswith("R = 40"))
        self.assertEqual(lines[-1], "2 checks, 1 failed")

    def test_unknown_suite(self):
        with self.assertRaises(ValueError):
            verification.run_suite("genus2")

    def test_richardson_ratio(self):
        # second-order stencil on c = 1 + e^y in its minimal gauge
        ratio = verification.richardson_ratio(verification.example1_sum(), (0.0, -0.5))
        self.assertAlmostEqual(ratio, 4.0, delta=0.5)


if __name__ == "__main__":
    unittest.main()
