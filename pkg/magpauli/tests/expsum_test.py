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

import cmath
import os
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from magpauli import expsum, verification
from magpauli.core import errors
from magpauli.core.constants import SignProfile, TermKind
from magpauli.numerics import ComplexLinearForm
from magpauli.tests.magpauli_test import MagpauliTest


class ExpSumTest(MagpauliTest):
    def test_example2_amplitudes(self):
        c = expsum.build_exponential_sum(verification.example2_data())
        const, a, b = verification._amplitudes(c)
        self.assertAlmostEqual(const, 1.0 / 625, places=14)
        self.assertAlmostEqual(a, verification.EXAMPLE2_A, places=13)
        self.assertAlmostEqual(b, verification.EXAMPLE2_B, places=13)
        # 1/625 + A + B = 1
        self.assertComplexAlmostEqual(expsum.eval_c(c, (0.0, 0.0)).value, 1.0, 1e-12)

    def test_example2_reality(self):
        c = expsum.build_exponential_sum(verification.example2_data())
        report = expsum.classify_reality(c)
        self.assertTrue(report.is_real)
        self.assertTrue(report.trigonometric)
        self.assertEqual(report.trig_case, "b")
        self.assertEqual(report.count_after_pairing, 3)
        self.assertTrue(all(l.kind == TermKind.Trigonometric.value for l in report.labels))

    def test_example2_residues(self):
        data = verification.example2_data()
        report = expsum.check_residues(data, s=-1.0)
        self.assertTrue(report.matched)
        self.assertLess(report.max_mismatch, 1e-12)
        fitted = expsum.check_residues(data)
        self.assertComplexAlmostEqual(fitted.s, -1.0, 1e-10)
        self.assertFalse(expsum.check_residues(data, s=1.0).matched)

    def test_psi_at_intersection_points(self):
        data = verification.example2_data()
        point = (0.13, -0.07)
        z = complex(*point)
        for k, p in zip(data.k_points, data.p_points):
            self.assertComplexAlmostEqual(
                expsum.eval_psi_g0(data, k, point), cmath.exp(p * z), 1e-9
            )
        with self.assertRaises(errors.PoleHit):
            expsum.eval_psi_g0(data, 2.0, point)

    def test_invalid_data(self):
        with self.assertRaises(errors.DegenerateData):
            expsum.SpectralDataG0([0, 1, 1], [0, 1, 2], [3, 4])
        with self.assertRaises(errors.DegenerateData):
            expsum.SpectralDataG0([0, 1], [0, 1], [])
        with self.assertRaises(errors.DegenerateData):
            expsum.SpectralDataG0([0, 1], [0, 1], [1])
        with self.assertRaises(errors.EmptySum):
            expsum.ExponentialSum([])

    def test_example1_field(self):
        c = verification.example1_sum()
        self.assertTrue(c.is_real_exponential())
        self.assertAlmostEqual(expsum.magnetic_field(c, 0.0, 0.0), -0.125, places=12)
        self.assertAlmostEqual(expsum.magnetic_field(c, 0.0, 0.0, sign=1), 0.125, places=12)
        # far from the line y = 0 the field decays like e^{-|y|}
        self.assertLess(abs(expsum.magnetic_field(c, 0.0, 40.0)), 1e-15)
        report = expsum.classify_reality(c)
        self.assertEqual(report.sign_profile, SignProfile.AllPositive.value)

    def test_field_at_zero_of_c(self):
        c = expsum.ExponentialSum.from_real([(1.0, 0.0, 0.0), (-1.0, 0.0, 1.0)])
        with self.assertRaises(errors.ZeroOfC):
            expsum.magnetic_field(c, 0.3, 0.0)
        B = expsum.magnetic_field(c, np.array([0.3, 0.3]), np.array([0.0, 1.0]), on_zero="nan")
        self.assertTrue(np.isnan(B[0]))
        self.assertTrue(np.isfinite(B[1]))

    def test_non_real_field(self):
        c = expsum.ExponentialSum.from_real([(1.0, 0.0, 0.0), (1j, 1.0, 0.0)])
        self.assertFalse(expsum.classify_reality(c).is_real)
        with self.assertRaises(errors.NotReal):
            expsum.magnetic_field(c, 0.2, 0.1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
    def test_closed_form_matches_dense_solve(self, n, seed):
        rng = np.random.default_rng(seed)
        roots = np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
        k = roots * (1.0 + 0.2 * rng.uniform(-1, 1, n + 1))
        p = rng.uniform(-2, 2, n + 1) + 1j * rng.uniform(-2, 2, n + 1)
        divisor = 3.0 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
        data = expsum.SpectralDataG0(k, p, divisor)
        closed = np.array(expsum.build_exponential_sum(data, check=False).kappas)
        dense = np.linalg.solve(data.vandermonde(), np.diag(data.theta()))[0]
        scale = max(1.0, float(np.max(np.abs(closed))))
        self.assertLess(float(np.max(np.abs(dense - closed))) / scale, 1e-10)

    def test_psi_normalized_at_origin(self):
        data = verification.example2_data()
        for k in (0.5 + 0.5j, -3.0, 7j, 20.0 - 1j):
            self.assertComplexAlmostEqual(expsum.eval_psi_g0(data, k, (0.0, 0.0)), 1.0, 1e-10)

    def test_field_invariant_under_holomorphic_factor(self):
        gamma, delta, alpha = 0.3 + 0.7j, -0.2 + 0.4j, 2.5 - 1.0j
        x = np.array([0.0, 0.4, -1.1, 1.7])
        y = np.array([0.0, -0.8, 0.6, 1.2])
        for c in (verification.example1_sum(), verification.example3_sum()):
            # e^{γz + δz̄} has p = γ and k = −δ
            other = c.shifted(ComplexLinearForm(gamma, -delta)).scaled(alpha)
            np.testing.assert_allclose(
                expsum.magnetic_field(other, x, y), expsum.magnetic_field(c, x, y), atol=1e-12
            )

    def test_field_matches_finite_difference(self):
        h = 1e-3
        for c in (verification.example3_sum(), verification.closing_example_sum()):
            for x, y in ((0.0, 0.0), (0.7, -0.4), (-1.3, 0.9)):
                X = np.array([x, x + h, x - h, x, x])
                Y = np.array([y, y, y, y + h, y - h])
                log_c, _ = c.log_evaluate(X, Y)
                laplacian = (np.sum(log_c[1:]) - 4.0 * log_c[0]) / h ** 2
                self.assertAlmostEqual(
                    expsum.magnetic_field(c, x, y), -0.5 * laplacian, delta=1e-5
                )

    def test_c_terms_file(self):
        c = expsum.build_exponential_sum(verification.example2_data())
        path = os.path.join(self.out_dir, "c_terms.csv")
        expsum.write_c_terms(path, c)
        back = expsum.read_c_terms(path)
        for point in [(0.0, 0.0), (0.1, -0.2)]:
            self.assertComplexAlmostEqual(
                expsum.eval_c(back, point).value, expsum.eval_c(c, point).value, 1e-15
            )


if __name__ == "__main__":
    unittest.main()
