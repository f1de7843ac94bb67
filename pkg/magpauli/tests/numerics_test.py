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

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from magpauli import numerics
from magpauli.core import errors
from magpauli.core.constants import Sector


class NumericsTest(unittest.TestCase):
    def test_complex_linear_form(self):
        form = numerics.ComplexLinearForm.from_real(2.0, -3.0)
        self.assertAlmostEqual(form.alpha, 2.0)
        self.assertAlmostEqual(form.beta, -3.0)
        value = form(0.5, 0.25)
        self.assertAlmostEqual(value.real, 2.0 * 0.5 - 3.0 * 0.25)
        self.assertAlmostEqual(value.imag, 0.0)

    def test_grid(self):
        grid = numerics.Grid2D(-1.0, 0.0, 0.5, 0.25, 5, 3)
        X, Y = grid.mesh()
        self.assertEqual(X.shape, (3, 5))
        self.assertEqual(X[0, -1], 1.0)
        self.assertEqual(Y[-1, 0], 0.5)
        self.assertEqual(grid.mesh(pad=2)[0].shape, (7, 9))
        with self.assertRaises(ValueError):
            numerics.Grid2D(0, 0, 0.0, 1.0, 3, 3)

    def test_logsum_overflow(self):
        terms = [(1.0, numerics.ComplexLinearForm.from_real(1.0, 0.0))]
        result = numerics.logsum_eval(terms, (1000.0, 0.0))
        self.assertAlmostEqual(result.log_magnitude, 1000.0)
        self.assertIsNone(result.value)
        self.assertFalse(result.cancelled)

    def test_logsum_cancellation(self):
        terms = [
            (1.0, numerics.ComplexLinearForm.from_real(0.0, 0.0)),
            (-1.0, numerics.ComplexLinearForm.from_real(0.0, 1.0)),
        ]
        self.assertTrue(numerics.logsum_eval(terms, (0.3, 0.0)).cancelled)
        self.assertFalse(numerics.logsum_eval(terms, (0.3, 1.0)).cancelled)
        with self.assertRaises(ValueError):
            numerics.logsum_eval(terms, (float("nan"), 0.0))

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(-30, 30),
        st.floats(-30, 30),
        st.floats(-3, 3),
        st.floats(-3, 3),
    )
    def test_logsum_matches_direct_sum(self, x, y, a, b):
        terms = [
            (2.0, numerics.ComplexLinearForm.from_real(a, b)),
            (0.5, numerics.ComplexLinearForm.from_real(-b, a)),
        ]
        direct = 2.0 * math.exp(a * x + b * y) + 0.5 * math.exp(-b * x + a * y)
        result = numerics.logsum_eval(terms, (x, y))
        self.assertAlmostEqual(result.log_magnitude, math.log(direct), places=9)

    def test_fd_pauli_zero_mode(self):
        # Phi = (x^2 + y^2)/4 has Delta Phi = 1; e^{-Phi} solves L_- = 0
        # in the gauge used by fd_apply_pauli.
        def Phi(X, Y):
            return (X ** 2 + Y ** 2) / 4.0

        def psi(X, Y):
            return np.exp(-Phi(X, Y))

        norms = []
        for h in (0.02, 0.01):
            n = int(round(0.2 / h)) + 1
            grid = numerics.Grid2D(-0.1, -0.1, h, h, n, n)
            norms.append(np.max(np.abs(numerics.fd_apply_pauli(Phi, psi, Sector.Minus.value, grid))))
        self.assertLess(norms[1], 1e-3)
        self.assertGreater(norms[0] / norms[1], 3.5)

    def test_fd_grid_too_small(self):
        grid = numerics.Grid2D(0, 0, 0.1, 0.1, 4, 4)
        with self.assertRaises(errors.GridTooSmall):
            numerics.fd_apply_pauli(lambda X, Y: X, lambda X, Y: Y, "+", grid)
        with self.assertRaises(ValueError):
            numerics.fd_apply_pauli(
                lambda X, Y: X, lambda X, Y: Y, "x", numerics.Grid2D(0, 0, 0.1, 0.1, 5, 5)
            )

    def test_quad(self):
        result = numerics.quad_adaptive_1d(math.sin, 0.0, math.pi)
        self.assertAlmostEqual(result.value, 2.0, places=10)
        tail = numerics.quad_adaptive_1d(lambda w: math.exp(-w), 0.0, np.inf)
        self.assertAlmostEqual(tail.value, 1.0, places=9)
        with self.assertRaises(ValueError):
            numerics.quad_adaptive_1d(math.sin, 0.0, 1.0, tol=0.0)

    def test_quad_disk(self):
        result = numerics.quad_disk(lambda x, y: 1.0, 2.0, tol=1e-9)
        self.assertAlmostEqual(result.value, 4.0 * math.pi, places=7)

    def test_newton(self):
        result = numerics.newton_solve(lambda x: np.array([x[0] ** 2 - 2.0, x[1] - 1.0]), [1.0, 0.0])
        self.assertAlmostEqual(result.x[0], math.sqrt(2.0), places=10)
        self.assertLessEqual(result.residual, 1e-12)
        with self.assertRaises(errors.SingularJacobian):
            numerics.newton_solve(lambda x: np.array([x[0] + x[1] - 1.0, x[0] + x[1] - 2.0]), [0.0, 0.0])

    def test_winding_number(self):
        self.assertEqual(numerics.winding_number(lambda z: z - 0.1j, -1, -1, 2, 2), 1)
        self.assertEqual(numerics.winding_number(lambda z: (z - 0.2) * (z + 0.3), -1, -1, 2, 2), 2)
        self.assertEqual(numerics.winding_number(lambda z: 1.0 / z, -1, -1, 2, 2), -1)
        with self.assertRaises(errors.ZeroOnBoundary):
            numerics.winding_number(lambda z: z + 1.0, -1, -1, 2, 2)

    def test_series_reciprocal(self):
        # 1/(1 - w) = 1 + w + w^2 + ...
        out = numerics.series_reciprocal([1.0, -1.0], 4)
        np.testing.assert_allclose(out, np.ones(5))
        with self.assertRaises(ZeroDivisionError):
            numerics.series_reciprocal([0.0, 1.0], 2)

    def test_lagrange_inversion(self):
        # t = z + z^2 inverts to z = t - t^2 + 2t^3 - 5t^4
        out = numerics.lagrange_inversion([1.0, 1.0], 4)
        np.testing.assert_allclose(out.real, [1.0, -1.0, 2.0, -5.0], atol=1e-12)
        # t = e^z - 1 inverts to log(1 + t)
        coeffs = [1.0 / math.factorial(n) for n in range(1, 6)]
        out = numerics.lagrange_inversion(coeffs, 5)
        np.testing.assert_allclose(out.real, [1.0, -0.5, 1.0 / 3, -0.25, 0.2], atol=1e-12)


if __name__ == "__main__":
    unittest.main()
