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

from magpauli import elliptic, genus1, verification
from magpauli.core import errors
from magpauli.tests.magpauli_test import MagpauliTest


class GenusOneTest(MagpauliTest):
    @classmethod
    def setUpClass(cls):
        cls.ctx = elliptic.WeierstrassContext(elliptic.Lattice(1.0, 1j))
        cls.periodic = genus1.periodicity_search(cls.ctx, 0, 0, 1.5 + 0.1j)
        cls.model = verification.periodic_bloch_model(cls.ctx)
        cls.samples = cls.model.sample_points()

    def real_data(self):
        # Q_0 + Q_1 + P_1 + P_2 = conj(P)
        return genus1.GenusOneData(
            self.ctx,
            Q=[0.3 + 0.2j, -0.4 + 0.5j],
            R=[0.2 - 0.6j, 0.5 + 0.4j],
            Dprime=[0.15 + 0.35j, 0.3 - 0.8j],
            P=0.35 - 0.25j,
        )

    def test_data_validation(self):
        with self.assertRaises(errors.DegenerateData):
            genus1.GenusOneData(self.ctx, [0.1], [0.2, 0.3], [0.4], 0.5)
        with self.assertRaises(errors.DegenerateData):
            genus1.GenusOneData(self.ctx, [2.0 + 2j], [0.2], [0.4], 0.5)
        with self.assertRaises(errors.DegenerateData):
            genus1.GenusOneData(self.ctx, [0.1, 2.1], [0.2, 0.3], [0.4, 0.6], 0.5)

    def test_psi_second_normalization(self):
        data = verification.compatibility_example(self.ctx)
        self.assertComplexAlmostEqual(genus1.psi_second(data, 0.4 + 0.1j, 0.0), 1.0)
        with self.assertRaises(errors.PoleHit):
            genus1.psi_second(data, 2.0, 0.1)

    def test_compatibility(self):
        data = verification.compatibility_example(self.ctx)
        for z in (0.0, 0.3 + 0.1j, -0.6 + 0.45j):
            self.assertLess(genus1.compatibility_residual(data, z), 1e-9)

    def test_canonical_form_of_data(self):
        data = self.real_data()
        terms = genus1.canonical_terms(data)
        field = genus1.build_canonical(self.ctx, terms)
        for z in (0.1 + 0.2j, -0.3 + 0.05j):
            self.assertComplexAlmostEqual(
                field(z + data.P), genus1.c_tilde(data, z), 1e-10
            )
        with self.assertRaises(errors.DegenerateData):
            genus1.canonical_terms(verification.compatibility_example(self.ctx))

    def test_c_genus1(self):
        data = verification.compatibility_example(self.ctx)
        z = 0.2 - 0.1j
        expected = genus1.c_tilde(data, z) / (
            self.ctx.sigma(np.conj(z) + data.Sigma) * self.ctx.sigma(z + data.P)
        )
        self.assertComplexAlmostEqual(genus1.c_genus1(data, z), expected, 1e-12)

    def test_reality_types(self):
        typing = genus1.reality_types(self.periodic.terms)
        self.assertTrue(typing.is_real)
        self.assertEqual(typing.counts, (1, 1))
        self.assertEqual(typing.type1, [0])
        typing = genus1.reality_types([genus1.CanonicalTerm(1.0, 0.3, 0.5)])
        self.assertFalse(typing.is_real)
        self.assertEqual(typing.unmatched, [0])

    def test_real_sum_is_real(self):
        field = genus1.build_canonical(self.ctx, genus1.periodic_terms(self.ctx, 1.3 + 0.2j))
        _, imag = genus1.positivity_scan(field, self.ctx, n=31)
        self.assertLess(imag, 1e-10)

    def test_fit_alphas(self):
        terms = genus1.periodic_terms(self.ctx, 1.3 + 0.2j)
        samples = np.array([0.1 + 0.2j, -0.4 + 0.3j, 0.7 - 0.5j, -0.2 - 0.8j, 0.5 + 0.6j])
        values = genus1.build_canonical(self.ctx, terms)(samples)
        alphas, residual = genus1.fit_alphas(self.ctx, terms, samples, values)
        np.testing.assert_allclose(alphas, [t.alpha for t in terms], rtol=1e-8, atol=1e-10)
        self.assertLess(residual, 1e-10)

    def test_periodicity_search(self):
        result = self.periodic
        self.assertLessEqual(result.equation_residual, 1e-10)
        self.assertLess(result.periodicity_residual, 1e-6)
        np.testing.assert_allclose(
            genus1.periodicity_equations(self.ctx, result.lam, 0, 0), [0.0, 0.0], atol=1e-10
        )
        field = genus1.build_canonical(self.ctx, result.terms)
        cell = genus1.cell_flux(field, self.ctx)
        self.assertAlmostEqual(cell.quanta, 1.0, delta=1e-6)
        self.assertAlmostEqual(abs(cell.flux), 2 * math.pi, delta=1e-5)
        with self.assertRaises(errors.DegenerateData):
            genus1.periodicity_search(self.ctx, 0, 0, 2.0)

    def test_bloch_multipliers(self):
        m = genus1.bloch_multipliers(self.model, 0.4 + 0.3j, self.samples)
        self.assertLess(m.deviation, 1e-9)
        for kappa, closed in zip((m.kx, m.ky), m.derived):
            self.assertComplexAlmostEqual(kappa, closed, 1e-8)
        with self.assertRaises(errors.PoleHit):
            genus1.bloch_multipliers(self.model, 0.0, self.samples)

    def test_unitarize(self):
        p = -0.3 + 0.6j
        m = genus1.bloch_multipliers(self.model, p, self.samples)
        res = genus1.unitarize(self.model, p, m)
        self.assertAlmostEqual(abs(res.kx), 1.0, places=10)
        self.assertAlmostEqual(abs(res.ky), 1.0, places=10)
        self.assertLess(res.closed_form_mismatch, 1e-8)
        z = self.samples[0]
        for t, kt in enumerate((res.kx, res.ky)):
            ratio = genus1.magnetic_translation_ratio(self.model, p, res.u, z, t)
            self.assertComplexAlmostEqual(ratio, kt, 1e-8)
        for form in genus1.printed_unitary_forms(self.ctx, p):
            self.assertAlmostEqual(abs(form), 1.0, places=12)

    def test_unitarity_locus(self):
        p = genus1.unitarity_locus_point(self.model, 0.4 + 0.3j, self.samples)
        m = genus1.bloch_multipliers(self.model, p, self.samples)
        self.assertAlmostEqual(abs(m.kx), 1.0, places=9)
        self.assertAlmostEqual(abs(m.ky), 1.0, places=9)
        u = genus1.unitarize(self.model, p, m).u
        self.assertLess(abs(u), 1e-8)

    def test_dn_gauge_normalization(self):
        value = genus1.dn_gauge(self.model, 0.4 + 0.3j, 0.0)
        self.assertAlmostEqual(complex(value).imag, 0.0, places=12)
        self.assertGreater(complex(value).real, 0.0)

    def unitarized(self, p):
        multipliers = genus1.bloch_multipliers(self.model, p, self.samples)
        return genus1.unitarize(self.model, p, multipliers)

    def test_dn_gauge_multipliers(self):
        for p in (0.4 + 0.3j, -0.3 + 0.6j, 0.7 - 0.2j):
            res = self.unitarized(p)
            for t, kt in enumerate((res.kx, res.ky)):
                closed = res.closed_form[t]
                self.assertLess(min(abs(kt - closed), abs(kt - np.conj(closed))), 1e-8)
                for z in self.samples[:3]:
                    ratio = genus1.magnetic_translation_ratio(self.model, p, res.u, z, t)
                    self.assertComplexAlmostEqual(ratio, kt, 1e-8)

    def test_dn_gauge_bounded(self):
        p = 0.4 + 0.3j
        u = self.unitarized(p).u
        grid = genus1.cell_grid(self.ctx, 9, origin=(-0.93, -0.97)).ravel()
        central = np.abs(genus1.dn_gauge(self.model, p, grid, u))
        self.assertTrue(np.all(np.isfinite(central)))
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                shift = 2 * m * self.ctx.omega1 + 2 * n * self.ctx.omega2
                moved = np.abs(genus1.dn_gauge(self.model, p, grid + shift, u))
                np.testing.assert_allclose(moved, central, rtol=1e-6, atol=1e-12)
                self.assertLessEqual(moved.max(), central.max() * (1 + 1e-6))

    def test_dn_gauge_zero_count(self):
        p = 0.4 + 0.3j
        u = self.unitarized(p).u
        count = genus1.zero_count(lambda z: genus1.dn_gauge(self.model, p, z, u), self.ctx)
        self.assertEqual(count, 1)

    def test_cell_flux_constant(self):
        cell = genus1.cell_flux(lambda z: np.ones(np.shape(z)), self.ctx)
        self.assertAlmostEqual(cell.flux, 0.0, places=9)
        self.assertAlmostEqual(cell.quanta, 0.0, places=9)

    def test_cell_flux_single_type1_term(self):
        term = genus1.CanonicalTerm(1.0, 0.3 + 0.2j, -0.3 + 0.2j)
        self.assertEqual(genus1.reality_types([term]).type1, [0])
        cell = genus1.cell_flux(genus1.build_canonical(self.ctx, [term]), self.ctx)
        self.assertAlmostEqual(cell.quanta, 1.0, delta=1e-6)
        self.assertAlmostEqual(abs(cell.flux), 2 * math.pi, delta=1e-5)


if __name__ == "__main__":
    unittest.main()
