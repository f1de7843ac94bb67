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

"""Weierstrass σ and ζ on a rectangular lattice Λ = {2mω₁ + 2nω₂},
computed from the odd theta series with nome q = e^{iπω₂/ω₁}.

Arguments are reduced to the cell around the origin before the series is
summed and the quasi-periodicity laws

    σ(w + 2ω_s) = −e^{2η_s(w + ω_s)} σ(w),   ζ(w + 2ω_s) = ζ(w) + 2η_s

carry the result back. All functions accept scalars or arrays.
"""

import cmath
import logging
import math
from collections import namedtuple

import numpy as np

from magpauli.core import errors
from magpauli.core.constants import Tolerance


class Lattice(namedtuple("Lattice", ["omega1", "omega2"])):
    """Half-periods ω₁ > 0 and ω₂ ∈ iℝ₊, so that Λ̄ = Λ."""

    __slots__ = ()

    def __new__(cls, omega1=1.0, omega2=1j):
        omega1 = complex(omega1)
        omega2 = complex(omega2)
        if abs(omega1.imag) > 1e-15 * abs(omega1) or not omega1.real > 0:
            raise errors.InvalidLattice("omega1 must be real and positive, got %s" % omega1)
        if not omega2.imag > 0:
            raise errors.InvalidLattice(
                "omega2 must have a positive imaginary part, got %s" % omega2
            )
        if abs(omega2.real) > 1e-15 * abs(omega2):
            raise errors.InvalidLattice(
                "only purely imaginary omega2 is supported, got %s" % omega2
            )
        return super(Lattice, cls).__new__(cls, omega1.real, complex(0.0, omega2.imag))

    @property
    def tau(self):
        return self.omega2 / self.omega1

    @property
    def nome(self):
        return math.exp(-math.pi * self.omega2.imag / self.omega1)

    def reduce(self, w):
        """Split w = w₀ + 2mω₁ + 2nω₂ with w₀ in the cell around 0."""
        w = np.asarray(w, dtype=complex)
        m = np.round(w.real / (2 * self.omega1))
        n = np.round(w.imag / (2 * self.omega2.imag))
        w0 = w - 2 * m * self.omega1 - 2 * n * self.omega2
        return w0, m, n

    def contains(self, w, tol=Tolerance.POLE):
        w0, _, _ = self.reduce(w)
        return np.abs(w0) < tol


def _term_count(q, tol):
    # sin((2k+1)v) grows at most like q^{-(k+1/2)} inside the reduced cell
    K = 4
    while K < Tolerance.SERIES_MAX_TERMS:
        if q ** ((K + 0.5) ** 2 - (K + 0.5)) < tol:
            break
        K += 1
    return K


class WeierstrassContext(object):
    """σ, ζ and the constants η_s = ζ(ω_s) of one lattice.

    The Legendre relation η₁ω₂ − η₂ω₁ = iπ/2 is checked on construction.
    """

    def __init__(self, lattice=None, tol=Tolerance.SERIES):
        self.lattice = lattice if lattice is not None else Lattice()
        self.tol = tol
        self.omega1 = self.lattice.omega1
        self.omega2 = self.lattice.omega2
        q = self.lattice.nome
        self.terms = _term_count(q, tol)
        k = np.arange(self.terms)
        self._odd = 2 * k + 1.0
        self._coef = (-1.0) ** k * q ** ((k + 0.5) ** 2)
        self._theta_prime0 = 2 * float(np.sum(self._coef * self._odd))
        self.eta1 = (
            math.pi ** 2
            / (12 * self.omega1)
            * float(np.sum(self._coef * self._odd ** 3))
            / float(np.sum(self._coef * self._odd))
        )
        self.eta2 = complex(self._zeta_cell(np.asarray(self.omega2)))
        self.legendre_residual = abs(
            self.eta1 * self.omega2 - self.eta2 * self.omega1 - 0.5j * math.pi
        )
        if self.legendre_residual > Tolerance.LEGENDRE:
            raise errors.SelfCheckFailed(
                "Legendre relation fails by %.3e for omega2 = %s"
                % (self.legendre_residual, self.omega2)
            )
        logging.debug(
            "weierstrass context omega2=%s: %d terms, eta1=%s, eta2=%s"
            % (self.omega2, self.terms, self.eta1, self.eta2)
        )

    @property
    def omegas(self):
        return (self.omega1, self.omega2)

    @property
    def etas(self):
        return (self.eta1, self.eta2)

    def _theta(self, v):
        shape = (-1,) + (1,) * v.ndim
        arg = self._odd.reshape(shape) * v
        coef = self._coef.reshape(shape)
        theta = 2 * np.sum(coef * np.sin(arg), axis=0)
        theta_prime = 2 * np.sum(coef * self._odd.reshape(shape) * np.cos(arg), axis=0)
        return theta, theta_prime

    def _zeta_cell(self, w0):
        v = math.pi * w0 / (2 * self.omega1)
        theta, theta_prime = self._theta(v)
        return self.eta1 * w0 / self.omega1 + (math.pi / (2 * self.omega1)) * (
            theta_prime / theta
        )

    def log_sigma(self, w):
        """A branch of log σ(w); −inf real part on Λ."""
        w = np.asarray(w, dtype=complex)
        w0, m, n = self.lattice.reduce(w)
        v = math.pi * w0 / (2 * self.omega1)
        theta, _ = self._theta(v)
        on_lattice = np.abs(w0) < Tolerance.POLE
        theta = np.where(on_lattice, 1.0, theta)
        out = (
            math.log(2 * self.omega1 / math.pi)
            + self.eta1 * w0 ** 2 / (2 * self.omega1)
            + np.log(theta)
            - math.log(self._theta_prime0)
        )
        parity = np.mod(m + n + m * n, 2)
        out = out + 1j * math.pi * parity
        out = out + (2 * m * self.eta1 + 2 * n * self.eta2) * (
            w0 + m * self.omega1 + n * self.omega2
        )
        out = np.where(on_lattice, complex(-np.inf, 0.0), out)
        return out[()] if out.ndim == 0 else out

    def sigma(self, w):
        w = np.asarray(w, dtype=complex)
        w0, _, _ = self.lattice.reduce(w)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(self.log_sigma(w))
        out = np.where(np.abs(w0) < Tolerance.POLE, 0j, out)
        return out[()] if np.ndim(out) == 0 else out

    def zeta(self, w):
        w = np.asarray(w, dtype=complex)
        w0, m, n = self.lattice.reduce(w)
        if np.any(np.abs(w0) < Tolerance.POLE):
            raise errors.PoleHit("zeta evaluated at a lattice point: %s" % (w,))
        out = self._zeta_cell(w0) + 2 * m * self.eta1 + 2 * n * self.eta2
        return out[()] if out.ndim == 0 else out

    def zeta_masked(self, w):
        """ζ with its poles replaced by 0, and the mask of those poles."""
        w = np.asarray(w, dtype=complex)
        w0, m, n = self.lattice.reduce(w)
        mask = np.abs(w0) < Tolerance.POLE
        w0 = np.where(mask, 1.0, w0)
        out = self._zeta_cell(w0) + 2 * m * self.eta1 + 2 * n * self.eta2
        return np.where(mask, 0j, out), mask

    def quasi_period_residuals(self, w):
        """Relative residuals of the σ and ζ shift laws at the points w, for
        both periods.
        """
        w = np.asarray(w, dtype=complex)
        out = []
        for omega, eta in zip(self.omegas, self.etas):
            lhs = self.log_sigma(w + 2 * omega) - self.log_sigma(w)
            rhs = cmath.log(-1) + 2 * eta * (w + omega)
            diff = np.exp(lhs - rhs) - 1.0
            out.append(float(np.max(np.abs(diff))))
            zl = self.zeta(w + 2 * omega) - self.zeta(w)
            out.append(float(np.max(np.abs(zl - 2 * eta)) / max(1.0, abs(eta))))
        return out

    def __repr__(self):
        return "WeierstrassContext(omega1=%s, omega2=%s)" % (self.omega1, self.omega2)


def sigma(ctx, w):
    """Weierstrass σ: entire, odd, σ′(0) = 1, simple zeros on Λ."""
    return ctx.sigma(w)


def zeta(ctx, w):
    """Weierstrass ζ = σ′/σ; raises PoleHit on Λ."""
    return ctx.zeta(w)


def eta_constants(lattice):
    """(η₁, η₂) = (ζ(ω₁), ζ(ω₂)), Legendre relation enforced."""
    ctx = WeierstrassContext(lattice)
    return ctx.eta1, ctx.eta2
