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

"""Shared numerical kernels: stable exponential sums, finite-difference
Pauli operators, adaptive quadrature, Newton iteration, contour winding
numbers and series inversion.
"""

import logging
import math
import warnings
from collections import namedtuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from magpauli.core import errors
from magpauli.core.constants import Defaults, Sector, Tolerance

# log of the largest finite double
_LOG_MAX = math.log(np.finfo(float).max)

LogSum = namedtuple(
    "LogSum", ["log_magnitude", "phase", "value", "cancelled"]
)
QuadResult = namedtuple("QuadResult", ["value", "error"])
NewtonResult = namedtuple("NewtonResult", ["x", "residual", "iterations"])


class ComplexLinearForm(namedtuple("ComplexLinearForm", ["p", "k"])):
    """W(z, z̄) = p·z − k·z̄ with z = x + iy."""

    __slots__ = ()

    def __new__(cls, p, k):
        return super(ComplexLinearForm, cls).__new__(
            cls, complex(p), complex(k)
        )

    @classmethod
    def from_real(cls, alpha, beta):
        """The purely real form αx + βy."""
        return cls(complex(alpha, -beta) / 2.0, -complex(alpha, beta) / 2.0)

    @property
    def alpha(self):
        return (self.p - self.k).real

    @property
    def beta(self):
        return -(self.p + self.k).imag

    def real_parts(self):
        return self.alpha, self.beta

    def __call__(self, x, y):
        z = np.asarray(x) + 1j * np.asarray(y)
        return self.p * z - self.k * np.conj(z)

    def d_dz(self):
        return self.p

    def d_dzbar(self):
        return -self.k

    def __add__(self, other):
        return ComplexLinearForm(self.p + other.p, self.k + other.k)


class Grid2D(object):
    """Points x0 + i·hx, y0 + j·hy, i < nx, j < ny, in row-major order."""

    def __init__(self, x0, y0, hx, hy, nx, ny):
        if not (hx > 0 and hy > 0):
            raise ValueError("grid spacings must be positive, got %s, %s" % (hx, hy))
        if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
            raise ValueError("grid counts must be positive integers")
        self.x0 = float(x0)
        self.y0 = float(y0)
        self.hx = float(hx)
        self.hy = float(hy)
        self.nx = int(nx)
        self.ny = int(ny)

    @classmethod
    def centered(cls, half_width, h):
        n = int(round(2 * half_width / h)) + 1
        return cls(-half_width, -half_width, h, h, n, n)

    def axes(self, pad=0):
        xs = self.x0 + self.hx * np.arange(-pad, self.nx + pad)
        ys = self.y0 + self.hy * np.arange(-pad, self.ny + pad)
        return xs, ys

    def mesh(self, pad=0):
        """Arrays X, Y of shape (ny + 2·pad, nx + 2·pad)."""
        xs, ys = self.axes(pad)
        return np.meshgrid(xs, ys)

    def points(self):
        X, Y = self.mesh()
        return X.ravel(), Y.ravel()

    def __repr__(self):
        return "Grid2D(x0=%r, y0=%r, hx=%r, hy=%r, nx=%r, ny=%r)" % (
            self.x0,
            self.y0,
            self.hx,
            self.hy,
            self.nx,
            self.ny,
        )


def _term_arrays(terms):
    terms = list(terms)
    if not terms:
        raise errors.EmptySum("an exponential sum needs at least one term")
    kappa = np.array([complex(c) for c, _ in terms])
    p = np.array([form.p for _, form in terms])
    k = np.array([form.k for _, form in terms])
    return kappa, p, k


def log_terms(terms, x, y):
    """Per-term log-magnitudes L_j = ln|κ_j| + Re W_j and unit phases,
    stacked along the first axis.
    """
    kappa, p, k = _term_arrays(terms)
    z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
    shape = (-1,) + (1,) * z.ndim
    W = p.reshape(shape) * z - k.reshape(shape) * np.conj(z)
    with np.errstate(divide="ignore"):
        L = np.log(np.abs(kappa)).reshape(shape) + W.real
    unit = np.where(kappa == 0, 1.0, kappa / np.where(kappa == 0, 1.0, np.abs(kappa)))
    phase = unit.reshape(shape) * np.exp(1j * W.imag)
    return L, phase


def softmax_weights(L, phase):
    """Shift by the dominant term and return (shift, shifted terms, sum)."""
    m = np.max(L, axis=0)
    finite_m = np.where(np.isfinite(m), m, 0.0)
    shifted = np.exp(L - finite_m) * phase
    return finite_m, shifted, shifted.sum(axis=0)


def logsum_grid(terms, x, y, cancellation=Tolerance.CANCELLATION):
    """Vectorised ``logsum_eval``: arrays of log-magnitude, phase and the
    cancellation mask over the points (x, y).
    """
    L, phase = log_terms(terms, x, y)
    m, _, s = softmax_weights(L, phase)
    mag = np.abs(s)
    with np.errstate(divide="ignore"):
        log_mag = m + np.log(mag)
    unit = np.where(mag > 0, s / np.where(mag > 0, mag, 1.0), 1.0)
    return log_mag, unit, mag < cancellation


def logsum_eval(terms, point, cancellation=Tolerance.CANCELLATION):
    """Evaluate Σ κ_j e^{W_j} at ``point`` in log-magnitude/phase form.

    :param terms: sequence of (coefficient, ComplexLinearForm).
    :param point: (x, y).
    :param cancellation: relative size below which the sum is flagged as
        cancelled against its dominant term.
    :return: LogSum(log_magnitude, phase, value or None, cancelled).
    """
    x, y = point
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError("point must be finite, got %r" % (point,))
    log_mag, unit, cancelled = logsum_grid(terms, x, y, cancellation)
    log_mag = float(log_mag)
    unit = complex(unit)
    if bool(cancelled):
        logging.debug("exponential sum cancels at %r" % (point,))
    value = None
    if log_mag < _LOG_MAX:
        value = math.exp(log_mag) * unit if log_mag > -np.inf else 0j
    return LogSum(log_mag, unit, value, bool(cancelled))


def _stencil(F, dj, di, ny, nx, pad):
    return F[pad + dj : pad + dj + ny, pad + di : pad + di + nx]  # noqa: E203


def _derivatives(F, h, axis, ny, nx, order, pad=2):
    """First and second centred differences of F along one axis, on the
    unpadded grid.
    """

    def s(n):
        return _stencil(F, n, 0, ny, nx, pad) if axis == 0 else _stencil(F, 0, n, ny, nx, pad)

    if order == 2:
        d1 = (s(1) - s(-1)) / (2 * h)
        d2 = (s(1) - 2 * s(0) + s(-1)) / h ** 2
    elif order == 4:
        d1 = (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * h)
        d2 = (-s(2) + 16 * s(1) - 30 * s(0) + 16 * s(-1) - s(-2)) / (12 * h ** 2)
    else:
        raise ValueError("finite-difference order must be 2 or 4, got %s" % order)
    return d1, d2


def fd_apply_pauli(Phi, psi, sign, grid, order=Defaults.FD_ORDER):
    """Apply L_± = −(∂x − iΦ_y)² − (∂y + iΦ_x)² ± ΔΦ to ``psi`` on ``grid``.

    Expanded, L_±ψ = −Δψ + 2iΦ_yψ_x − 2iΦ_xψ_y + |∇Φ|²ψ ± ΔΦ·ψ, with all
    derivatives (of ψ and Φ) by centred differences. The samplers are
    vectorised callables of (X, Y) and are evaluated on the grid padded
    by two layers.
    """
    if grid.nx < Defaults.MIN_GRID_POINTS or grid.ny < Defaults.MIN_GRID_POINTS:
        raise errors.GridTooSmall(
            "grid needs at least %d points per axis, got %dx%d"
            % (Defaults.MIN_GRID_POINTS, grid.nx, grid.ny)
        )
    sign = _sector_sign(sign)
    X, Y = grid.mesh(pad=2)
    F = np.asarray(Phi(X, Y), dtype=float)
    U = np.asarray(psi(X, Y), dtype=complex)
    ny, nx = grid.ny, grid.nx
    Fx, Fxx = _derivatives(F, grid.hx, 1, ny, nx, order)
    Fy, Fyy = _derivatives(F, grid.hy, 0, ny, nx, order)
    Ux, Uxx = _derivatives(U, grid.hx, 1, ny, nx, order)
    Uy, Uyy = _derivatives(U, grid.hy, 0, ny, nx, order)
    u = _stencil(U, 0, 0, ny, nx, 2)
    lap_phi = Fxx + Fyy
    return (
        -(Uxx + Uyy)
        + 2j * Fy * Ux
        - 2j * Fx * Uy
        + (Fx ** 2 + Fy ** 2) * u
        + sign * lap_phi * u
    )


def _sector_sign(sign):
    if sign in (1, "+", Sector.Plus, Sector.Plus.value):
        return 1.0
    if sign in (-1, "-", Sector.Minus, Sector.Minus.value):
        return -1.0
    raise ValueError("sign must be one of +, -, %s, got %r" % (Sector.values(), sign))


def gradient(F, grid):
    """Centred-difference gradient of a sampler on ``grid`` (pad one layer)."""
    X, Y = grid.mesh(pad=2)
    V = F(X, Y)
    Fx, _ = _derivatives(V, grid.hx, 1, grid.ny, grid.nx, 2)
    Fy, _ = _derivatives(V, grid.hy, 0, grid.ny, grid.nx, 2)
    return Fx, Fy


def _check_quad_message(message, a, b):
    if "maximum number of subdivisions" in message:
        raise errors.MaxSubdivisions(
            "quadrature on [%s, %s] ran out of subdivisions: %s" % (a, b, message)
        )
    logging.warning("quadrature on [%s, %s]: %s" % (a, b, message))


def quad_adaptive_1d(
    f,
    a,
    b,
    tol=Tolerance.QUAD,
    max_subdivisions=Tolerance.QUAD_MAX_SUBDIVISIONS,
    breakpoints=None,
    rel_tol=0.0,
):
    """Adaptive Gauss–Kronrod quadrature of a real function. Refinement
    stops once the error estimate is below max(tol, rel_tol·|value|).

    An infinite upper limit is mapped to [0, 1) by w = a + t/(1 − t).

    :return: QuadResult(value, error estimate).
    """
    if not tol > 0:
        raise ValueError("tol must be positive, got %s" % tol)
    if b == np.inf:

        def mapped(t):
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            return f(a + t / s) / (s * s)

        return quad_adaptive_1d(
            mapped, 0.0, 1.0, tol, max_subdivisions, rel_tol=rel_tol
        )
    points = None
    if breakpoints is not None:
        lo, hi = min(a, b), max(a, b)
        points = sorted(set(float(p) for p in breakpoints if lo < p < hi))
        points = points or None
    result = integrate.quad(
        f,
        a,
        b,
        epsabs=tol,
        epsrel=rel_tol,
        limit=max_subdivisions,
        points=points,
        full_output=1,
    )
    value, error = result[0], result[1]
    if len(result) > 3:
        _check_quad_message(result[3], a, b)
    return QuadResult(float(value), float(error))


def quad_2d(f, x_range, y_range, tol=Tolerance.QUAD):
    """Adaptive quadrature of f(x, y) over x in x_range and y in y_range.
    The y limits may be callables of x.
    """
    if not tol > 0:
        raise ValueError("tol must be positive, got %s" % tol)
    a, b = x_range
    c, d = y_range
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, error = integrate.dblquad(
            lambda y, x: f(x, y), a, b, c, d, epsabs=tol, epsrel=0.0
        )
    for w in caught:
        if issubclass(w.category, integrate.IntegrationWarning):
            _check_quad_message(str(w.message), a, b)
    return QuadResult(float(value), float(error))


def quad_disk(f, R, tol=Tolerance.QUAD):
    """∬ f over the disk of radius R about the origin, in polar form."""
    return quad_2d(
        lambda r, phi: f(r * math.cos(phi), r * math.sin(phi)) * r,
        (0.0, R),
        (0.0, 2 * math.pi),
        tol,
    )


def newton_solve(
    F,
    x0,
    tol=Tolerance.NEWTON,
    max_iter=Tolerance.NEWTON_MAX_ITER,
    fd_step=1e-7,
):
    """Damped Newton iteration for F(x) = 0 with a central-difference
    Jacobian.

    :param F: callable mapping an ndarray of shape (n,) to shape (n,).
    :return: NewtonResult(x, residual, iterations).
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(F(x), dtype=float)
    norm = np.linalg.norm(r)
    for it in range(max_iter + 1):
        logging.debug("newton iteration %d: residual %.3e" % (it, norm))
        if norm <= tol:
            return NewtonResult(x, float(norm), it)
        if it == max_iter:
            break
        J = np.empty((r.size, x.size))
        for i in range(x.size):
            h = fd_step * max(1.0, abs(x[i]))
            e = np.zeros_like(x)
            e[i] = h
            J[:, i] = (np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * h)
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > Tolerance.JACOBIAN_CONDITION:
            raise errors.SingularJacobian(
                "Jacobian at %s is singular (condition %.3e)" % (x, cond)
            )
        dx = np.linalg.solve(J, -r)
        t = 1.0
        while True:
            x_new = x + t * dx
            r_new = np.asarray(F(x_new), dtype=float)
            norm_new = np.linalg.norm(r_new)
            if norm_new < norm or t < 2.0 ** -30:
                break
            t *= 0.5
        x, r, norm = x_new, r_new, norm_new
    raise errors.NoConvergence(
        "no convergence after %d iterations, residual %.3e at %s"
        % (max_iter, norm, x)
    )


def rectangle_contour(x0, y0, width, height, samples=Defaults.WINDING_SAMPLES):
    """Closed counter-clockwise contour around a rectangle (first point
    repeated at the end).
    """
    n = max(samples // 4, 8)
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    corners = [
        complex(x0, y0),
        complex(x0 + width, y0),
        complex(x0 + width, y0 + height),
        complex(x0, y0 + height),
    ]
    edges = [
        corners[i] + t * (corners[(i + 1) % 4] - corners[i]) for i in range(4)
    ]
    z = np.concatenate(edges)
    return np.append(z, z[0])


def winding_number(f, x0, y0, width, height, samples=Defaults.WINDING_SAMPLES):
    """Number of zeros minus poles of f inside the rectangle, by summing
    phase increments of f along its boundary.
    """
    z = rectangle_contour(x0, y0, width, height, samples)
    values = np.asarray(f(z), dtype=complex)
    mag = np.abs(values)
    if not np.all(np.isfinite(values)) or mag.min() <= 1e-300 + 1e-14 * mag.max():
        raise errors.ZeroOnBoundary(
            "function vanishes or blows up on the contour of the cell at (%s, %s)"
            % (x0, y0)
        )
    steps = np.angle(values[1:] / values[:-1])
    if np.max(np.abs(steps)) > 0.75 * math.pi:
        logging.warning(
            "winding number contour is undersampled (max phase step %.3f)"
            % np.max(np.abs(steps))
        )
    return int(round(steps.sum() / (2 * math.pi)))


def series_reciprocal(a, order):
    """Coefficients of 1/(a0 + a1 w + ...) up to w^order."""
    a = np.asarray(a, dtype=complex)
    if a[0] == 0:
        raise ZeroDivisionError("series has no reciprocal: zero constant term")
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0 / a[0]
    for n in range(1, order + 1):
        acc = 0j
        for i in range(1, min(n, len(a) - 1) + 1):
            acc += a[i] * out[n - i]
        out[n] = -acc / a[0]
    return out


def lagrange_inversion(coeffs, order):
    """Invert t(z) = c1·z + c2·z² + ... (coeffs = [c1, c2, ...]) into
    z(t) = d1·t + d2·t² + ... and return [d1, ..., d_order].

    Uses d_n = (1/n)·[w^{n−1}] (w / t(w))^n.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size == 0 or coeffs[0] == 0:
        raise ZeroDivisionError("series inversion needs a nonzero linear term")
    recip = series_reciprocal(coeffs, order)
    out = []
    power = np.array([1.0 + 0j])
    for n in range(1, order + 1):
        power = P.polymul(power, recip)[: order + 1]
        coeff = power[n - 1] if n - 1 < power.size else 0j
        out.append(coeff / n)
    return np.array(out)
