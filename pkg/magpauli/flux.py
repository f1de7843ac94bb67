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

"""Magnetic flux through large disks for stable exponential sums: the
vector potential on circles, disk flux, indicator integral, regularized
flux and its corner asymptotics.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from magpauli import expsum, growth, numerics
from magpauli.core import errors
from magpauli.core.constants import AsymptoticConvention, Defaults, Tolerance
from magpauli.core.utils import ordered_map

TWO_PI = 2 * math.pi

CornerData = namedtuple("CornerData", ["j", "phi0", "a", "lambdas", "delta"])


def _circle(R, phi):
    phi = np.asarray(phi, dtype=float)
    return R * np.cos(phi), R * np.sin(phi)


def _radial_weights(c, R, phi):
    """Softmax weights w_j of the terms on the circle and the radial
    derivatives ∂_r W_j, with ∂_x W = p − k and ∂_y W = i(p + k).
    """
    x, y = _circle(R, phi)
    L, phase = numerics.log_terms(c.terms, x, y)
    _, shifted, s = numerics.softmax_weights(L, phase)
    if np.any(np.abs(s) < Tolerance.CANCELLATION):
        raise errors.ZeroOfC("c vanishes on the circle of radius %s" % R)
    w = shifted / s
    shape = (-1,) + (1,) * np.ndim(phi)
    p = np.array([f.p for f in c.forms]).reshape(shape)
    k = np.array([f.k for f in c.forms]).reshape(shape)
    phi = np.asarray(phi, dtype=float)
    dr = (p - k) * np.cos(phi) + 1j * (p + k) * np.sin(phi)
    return w, dr


def vector_potential_circle(c, R, phi):
    """dφ-component of A = Φ_y dx − Φ_x dy on the circle of radius R:
    −½R·Σ_j w_j ∂_r W_j, evaluated with log-domain weights.
    """
    w, dr = _radial_weights(c, R, phi)
    value = -0.5 * R * np.real((w * dr).sum(axis=0))
    return float(value) if np.ndim(value) == 0 else value


def _corner_angles(forms):
    hull = growth.convex_hull([(f.alpha, f.beta) for f in growth.as_forms(forms)])
    if len(hull) < 2:
        return []
    out = []
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        out.append(growth._wrap(math.atan2(b[1] - a[1], b[0] - a[0]) - math.pi / 2))
    return sorted(set(out))


def disk_flux(c, R, tol=Tolerance.QUAD):
    """∬_{|x|≤R} B dxdy as the circulation ∮ A over the circle."""
    if R == 0:
        return 0.0
    forms = [growth.RealLinearForm(*f.real_parts()) for f in c.forms]
    result = numerics.quad_adaptive_1d(
        lambda phi: vector_potential_circle(c, R, phi),
        0.0,
        TWO_PI,
        tol,
        max_subdivisions=500,
        breakpoints=_corner_angles(forms),
    )
    return result.value


def disk_flux_area(c, R, tol=1e-8, sign=Defaults.FIELD_SIGN):
    """The same flux by 2D quadrature of B, for small radii."""
    return numerics.quad_disk(
        lambda x, y: expsum.magnetic_field(c, x, y, sign=sign), R, tol
    ).value


def indicator_integral(forms):
    """∮ I_{W_j}(φ) dφ over real forms, in closed form: I is the support function of
    conv({0} ∪ {(α_j, β_j)}), and on the normal arc [a, b] of a vertex
    (α, β) it integrates to α(sin b − sin a) − β(cos b − cos a).
    """
    points = [(0.0, 0.0)] + [(f.alpha, f.beta) for f in growth.as_forms(forms)]
    hull = growth.convex_hull(points)
    if len(hull) < 2:
        return 0.0
    edges = []
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        edges.append(math.atan2(b[1] - a[1], b[0] - a[0]))
    total = 0.0
    for i, (alpha, beta) in enumerate(hull):
        start = edges[i - 1] - math.pi / 2
        length = math.fmod(edges[i] - edges[i - 1] + 2 * TWO_PI, TWO_PI)
        if length == 0.0:
            length = TWO_PI
        end = start + length
        total += alpha * (math.sin(end) - math.sin(start)) - beta * (
            math.cos(end) - math.cos(start)
        )
    return total


def essential_forms(forms, tol=Tolerance.HULL_MEMBERSHIP):
    """Split forms into hull vertices (essential) and the rest."""
    forms = growth.as_forms(forms)
    hull = set(growth.convex_hull([(f.alpha, f.beta) for f in forms]))
    essential = [f for f in forms if (f.alpha + 0.0, f.beta + 0.0) in hull]
    rest = [f for f in forms if (f.alpha + 0.0, f.beta + 0.0) not in hull]
    return essential, rest


def _positive_sum(c):
    if not c.is_real_exponential() or np.any(c.kappas.real <= 0):
        raise errors.NotPositive("flux asymptotics need a real all-positive c")


def gauge_fixed_forms(c):
    """Positive forms of c shifted by the minimal zero representative, so
    that 0 lies in their relative interior.
    """
    forms = growth.positive_forms(c)
    W0 = growth.minimal_zero_representative(forms)
    return [f + W0 for f in forms]


def regularized_flux(c, R, tol=1e-12):
    """disk_flux + ½R·∮I dφ with the indicator taken in the gauge of the
    minimal representative, so the result does not depend on the gauge of
    c. Integrated directly as −½R·∮(Σ_j w_j g_j − max_j g_j) dφ, where
    g_j = ∂_r Re W_j, to keep the cancellation exact.
    """
    _positive_sum(c)
    forms = growth.positive_forms(c)
    W0 = growth.minimal_zero_representative(forms)
    shifted, _ = growth.gauge_shift(c, W0)
    g = np.array([[f.alpha, f.beta] for f in growth.positive_forms(shifted)])

    def integrand(phi):
        w, dr = _radial_weights(shifted, R, phi)
        radial = float(np.real((w * dr).sum()))
        top = float(np.max(g[:, 0] * math.cos(phi) + g[:, 1] * math.sin(phi)))
        return radial - top

    result = numerics.quad_adaptive_1d(
        integrand,
        0.0,
        TWO_PI,
        tol,
        max_subdivisions=1000,
        breakpoints=_corner_angles(forms),
    )
    return -0.5 * R * result.value


def q_integral(k, a, tol=1e-12):
    """Q_k(a) = ∫₀^∞ a·w^k e^{−w} / (1 + a e^{−w}) dw."""
    if int(k) != k or k < 0:
        raise ValueError("k must be a nonnegative integer, got %s" % k)
    if not a > 0:
        raise ValueError("a must be positive, got %s" % a)
    k = int(k)

    def f(w):
        if w <= 0.0:
            return a / (1.0 + a) if k == 0 else 0.0
        return a * math.exp(k * math.log(w) - w) / (1.0 + a * math.exp(-w))

    return numerics.quad_adaptive_1d(f, 0.0, np.inf, tol, rel_tol=tol).value


def _corner_series(delta, phi0, order):
    """Taylor coefficients [c_1, ..., c_order] of
    t(z) = Δα cos(φ₀ + z) + Δβ sin(φ₀ + z) = A cos z + B sin z.
    """
    A = delta[0] * math.cos(phi0) + delta[1] * math.sin(phi0)
    B = -delta[0] * math.sin(phi0) + delta[1] * math.cos(phi0)
    out = []
    for m in range(1, order + 1):
        if m % 2 == 0:
            out.append(A * (-1) ** (m // 2) / math.factorial(m))
        else:
            out.append(B * (-1) ** ((m - 1) // 2) / math.factorial(m))
    return A, out


def corner_lambdas(series_coeffs, order):
    """λ^{(k)}, k = 0..order, of dz/dt = Σ λ^{(k)} t^k for t(z) given by its
    Taylor coefficients [c_1, c_2, ...].
    """
    coeffs = list(series_coeffs) + [0.0] * (order + 1 - len(series_coeffs))
    d = numerics.lagrange_inversion(coeffs[: order + 1], order + 1)
    return [float(((k + 1) * d[k]).real) for k in range(order + 1)]


def corners(forms, kappas=None, order=Defaults.MAX_ASYMPTOTIC_ORDER):
    """CornerData for every pair of ccw-adjacent hull vertices."""
    forms = growth.as_forms(forms)
    if kappas is None:
        kappas = [1.0] * len(forms)
    lookup = {(f.alpha + 0.0, f.beta + 0.0): float(np.real(k)) for f, k in zip(forms, kappas)}
    hull = growth.convex_hull(list(lookup))
    if len(hull) < 3:
        raise errors.UnstableClass("corners need a two-dimensional hull of forms")
    _, rest = essential_forms(forms)
    out = []
    for j in range(len(hull)):
        a, b = hull[j], hull[(j + 1) % len(hull)]
        delta = (b[0] - a[0], b[1] - a[1])
        length = math.hypot(*delta)
        for f in rest:
            along = ((f.alpha - a[0]) * delta[0] + (f.beta - a[1]) * delta[1]) / length
            perp = growth._cross(a, b, (f.alpha, f.beta)) / length
            if abs(perp) <= Tolerance.HULL_MEMBERSHIP and 0 <= along <= length:
                raise errors.DegenerateCorner(
                    "form (%s, %s) lies on the hull edge of corner %d" % (f.alpha, f.beta, j)
                )
        phi0 = growth._wrap(math.atan2(delta[1], delta[0]) - math.pi / 2)
        A, series = _corner_series(delta, phi0, order + 1)
        if abs(A) > 1e-12 * length:
            raise errors.DegenerateCorner("t(0) = %s is not zero at corner %d" % (A, j))
        if abs(series[0]) <= Tolerance.HULL_MEMBERSHIP:
            raise errors.DegenerateCorner("tangential crossing at corner %d" % j)
        out.append(
            CornerData(j, phi0, lookup[b] / lookup[a], corner_lambdas(series, order), delta)
        )
    return out


def corner_coefficients(forms, j, order=Defaults.MAX_ASYMPTOTIC_ORDER, kappas=None):
    """The CornerData of corner ``j`` (ccw order of hull vertices)."""
    all_corners = corners(forms, kappas, order)
    return all_corners[j % len(all_corners)]


def flux_asymptotic(
    c,
    R,
    order=Defaults.ASYMPTOTIC_ORDER,
    convention=AsymptoticConvention.Derived.value,
):
    """Truncated large-R expansion of the regularized flux.

    "derived": ½ Σ_{s≤order} R^{−s} Σ_j λ_j^{(s−1)} [Q_s(1/a_j) − (−1)^s Q_s(a_j)],
    the expansion obtained from the two-term balance at each corner.
    "printed": Σ_{s≤order} R^{−s} Σ_j λ_j^{(s)} [Q_s(a_j) + (−1)^s Q_s(1/a_j)].
    """
    if not 1 <= order <= Defaults.MAX_ASYMPTOTIC_ORDER:
        raise ValueError(
            "order must be in 1..%d, got %s" % (Defaults.MAX_ASYMPTOTIC_ORDER, order)
        )
    if convention not in AsymptoticConvention.values():
        raise ValueError("unknown convention %r" % convention)
    _positive_sum(c)
    forms = growth.positive_forms(c)
    profile = growth.polygon_T(forms)
    if profile.polygon.dimension == 0:
        return 0.0
    if not profile.stable:
        raise errors.UnstableClass("T is a segment; the flux has no corner expansion")
    data = corners(forms, c.kappas.real, order)
    total = 0.0
    for s in range(1, order + 1):
        inner = 0.0
        for corner in data:
            a = corner.a
            if convention == AsymptoticConvention.Derived.value:
                lam = corner.lambdas[s - 1]
                if lam != 0.0:
                    inner += lam * (q_integral(s, 1.0 / a) - (-1) ** s * q_integral(s, a))
            else:
                lam = corner.lambdas[s] if s < len(corner.lambdas) else 0.0
                if lam != 0.0:
                    inner += lam * (q_integral(s, a) + (-1) ** s * q_integral(s, 1.0 / a))
        total += inner * R ** -s
    if convention == AsymptoticConvention.Derived.value:
        total *= 0.5
    return total


FluxRow = namedtuple("FluxRow", ["R", "disk_flux", "regularized", "asymptotic_o1"])


def flux_scan(c, radii, tol=Tolerance.QUAD, threads=1):
    """Rows (R, disk flux, regularized flux, first-order asymptotic)."""
    stable = growth.polygon_T(growth.positive_forms(c)).stable

    def row(R):
        logging.info("flux scan at R = %s" % R)
        asym = flux_asymptotic(c, R, 1) if stable else float("nan")
        return FluxRow(float(R), disk_flux(c, R, tol), regularized_flux(c, R), asym)

    return ordered_map(row, radii, threads)
