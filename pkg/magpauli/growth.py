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

"""Indicator of growth, the polygon T of square-integrable ground states,
gauge shifts, ground states Ψ_W and their currents.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from magpauli import expsum, numerics
from magpauli.core import errors
from magpauli.core.constants import (
    Membership,
    PhaseVariant,
    Sector,
    TermKind,
    Tolerance,
    ZeroSetKind,
)
from magpauli.numerics import ComplexLinearForm

TWO_PI = 2 * math.pi


class RealLinearForm(namedtuple("RealLinearForm", ["alpha", "beta"])):
    """W(x, y) = αx + βy."""

    __slots__ = ()

    def __new__(cls, alpha, beta):
        alpha, beta = float(alpha), float(beta)
        if not (math.isfinite(alpha) and math.isfinite(beta)):
            raise ValueError("form components must be finite, got (%s, %s)" % (alpha, beta))
        return super(RealLinearForm, cls).__new__(cls, alpha, beta)

    def __call__(self, x, y):
        return self.alpha * np.asarray(x) + self.beta * np.asarray(y)

    def __neg__(self):
        return RealLinearForm(-self.alpha, -self.beta)

    def __add__(self, other):
        return RealLinearForm(self.alpha + other[0], self.beta + other[1])

    def complex_form(self):
        return ComplexLinearForm.from_real(self.alpha, self.beta)


def as_forms(forms):
    return [f if isinstance(f, RealLinearForm) else RealLinearForm(*f) for f in forms]


def indicator(form, phi):
    """I_W(φ) = max(α cos φ + β sin φ, 0)."""
    alpha, beta = form
    return np.maximum(alpha * np.cos(phi) + beta * np.sin(phi), 0.0)


def indicator_set(forms, phi):
    """I_{W_j}(φ) = max_j I_{W_j}(φ)."""
    forms = as_forms(forms)
    if not forms:
        return np.zeros_like(np.asarray(phi, dtype=float))
    return np.max([indicator(f, phi) for f in forms], axis=0)


def support(forms, phi):
    """max_j (α_j cos φ + β_j sin φ), the unclamped indicator."""
    forms = as_forms(forms)
    return np.max(
        [f.alpha * np.cos(phi) + f.beta * np.sin(phi) for f in forms], axis=0
    )


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Monotone-chain hull; counter-clockwise vertices without repeats.
    Collinear input gives its two endpoints, a single point gives itself.
    """
    pts = sorted(set((float(x) + 0.0, float(y) + 0.0) for x, y in points))
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or all(
        abs(_cross(hull[0], hull[1], p)) <= 1e-15 for p in hull[2:]
    ):
        return [pts[0], pts[-1]]
    return hull


class Polygon(object):
    """A convex polygon in the (α, β) plane, possibly degenerate."""

    def __init__(self, vertices):
        self.vertices = convex_hull(vertices)
        if not self.vertices:
            raise ValueError("polygon needs at least one vertex")

    @property
    def dimension(self):
        return min(len(self.vertices) - 1, 2)

    def centroid(self):
        v = np.array(self.vertices)
        return tuple(float(c) + 0.0 for c in v.mean(axis=0))

    def translated(self, shift):
        return Polygon([(x + shift[0], y + shift[1]) for x, y in self.vertices])

    def membership(self, point, tol=Tolerance.HULL_MEMBERSHIP):
        """Interior, boundary or exterior of the closed polygon. Segments and
        points have no interior.
        """
        px, py = point
        v = self.vertices
        if self.dimension == 0:
            d = math.hypot(px - v[0][0], py - v[0][1])
            return Membership.Boundary.value if d <= tol else Membership.Exterior.value
        if self.dimension == 1:
            (ax, ay), (bx, by) = v
            length = math.hypot(bx - ax, by - ay)
            ux, uy = (bx - ax) / length, (by - ay) / length
            t = (px - ax) * ux + (py - ay) * uy
            perp = abs(-(px - ax) * uy + (py - ay) * ux)
            if perp <= tol and -tol <= t <= length + tol:
                return Membership.Boundary.value
            return Membership.Exterior.value
        dists = []
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            dists.append(_cross(a, b, (px, py)) / length)
        worst = min(dists)
        if worst > tol:
            return Membership.Interior.value
        if worst >= -tol:
            return Membership.Boundary.value
        return Membership.Exterior.value

    def contains(self, point, tol=Tolerance.HULL_MEMBERSHIP):
        return self.membership(point, tol) != Membership.Exterior.value


ZeroSet = namedtuple("ZeroSet", ["kind", "angles", "arc"])


def _wrap(angle):
    return math.fmod(math.fmod(angle, TWO_PI) + TWO_PI, TWO_PI) + 0.0


def classify_zero_set(forms, tol=1e-12):
    """Where the indicator I_{W_j} vanishes: nowhere, at isolated angles, or
    on a closed arc. The zero set is the set of directions making a
    non-acute angle with every (α_j, β_j), found from the largest angular
    gap between the form directions.
    """
    forms = as_forms(forms)
    if not forms:
        raise ValueError("at least one form is needed")
    angles = sorted(
        _wrap(math.atan2(f.beta, f.alpha)) for f in forms if math.hypot(*f) > tol
    )
    if not angles:
        return ZeroSet(ZeroSetKind.Segment.value, [], (0.0, TWO_PI))
    gaps = []
    for i, a in enumerate(angles):
        b = angles[(i + 1) % len(angles)]
        gap = b - a if i + 1 < len(angles) else b + TWO_PI - a
        gaps.append((gap, a))
    wide = max(g for g, _ in gaps)
    if wide < math.pi - tol:
        return ZeroSet(ZeroSetKind.StrictlyPositive.value, [], None)
    if wide > math.pi + tol:
        start = next(a for g, a in gaps if g == wide)
        return ZeroSet(
            ZeroSetKind.Segment.value,
            [],
            (_wrap(start + math.pi / 2), _wrap(start + wide - math.pi / 2)),
        )
    points = sorted(
        _wrap(a + math.pi / 2) for g, a in gaps if abs(g - math.pi) <= tol
    )
    return ZeroSet(ZeroSetKind.IsolatedPoints.value, points, None)


class GrowthProfile(object):
    def __init__(self, forms):
        self.forms = as_forms(forms)
        if not self.forms:
            raise ValueError("at least one form is needed")
        self.polygon = Polygon([(-f.alpha, -f.beta) for f in self.forms])
        self.zero_set = classify_zero_set(self.forms)

    @property
    def stable(self):
        return self.polygon.dimension == 2

    def membership(self, W, tol=Tolerance.HULL_MEMBERSHIP):
        return self.polygon.membership(tuple(W), tol)

    def to_dict(self):
        return {
            "vertices": [[a, b] for a, b in self.polygon.vertices],
            "dimension": self.polygon.dimension,
            "stable": self.stable,
            "zero_set": {
                "kind": self.zero_set.kind,
                "angles": list(self.zero_set.angles),
                "arc": list(self.zero_set.arc) if self.zero_set.arc else None,
            },
            "minimal_representative": list(minimal_zero_representative(self.forms)),
        }


def polygon_T(forms):
    """T = conv{−(α_j, β_j)} with its stability class and zero set."""
    return GrowthProfile(forms)


def positive_forms(c):
    """Real forms (α_j, β_j) of the positive terms of a real exponential sum."""
    out = []
    for kappa, form in c.terms:
        if kappa.real > 0 and abs(kappa.imag) <= Tolerance.REALITY * abs(kappa):
            out.append(RealLinearForm(*form.real_parts()))
    return out


def indicator_membership(forms, W, n_angles=360, tol=Tolerance.HULL_MEMBERSHIP):
    """W ∈ T tested through min_φ max_j (v_j + W)·u(φ) ≥ 0 on sampled
    angles plus the vertex normals of T.
    """
    forms = as_forms(forms)
    shifted = [f + W for f in forms]
    phi = list(np.linspace(0.0, TWO_PI, n_angles, endpoint=False))
    hull = convex_hull([(f.alpha, f.beta) for f in shifted])
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if a != b:
            phi.append(math.atan2(b[1] - a[1], b[0] - a[0]) - math.pi / 2)
    values = support(shifted, np.array(phi))
    return float(np.min(values)) >= -tol


def minimal_zero_representative(forms):
    """The gauge W minimising the zero set of the shifted indicator: the
    vertex centroid of T, so that 0 lies in the relative interior of the
    shifted family {W_j + W}.
    """
    forms = as_forms(forms)
    return RealLinearForm(*Polygon([(-f.alpha, -f.beta) for f in forms]).centroid())


GaugePhase = namedtuple("GaugePhase", ["a", "b"])


def gauge_shift(c, W):
    """c′ = e^{αx+βy}·c, and the phase e^{i(ax + by)} with
    (a, b) = (−β/2, α/2) that carries zero modes of the shifted operators
    back to zero modes of the original ones.
    """
    W = RealLinearForm(*W)
    shifted = c.shifted(W.complex_form())
    return shifted, GaugePhase(-W.beta / 2.0 + 0.0, W.alpha / 2.0 + 0.0)


def _phase(variant, W):
    alpha, beta = W
    if variant == PhaseVariant.Derived.value:
        return lambda X, Y: np.exp(0.5j * (alpha * Y - beta * X))
    if variant == PhaseVariant.Conclusion.value:
        return lambda X, Y: np.exp(-0.5j * (alpha * Y - beta * X))
    if variant == PhaseVariant.Section1.value:
        return lambda X, Y: np.exp(-0.5j * (alpha * X - beta * Y))
    raise ValueError("unknown phase variant %r" % variant)


def potential(c):
    """Φ = ½ ln c as a sampler, for real positive c."""

    def Phi(X, Y):
        log_mag, _ = c.log_evaluate(X, Y)
        return 0.5 * log_mag

    return Phi


def _check_positive(c):
    report = expsum.classify_reality(c)
    if not report.is_real or not c.is_real_exponential():
        raise errors.NotReal("ground states need a real exponential sum")
    if any(l.kind != TermKind.Exponential.value for l in report.labels) or any(
        kappa.real <= 0 for kappa in c.kappas
    ):
        raise errors.NotPositive("ground states need all coefficients positive")


class GroundState(object):
    """Ψ_W = phase/√c′ (sector L−) or phase·√c′ (sector L+), c′ = e^W·c."""

    def __init__(self, c, W, sector, variant):
        self.c = c
        self.W = RealLinearForm(*W)
        self.sector = sector
        self.variant = variant
        self.shifted, _ = gauge_shift(c, self.W)
        self._phase = _phase(variant, self.W)
        self.membership = polygon_T(positive_forms(c)).membership(self.W)
        self.residual = None

    def __call__(self, X, Y):
        log_mag, _ = self.shifted.log_evaluate(X, Y)
        power = -0.5 if self.sector == Sector.Minus.value else 0.5
        with np.errstate(over="ignore", under="ignore"):
            return self._phase(X, Y) * np.exp(power * log_mag)

    def metadata(self):
        return {
            "W": list(self.W),
            "sector": self.sector,
            "phase_variant": self.variant,
            "membership": self.membership,
            "selection_residual": self.residual,
        }


def _selection_residual(c, W, sector, variant, center=(0.3, 0.2), h=0.01):
    grid = numerics.Grid2D(center[0] - 4 * h, center[1] - 4 * h, h, h, 9, 9)
    state = GroundState(c, W, sector, variant)
    X, Y = grid.mesh()
    out = numerics.fd_apply_pauli(potential(c), state, sector, grid)
    return float(np.max(np.abs(out)) / np.max(np.abs(state(X, Y))))


def ground_state(c, W, sector=Sector.Minus.value):
    """Zero mode Ψ_W of L_− (or L_+) for a real all-positive c.

    The phase is chosen among the candidate conventions by the size of
    the finite-difference residual, and recorded in the metadata.
    """
    if sector not in Sector.values():
        raise ValueError("sector must be one of %s, got %r" % (Sector.values(), sector))
    _check_positive(c)
    W = RealLinearForm(*W)
    residuals = [
        (_selection_residual(c, W, sector, v), v) for v in PhaseVariant.values()
    ]
    best = min(residuals, key=lambda r: r[0])
    state = GroundState(c, W, sector, best[1])
    state.residual = best[0]
    logging.debug(
        "phase residuals %s, selected %s" % (residuals, best[1])
    )
    if state.membership == Membership.Exterior.value and sector == Sector.Minus.value:
        logging.warning("W = %s lies outside T; the ground state is unbounded" % (W,))
    return state


def current_density(psi, Phi, grid, threshold=Tolerance.PSI_MASK):
    """j = Im(Ψ̄ (∇ − i𝔸)Ψ) with 𝔸 = (Φ_y, −Φ_x), the potential of the
    covariant derivatives ∂x − iΦ_y, ∂y + iΦ_x.

    :return: (jx, jy, mask), NaN where |Ψ| < threshold (mask True there).
    """
    X, Y = grid.mesh()
    u = psi(X, Y)
    ux, uy = numerics.gradient(psi, grid)
    Fx, Fy = numerics.gradient(Phi, grid)
    density = np.abs(u) ** 2
    jx = np.imag(np.conj(u) * ux) - Fy * density
    jy = np.imag(np.conj(u) * uy) + Fx * density
    mask = np.abs(u) < threshold
    if np.any(mask):
        logging.info("current masked at %d points where Ψ vanishes" % mask.sum())
    jx = np.where(mask, np.nan, jx)
    jy = np.where(mask, np.nan, jy)
    return jx, jy, mask


def total_current(psi, Phi, grid):
    jx, jy, _ = current_density(psi, Phi, grid)
    cell = grid.hx * grid.hy
    return float(np.nansum(jx) * cell), float(np.nansum(jy) * cell)


def l2_mass_profile(psi, radii, h=0.1, tol=Tolerance.L2_INCREMENT):
    """Masses ∬_{|x|≤R} |Ψ|² for growing R, and whether the last relative
    increment is below ``tol``.
    """
    radii = sorted(radii)
    grid = numerics.Grid2D.centered(radii[-1], h)
    X, Y = grid.mesh()
    density = np.abs(psi(X, Y)) ** 2
    r = np.hypot(X, Y)
    masses = [float(np.sum(density[r <= R]) * h * h) for R in radii]
    increment = abs(masses[-1] - masses[-2]) / masses[-1] if len(masses) > 1 else None
    converged = increment is not None and increment < tol
    return masses, increment, converged


def boundedness_oracle(c, W, radius=40.0, n=401):
    """log max of 1/c′ on an n×n grid of the given radius. Stays O(1) for W
    in T and grows linearly with the radius outside.
    """
    shifted, _ = gauge_shift(c, W)
    h = 2.0 * radius / (n - 1)
    X, Y = numerics.Grid2D(-radius, -radius, h, h, n, n).mesh()
    log_mag, _ = shifted.log_evaluate(X, Y)
    return float(np.max(-log_mag))


MixedClassReport = namedtuple(
    "MixedClassReport",
    ["admissible", "violations", "positive_forms", "sign_flipped", "zeros_detected", "min_value"],
)


def split_mixed_class(c):
    """Positive exponential forms, and every other linear form: negative
    exponential terms plus the real envelopes Re W of paired terms.
    """
    report = expsum.classify_reality(c)
    positive, others = [], []
    for (kappa, form), label in zip(c.terms, report.labels):
        alpha, beta = form.real_parts()
        if label.kind == TermKind.Exponential.value and kappa.real > 0:
            positive.append(RealLinearForm(alpha, beta))
        elif label.kind == TermKind.Trigonometric.value and label.partner is None and kappa.real > 0:
            positive.append(RealLinearForm(alpha, beta))
        else:
            others.append(RealLinearForm(alpha, beta))
    return positive, others


def mixed_class_admissibility(
    positive, others, c=None, grid=None, allow_sign_flip=False, tol=Tolerance.HULL_MEMBERSHIP
):
    """Check that every remaining form is dominated by the indicator of the
    positive part: I_W ≤ I_{W_j+} ⇔ W ∈ conv({0} ∪ {W_j+}). Optionally scan
    c on a grid for zeros (reported, not forbidden).
    """
    positive = as_forms(positive)
    others = as_forms(others)
    flipped = False
    if not positive:
        if allow_sign_flip and others:
            positive, others, flipped = others, [], True
            c = c.scaled(-1.0) if c is not None else None
        else:
            raise errors.EmptyPositivePart("no positive terms to define the indicator")
    region = Polygon([(0.0, 0.0)] + [(f.alpha, f.beta) for f in positive])
    violations = [f for f in others if not region.contains(f, tol)]
    zeros, min_value = None, None
    if c is not None and grid is not None:
        X, Y = grid.mesh()
        values = c.evaluate(X, Y).real
        min_value = float(np.min(values))
        sign_change = np.any(np.diff(np.sign(values), axis=0) != 0) or np.any(
            np.diff(np.sign(values), axis=1) != 0
        )
        zeros = bool(min_value <= 0 or sign_change)
    return MixedClassReport(
        not violations, violations, positive, flipped, zeros, min_value
    )
