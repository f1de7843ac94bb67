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

"""The invariant suites behind ``magpauli verify``.

Every check returns a residual and the threshold it must stay under;
a check that raises is recorded as failed with the error message.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from magpauli import elliptic, expsum, flux, genus1, growth, numerics
from magpauli.core import errors
from magpauli.core.constants import Defaults, Membership, PhaseVariant, Sector, Suite

Check = namedtuple("Check", ["suite", "name", "residual", "threshold", "passed", "detail"])

EXAMPLE2_A = 546.0 / 3125.0
EXAMPLE2_B = 2574.0 / 3125.0


def example2_data():
    return expsum.SpectralDataG0(
        [0, 5, -10j, -5, 10j], [0, 5, 10j, -5, -10j], [2, 1j, -2, -1j]
    )


def example1_sum():
    """c = 1 + e^y."""
    return expsum.ExponentialSum.from_real([(1.0, 0.0, 0.0), (1.0, 0.0, 1.0)])


def example3_sum():
    """c = e^x + e^y + e^{−x−y}."""
    return expsum.ExponentialSum.from_real(
        [(1.0, 1.0, 0.0), (1.0, 0.0, 1.0), (1.0, -1.0, -1.0)]
    )


def closing_example_sum():
    """c = e^y + e^{y−2x} + e^{−y−2x}."""
    return expsum.ExponentialSum.from_real(
        [(1.0, 0.0, 1.0), (1.0, -2.0, 1.0), (1.0, -2.0, -1.0)]
    )


def _run(suite, name, threshold, func):
    try:
        residual, detail = func()
    except errors.MagpauliError as e:
        logging.warning("check %s/%s raised %s" % (suite, name, e))
        return Check(suite, name, float("nan"), threshold, False, "%s: %s" % (type(e).__name__, e))
    residual = float(residual)
    passed = math.isfinite(residual) and residual <= threshold
    return Check(suite, name, residual, threshold, passed, detail)


def _amplitudes(c):
    """(constant, cos(10y) amplitude, cos(20x) amplitude) of the example2 sum."""
    const = a = b = 0.0
    for kappa, form in c.terms:
        if abs(form.p) < 1e-12 and abs(form.k) < 1e-12:
            const += kappa.real
        elif abs(abs(form.p) - 5) < 1e-9:
            a += kappa.real
        else:
            b += kappa.real
    return const, a, b


def _example2_amplitudes():
    c = expsum.build_exponential_sum(example2_data())
    const, a, b = _amplitudes(c)
    residual = max(abs(a - EXAMPLE2_A) / EXAMPLE2_A, abs(b - EXAMPLE2_B) / EXAMPLE2_B)
    return residual, "c = %.17g + %.17g cos(10y) + %.17g cos(20x)" % (const, a, b)


def _example2_residues():
    report = expsum.check_residues(example2_data(), s=-1.0)
    return report.max_mismatch, "s = -1"


def _polygon_vertices(c, expected):
    vertices = growth.polygon_T(growth.positive_forms(c)).polygon.vertices
    if len(vertices) != len(expected):
        return float("inf"), "vertices %s" % (vertices,)
    got = np.array(sorted(vertices))
    want = np.array(sorted(expected), dtype=float)
    return float(np.max(np.abs(got - want))), "vertices %s" % (vertices,)


def _distance_to_boundary(polygon, point):
    v = polygon.vertices
    best = float("inf")
    for i in range(len(v)):
        a, b = np.array(v[i]), np.array(v[(i + 1) % len(v)])
        t = np.clip(np.dot(point - a, b - a) / np.dot(b - a, b - a), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(point - (a + t * (b - a)))))
    return best


def _off_boundary(polygon, W, margin=0.1, step=0.05):
    """Push W away from the boundary of ``polygon``: inward when it is in
    the closed polygon, outward otherwise.
    """
    if _distance_to_boundary(polygon, W) >= margin:
        return W
    centre = np.array(polygon.centroid())
    inside = polygon.membership(tuple(W)) != Membership.Exterior.value
    direction = centre - W if inside else W - centre
    direction = direction / np.linalg.norm(direction)
    while _distance_to_boundary(polygon, W) < margin:
        W = W + step * direction
    return W


def _membership_oracle(radius=40.0, n=401, bound=2.0):
    c = example3_sum()
    profile = growth.polygon_T(growth.positive_forms(c))
    disagreements, points, moved = 0, 0, 0
    for a in np.linspace(-1.2, 1.2, 5):
        for b in np.linspace(-1.2, 1.2, 5):
            W = _off_boundary(profile.polygon, np.array([a, b]))
            moved += int(W[0] != a or W[1] != b)
            points += 1
            inside = profile.membership(W) == Membership.Interior.value
            bounded = growth.boundedness_oracle(c, W, radius, n) < bound
            disagreements += int(inside != bounded)
    return disagreements, "%d points, %d moved off the boundary" % (points, moved)


def example2_positive_sum():
    """(1/625)(1 − A cos(10y) − B cos(20x)), positive with minimum 1/625²."""
    scale = 1.0 / 625.0
    a = scale * EXAMPLE2_A / 2.0
    b = scale * EXAMPLE2_B / 2.0
    return expsum.ExponentialSum(
        [
            (scale, numerics.ComplexLinearForm(0, 0)),
            (-a, numerics.ComplexLinearForm(5, 5)),
            (-a, numerics.ComplexLinearForm(-5, -5)),
            (-b, numerics.ComplexLinearForm(10j, -10j)),
            (-b, numerics.ComplexLinearForm(-10j, 10j)),
        ]
    )


def random_stable_sum(seed, terms=4):
    """An all-positive real exponential sum whose polygon T is 2D."""
    rng = np.random.default_rng(seed)
    while True:
        triples = [
            (rng.uniform(0.5, 2.0), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            for _ in range(terms)
        ]
        c = expsum.ExponentialSum.from_real(triples)
        if growth.polygon_T(growth.positive_forms(c)).stable:
            return c


def interior_gauges(c, count, seed):
    """``count`` points of the interior of T: convex weights bounded below."""
    vertices = np.array(growth.polygon_T(growth.positive_forms(c)).polygon.vertices)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        weights = 0.5 / len(vertices) + 0.5 * rng.dirichlet(np.ones(len(vertices)))
        a, b = weights @ vertices
        out.append((float(a), float(b)))
    return out


def _zero_mode(c, W):
    if c.is_real_exponential():
        return growth.ground_state(c, W, Sector.Minus.value)
    # positive trigonometric sums: T is a point, so no gauge is interior
    return growth.GroundState(c, W, Sector.Minus.value, PhaseVariant.Derived.value)


def richardson_ratio(c, W, center=(0.3, 0.2), h=0.02):
    """‖L_−Ψ_W‖∞ at h over the same at h/2, on a fixed 0.16-wide patch."""
    state = _zero_mode(c, W)
    Phi = growth.potential(c)
    norms = []
    for step in (h, h / 2):
        n = int(round(0.16 / step)) + 1
        grid = numerics.Grid2D(
            center[0] - 0.08, center[1] - 0.08, step, step, n, n
        )
        norms.append(float(np.max(np.abs(numerics.fd_apply_pauli(Phi, state, Sector.Minus.value, grid)))))
    return norms[0] / norms[1]


def richardson_cases():
    """(name, c, gauges W, patch centre) of the zero-mode convergence check."""
    example3 = example3_sum()
    cases = [
        ("example1", example1_sum(), [(0.0, -t) for t in (0.1, 0.3, 0.5, 0.7, 0.9)], (0.3, 0.2)),
        (
            "example2",
            example2_positive_sum(),
            [(0.0, 0.0), (0.2, 0.0), (-0.2, 0.0), (0.0, 0.2), (0.0, -0.2)],
            # where c is largest, away from the sharp minimum at the origin
            (math.pi / 20, math.pi / 10),
        ),
        ("example3", example3, interior_gauges(example3, 5, seed=1), (0.3, 0.2)),
    ]
    for i, seed in enumerate((11, 12)):
        c = random_stable_sum(seed)
        cases.append(("random%d" % (i + 1), c, interior_gauges(c, 5, seed), (0.3, 0.2)))
    return cases


def _richardson():
    worst, detail = 0.0, []
    for name, c, gauges, center in richardson_cases():
        ratios = [richardson_ratio(c, W, center) for W in gauges]
        detail.append("%s: %s" % (name, " ".join("%.3f" % r for r in ratios)))
        worst = max([worst] + [abs(r - 4.0) for r in ratios])
    return worst, "; ".join(detail)


def genus0_checks():
    suite = Suite.Genus0.value
    return [
        _run(suite, "example2_amplitudes", 1e-12, _example2_amplitudes),
        _run(suite, "example2_residues", 1e-10, _example2_residues),
        _run(
            suite,
            "example1_polygon",
            1e-14,
            lambda: _polygon_vertices(example1_sum(), [(0, 0), (0, -1)]),
        ),
        _run(
            suite,
            "example3_polygon",
            1e-14,
            lambda: _polygon_vertices(example3_sum(), [(-1, 0), (0, -1), (1, 1)]),
        ),
        _run(suite, "example3_membership_oracle", 0, _membership_oracle),
        _run(suite, "zero_mode_richardson", 0.5, _richardson),
    ]


def _q_log():
    worst = max(abs(flux.q_integral(0, a) - math.log1p(a)) for a in (0.1, 1.0, 10.0))
    return worst, "Q_0(a) = ln(1 + a)"


def _q_factorial():
    a = 1e-6
    worst = max(
        abs(flux.q_integral(k, a) / a / math.factorial(k) - 1.0) for k in range(6)
    )
    return worst, "Q_k(a)/a -> k!"


def _decay(c):
    r20, r40 = flux.regularized_flux(c, 20.0), flux.regularized_flux(c, 40.0)
    r80 = flux.regularized_flux(c, 80.0)
    worst = max(abs(r40) / abs(r20), abs(r80) / abs(r40))
    return worst, "R = 20, 40, 80: %.6g %.6g %.6g" % (r20, r40, r80)


def _disk_ratio(c, R=40.0):
    leading = -0.5 * R * flux.indicator_integral(flux.gauge_fixed_forms(c))
    ratio = flux.disk_flux(c, R) / leading
    return abs(ratio - 1.0), "ratio %.6f" % ratio


def _asymptotic_remainder():
    c = example3_sum()
    gaps = [
        abs(flux.regularized_flux(c, R) - flux.flux_asymptotic(c, R, 1)) for R in (40.0, 80.0)
    ]
    return gaps[1] / gaps[0], "remainders %.3e %.3e" % tuple(gaps)


def flux_checks():
    suite = Suite.Flux.value
    return [
        _run(suite, "q_integral_log", 1e-10, _q_log),
        _run(suite, "q_integral_factorial", 0.01, _q_factorial),
        _run(
            suite,
            "indicator_integral_pair",
            1e-12,
            lambda: (abs(flux.indicator_integral([(0, 1), (0, -1)]) - 4.0), "{y, -y}"),
        ),
        _run(suite, "regularized_decay_example3", 0.7, lambda: _decay(example3_sum())),
        _run(suite, "regularized_decay_closing", 0.7, lambda: _decay(closing_example_sum())),
        _run(suite, "disk_flux_leading_term", 0.05, lambda: _disk_ratio(closing_example_sum())),
        _run(suite, "first_order_remainder", 1.0 / 3.0, _asymptotic_remainder),
    ]


def _random_points(ctx, count, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2, 2, count) * ctx.omega1 + 1j * rng.uniform(-2, 2, count) * ctx.omega2.imag


def _weierstrass():
    worst, detail = 0.0, []
    for omega2 in (1j, 2j):
        ctx = elliptic.WeierstrassContext(elliptic.Lattice(1.0, omega2))
        residuals = ctx.quasi_period_residuals(_random_points(ctx, 100, 7))
        worst = max([worst, ctx.legendre_residual] + residuals)
        detail.append("omega2=%s" % omega2)
    return worst, ", ".join(detail)


def _lemniscatic():
    ctx = elliptic.WeierstrassContext(elliptic.Lattice(1.0, 1j))
    return abs(ctx.eta1 - math.pi / 4), "eta1 = %.17g" % ctx.eta1


def _sigma_zeros():
    ctx = elliptic.WeierstrassContext(elliptic.Lattice(1.0, 1j))
    count = genus1.zero_count(ctx.sigma, ctx, origin=(-0.93, -0.97))
    return abs(count - 1), "zeros in the cell: %d" % count


def _reality():
    ctx = elliptic.WeierstrassContext()
    field = genus1.build_canonical(ctx, genus1.periodic_terms(ctx, 1.3 + 0.2j))
    _, imag = genus1.positivity_scan(field, ctx, n=101)
    return imag, "type (1, 1) sum on a 101x101 cell grid"


def compatibility_example(ctx):
    return genus1.GenusOneData(
        ctx,
        Q=[0.3 + 0.2j, -0.4 + 0.5j, 0.7 - 0.3j],
        R=[0.2 - 0.6j, 0.5 + 0.4j, -0.3 - 0.2j],
        Dprime=[0.15 + 0.35j, -0.25 - 0.45j, 0.55 + 0.1j],
        P=0.35 - 0.25j,
    )


def _compatibility():
    ctx = elliptic.WeierstrassContext()
    data = compatibility_example(ctx)
    worst = max(genus1.compatibility_residual(data, z) for z in (0.0, 0.3 + 0.1j, -0.6 + 0.45j))
    return worst, "n = 2"


def _periodicity():
    ctx = elliptic.WeierstrassContext()
    result = genus1.periodicity_search(ctx, 0, 0, 1.5 + 0.1j)
    field = genus1.build_canonical(ctx, result.terms)
    cell = genus1.cell_flux(field, ctx)
    worst = max(result.periodicity_residual, abs(cell.quanta - 1.0))
    if result.equation_residual > 1e-10:
        worst = float("inf")
    return worst, "lambda = %s, flux/2pi = %.12f" % (result.lam, cell.quanta)


def periodic_bloch_model(ctx, P=0.31 + 0.17j):
    result = genus1.periodicity_search(ctx, 0, 0, 1.5 + 0.1j)
    field = genus1.build_canonical(ctx, result.terms)
    return genus1.BlochModel.from_canonical(ctx, field, P)


def _bloch_locus():
    ctx = elliptic.WeierstrassContext()
    model = periodic_bloch_model(ctx)
    samples = model.sample_points()
    deviation = genus1.bloch_multipliers(model, 0.4 + 0.3j, samples).deviation
    p = genus1.unitarity_locus_point(model, 0.4 + 0.3j, samples)
    locus = genus1.bloch_multipliers(model, p, samples)
    off_locus = max(abs(abs(locus.kx) - 1), abs(abs(locus.ky) - 1))
    return max(deviation, off_locus), "locus point p = %s" % p


def _unitarize(count=Defaults.UNITARIZE_SAMPLES):
    ctx = elliptic.WeierstrassContext()
    model = periodic_bloch_model(ctx)
    samples = model.sample_points()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(count):
        q = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
        res = genus1.unitarize(model, q, genus1.bloch_multipliers(model, q, samples))
        worst = max(worst, abs(abs(res.kx) - 1), abs(abs(res.ky) - 1))
    return worst, "%d random p" % count


def genus1_checks():
    suite = Suite.Genus1.value
    return [
        _run(suite, "weierstrass_quasi_periodicity", 1e-10, _weierstrass),
        _run(suite, "lemniscatic_eta1", 1e-10, _lemniscatic),
        _run(suite, "sigma_zero_count", 0, _sigma_zeros),
        _run(suite, "type11_reality", 1e-10, _reality),
        _run(suite, "compatibility_round_trip", 1e-9, _compatibility),
        _run(suite, "periodic_field_one_quantum", 1e-6, _periodicity),
        _run(suite, "bloch_unitarity_locus", 1e-9, _bloch_locus),
        _run(suite, "unitarized_multipliers", 1e-10, _unitarize),
    ]


SUITES = {
    Suite.Genus0.value: genus0_checks,
    Suite.Genus1.value: genus1_checks,
    Suite.Flux.value: flux_checks,
}


def run_suite(suite=Suite.All.value):
    if not Suite.valid(suite):
        raise ValueError("unknown suite %r" % suite)
    names = sorted(SUITES) if suite == Suite.All.value else [suite]
    checks = []
    for name in names:
        logging.info("running the %s suite" % name)
        checks.extend(SUITES[name]())
    return checks


def format_report(checks):
    lines = []
    for c in checks:
        lines.append(
            "%-7s %-32s residual=%-11.4g threshold=%-9.3g %s  %s"
            % (c.suite, c.name, c.residual, c.threshold, "PASS" if c.passed else "FAIL", c.detail)
        )
    failed = sum(1 for c in checks if not c.passed)
    lines.append("%d checks, %d failed" % (len(checks), failed))
    return "\n".join(lines) + "\n"
