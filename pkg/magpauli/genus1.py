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

"""Genus-one constructions on an elliptic curve with one marked infinity
per sheet: Baker–Akhiezer functions ψ′, ψ″, the generating function c and
its nonsingular part c̃, sums of σ-product terms with their reality types,
the search for doubly periodic fields, Bloch multipliers and the magnetic
Bloch gauge, and the flux through an elementary cell.

Points are complex numbers taken modulo the lattice of the context.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from magpauli import numerics
from magpauli.core import errors
from magpauli.core.constants import Defaults, Tolerance


def _scalar(value):
    value = np.asarray(value)
    return value[()] if value.ndim == 0 else value


def _check_off_lattice(ctx, w, name):
    if np.any(ctx.lattice.contains(w)):
        raise errors.PoleHit("%s lies on the lattice: %s" % (name, w))


class GenusOneData(object):
    """Intersection points Q_s ∈ Γ′, R_s ∈ Γ″ (s = 0..n), the divisor
    P_1..P_{n+1} on Γ′ and the point P on Γ″.
    """

    def __init__(self, ctx, Q, R, Dprime, P):
        self.ctx = ctx
        self.Q = [complex(q) for q in Q]
        self.R = [complex(r) for r in R]
        self.Dprime = [complex(d) for d in Dprime]
        self.P = complex(P)
        if not self.Q:
            raise errors.DegenerateData("at least one intersection point is needed")
        if not len(self.Q) == len(self.R) == len(self.Dprime):
            raise errors.DegenerateData(
                "Q, R and the divisor need n+1 points each, got %d, %d, %d"
                % (len(self.Q), len(self.R), len(self.Dprime))
            )
        lattice = ctx.lattice
        for name, points in (("Q", self.Q), ("R", self.R), ("D'", self.Dprime)):
            for i, w in enumerate(points):
                if lattice.contains(w):
                    raise errors.DegenerateData("%s_%d is congruent to 0" % (name, i))
        if lattice.contains(self.P):
            raise errors.DegenerateData("P is congruent to 0")
        for s in range(len(self.Q)):
            for t in range(s + 1, len(self.Q)):
                if lattice.contains(self.Q[s] - self.Q[t]):
                    raise errors.DegenerateData("Q_%d and Q_%d coincide mod the lattice" % (s, t))
            if lattice.contains(self.R[s] + self.P):
                raise errors.DegenerateData("R_%d + P lies on the lattice" % s)
        self.Sigma = sum(self.Q) + sum(self.Dprime)
        if lattice.contains(self.Sigma):
            raise errors.DegenerateData("Q_0 + ... + Q_n + P_1 + ... + P_{n+1} lies on the lattice")
        self.A = [self.Sigma - q for q in self.Q]

    @property
    def n(self):
        return len(self.Q) - 1

    def _S(self, s):
        sig = self.ctx.sigma
        num = np.prod([sig(self.Q[s] + d) for d in self.Dprime])
        den = sig(self.R[s] + self.P) * np.prod(
            [sig(self.Q[s] - self.Q[t]) for t in range(len(self.Q)) if t != s]
        )
        return num / den

    def constants(self):
        """(S_s, K_s) for every s, where K_s is the z-free factor of the
        s-th term of c̃.
        """
        sig = self.ctx.sigma
        den = np.prod([sig(d) for d in self.Dprime])
        out = []
        for s in range(len(self.Q)):
            S = self._S(s)
            others = np.prod([sig(-self.Q[t]) for t in range(len(self.Q)) if t != s])
            out.append((S, sig(self.P) * others / den * S))
        return out


def _psi_second(ctx, P, p, z):
    _check_off_lattice(ctx, p, "p")
    _check_off_lattice(ctx, p + P, "p + P")
    z = np.asarray(z, dtype=complex)
    _check_off_lattice(ctx, z + P, "z + P")
    log = (
        -z * ctx.zeta(p)
        + ctx.log_sigma(p + z + P)
        + ctx.log_sigma(P)
        - ctx.log_sigma(z + P)
        - ctx.log_sigma(p + P)
    )
    return _scalar(np.exp(log))


def psi_second(data, p, z):
    """ψ″(p, z) = e^{−zζ(p)} σ(p+z+P)σ(P) / (σ(z+P)σ(p+P)), so ψ″(p, 0) = 1."""
    return _psi_second(data.ctx, data.P, p, z)


def _zbar(z, zbar):
    z = np.asarray(z, dtype=complex)
    return np.conj(z) if zbar is None else np.asarray(zbar, dtype=complex)


def compatibility_coeffs(data, z, zbar=None):
    """f_0..f_n making ψ′(Q_s) = ψ″(R_s) for every s."""
    ctx = data.ctx
    z = complex(z)
    zb = complex(_zbar(z, zbar))
    _check_off_lattice(ctx, z + data.P, "z + P")
    _check_off_lattice(ctx, zb + data.Sigma, "zbar + Sigma")
    out = []
    for s, (S, _) in enumerate(data.constants()):
        log = (
            -z * ctx.zeta(data.R[s])
            + zb * ctx.zeta(data.Q[s])
            + ctx.log_sigma(data.R[s] + z + data.P)
            + ctx.log_sigma(data.P)
            - ctx.log_sigma(zb + data.Sigma)
            - ctx.log_sigma(z + data.P)
        )
        out.append(complex(np.exp(log) * S))
    return np.array(out)


def psi_first(data, k, z, zbar=None, coeffs=None):
    """ψ′(k, z, z̄) on Γ′ with essential singularity e^{−z̄ζ(k)} at 0 and
    poles at −P_i.
    """
    ctx = data.ctx
    z = complex(z)
    zb = complex(_zbar(z, zbar))
    _check_off_lattice(ctx, k, "k")
    for d in data.Dprime:
        _check_off_lattice(ctx, k + d, "k + P_i")
    f = compatibility_coeffs(data, z, zb) if coeffs is None else coeffs
    sig = ctx.sigma
    den = np.prod([sig(k + d) for d in data.Dprime])
    total = 0j
    for s in range(len(data.Q)):
        others = np.prod([sig(k - data.Q[t]) for t in range(len(data.Q)) if t != s])
        total += sig(k + zb + data.A[s]) * others * f[s]
    return complex(np.exp(-zb * ctx.zeta(k)) * total / den)


def compatibility_residual(data, z, zbar=None):
    """max_s |ψ′(Q_s) − ψ″(R_s)| / max(1, |ψ″(R_s)|) at the point z."""
    f = compatibility_coeffs(data, z, zbar)
    worst = 0.0
    for s in range(len(data.Q)):
        first = psi_first(data, data.Q[s], z, zbar, coeffs=f)
        second = psi_second(data, data.R[s], z)
        worst = max(worst, abs(first - second) / max(1.0, abs(second)))
    return worst


def c_genus1(data, z, zbar=None):
    """The constant term c(z, z̄) of ψ′ at k = 0, i.e. ψ′ = e^{−z̄ζ(k)}(c + O(k))."""
    ctx = data.ctx
    zb = _zbar(z, zbar)
    z = np.asarray(z, dtype=complex)
    _check_off_lattice(ctx, z + data.P, "z + P")
    _check_off_lattice(ctx, zb + data.Sigma, "zbar + Sigma")
    return _scalar(
        c_tilde(data, z, zb) / (ctx.sigma(zb + data.Sigma) * ctx.sigma(z + data.P))
    )


def data_terms(data):
    """c̃ of the data as generic σ-product terms."""
    ctx = data.ctx
    out = []
    for s, (_, K) in enumerate(data.constants()):
        out.append(
            SigmaTerm(
                complex(K),
                complex(-ctx.zeta(data.R[s])),
                complex(ctx.zeta(data.Q[s])),
                data.R[s] + data.P,
                data.A[s],
            )
        )
    return out


def c_tilde(data, z, zbar=None):
    """c̃ = c·σ(z̄ + Σ)σ(z + P), finite for every z."""
    return SigmaSum(data.ctx, data_terms(data))(z, zbar)


# α·exp(a z + b z̄)·σ(z + r)·σ(z̄ + s)
SigmaTerm = namedtuple("SigmaTerm", ["alpha", "a", "b", "r", "s"])


class CanonicalTerm(namedtuple("CanonicalTerm", ["alpha", "R", "Q"])):
    """α·exp{−zζ(R) + z̄ζ(Q)}·σ(z + R)·σ(z̄ − Q)."""

    __slots__ = ()

    def __new__(cls, alpha, R, Q):
        return super(CanonicalTerm, cls).__new__(cls, complex(alpha), complex(R), complex(Q))

    def sigma_term(self, ctx):
        _check_off_lattice(ctx, self.R, "R")
        _check_off_lattice(ctx, self.Q, "Q")
        return SigmaTerm(
            self.alpha, complex(-ctx.zeta(self.R)), complex(ctx.zeta(self.Q)), self.R, -self.Q
        )

    def scaled(self, factor):
        return CanonicalTerm(self.alpha * factor, self.R, self.Q)


class SigmaSum(object):
    """Σ_q α_q exp(a_q z + b_q z̄) σ(z + r_q) σ(z̄ + s_q), evaluated in
    log-magnitude form like the genus-0 exponential sums.
    """

    def __init__(self, ctx, terms, canonical=None):
        self.ctx = ctx
        self.terms = list(terms)
        self.canonical = canonical
        if not self.terms:
            raise errors.EmptySum("a sigma sum needs at least one term")

    def _log_terms(self, z, zb):
        ctx = self.ctx
        logs = []
        for t in self.terms:
            with np.errstate(divide="ignore"):
                log_alpha = np.log(complex(t.alpha)) if t.alpha != 0 else complex(-np.inf)
            logs.append(
                log_alpha
                + t.a * z
                + t.b * zb
                + ctx.log_sigma(z + t.r)
                + ctx.log_sigma(zb + t.s)
            )
        logs = np.array(logs)
        L = np.where(np.isfinite(logs.real), logs.real, -np.inf)
        phase = np.exp(1j * np.where(np.isfinite(logs.imag), logs.imag, 0.0))
        return L, phase

    def log_evaluate(self, z, zbar=None):
        """(log|c̃|, c̃/|c̃|, cancelled mask)."""
        z = np.asarray(z, dtype=complex)
        zb = _zbar(z, zbar)
        L, phase = self._log_terms(z, zb)
        m, _, s = numerics.softmax_weights(L, phase)
        mag = np.abs(s)
        with np.errstate(divide="ignore"):
            log_mag = m + np.log(mag)
        unit = np.where(mag > 0, s / np.where(mag > 0, mag, 1.0), 1.0)
        return log_mag, unit, mag < Tolerance.CANCELLATION

    def __call__(self, z, zbar=None):
        log_mag, unit, _ = self.log_evaluate(z, zbar)
        with np.errstate(over="ignore"):
            return _scalar(np.exp(log_mag) * unit)

    def log_derivatives(self, z, zbar=None):
        """(∂ ln c̃, ∂̄ ln c̃, ∂∂̄ ln c̃, cancelled mask) from the term weights."""
        ctx = self.ctx
        z = np.asarray(z, dtype=complex)
        zb = _zbar(z, zbar)
        L, phase = self._log_terms(z, zb)
        _, shifted, s = numerics.softmax_weights(L, phase)
        cancelled = np.abs(s) < Tolerance.CANCELLATION
        safe = np.where(cancelled, 1.0, s)
        w = shifted / safe
        da = np.array([t.a + ctx.zeta_masked(z + t.r)[0] for t in self.terms])
        db = np.array([t.b + ctx.zeta_masked(zb + t.s)[0] for t in self.terms])
        d = np.sum(w * da, axis=0)
        dbar = np.sum(w * db, axis=0)
        ddbar = np.sum(w * da * db, axis=0) - d * dbar
        return d, dbar, ddbar, cancelled

    def field(self, z, sign=Defaults.FIELD_SIGN, on_zero="raise"):
        """B̃ = sign·2∂∂̄ ln c̃ = sign·½Δ ln c̃."""
        _, _, ddbar, cancelled = self.log_derivatives(z)
        if np.any(cancelled):
            if on_zero == "raise":
                raise errors.ZeroOfC("c_tilde vanishes at %s" % (np.asarray(z)[cancelled],))
            ddbar = np.where(cancelled, np.nan, ddbar)
        B = 2.0 * sign * ddbar
        bad = np.abs(B.imag) > Tolerance.REALITY * np.maximum(1.0, np.abs(B.real))
        if np.any(bad & ~cancelled):
            raise errors.NotReal(
                "B_tilde has an imaginary part of %.3e" % np.max(np.abs(B.imag[bad & ~cancelled]))
            )
        return _scalar(B.real)

    def log_gradient(self, z):
        """(∂_x ln c̃, ∂_y ln c̃) for real c̃."""
        d, dbar, _, _ = self.log_derivatives(z)
        return _scalar((d + dbar).real), _scalar((1j * (d - dbar)).real)


def build_canonical(ctx, terms):
    """The c̃ sampler of a sum of canonical terms."""
    terms = list(terms)
    if not terms:
        raise errors.EmptySum("a canonical sum needs at least one term")
    field = SigmaSum(ctx, [t.sigma_term(ctx) for t in terms], canonical=terms)
    typing = reality_types(terms)
    if not typing.is_real:
        logging.warning(
            "canonical sum is not real: unpaired terms %s" % (typing.unmatched,)
        )
    return field


def canonical_terms(data, tol=1e-9):
    """Rewrite c̃ of the data as a canonical sum in the shifted variable
    z + P: c̃(z) = Σ_s α_s e^{−(z+P)ζ(R_s) + (z̄+P̄)ζ(Q_s)} σ(z+P+R_s) σ(z̄+P̄−Q_s).
    Needs Q_0 + ... + Q_n + P_1 + ... + P_{n+1} = P̄.
    """
    ctx = data.ctx
    if abs(data.Sigma - data.P.conjugate()) > tol:
        raise errors.DegenerateData(
            "canonical form needs the reality condition sum = conj(P), got %s vs %s"
            % (data.Sigma, data.P.conjugate())
        )
    out = []
    for s, (_, K) in enumerate(data.constants()):
        alpha = K * np.exp(
            data.P * ctx.zeta(data.R[s]) - data.P.conjugate() * ctx.zeta(data.Q[s])
        )
        out.append(CanonicalTerm(complex(alpha), data.R[s], data.Q[s]))
    return out


def fit_alphas(ctx, terms, samples, values):
    """Least-squares α_q so that Σ α_q (term_q with α = 1) matches
    ``values`` at the sample points. Returns (alphas, residual).
    """
    samples = np.asarray(samples, dtype=complex)
    basis = np.array(
        [SigmaSum(ctx, [CanonicalTerm(1.0, t.R, t.Q).sigma_term(ctx)])(samples) for t in terms]
    ).T
    values = np.asarray(values, dtype=complex)
    alphas, _, _, _ = np.linalg.lstsq(basis, values, rcond=None)
    residual = float(np.max(np.abs(basis @ alphas - values)))
    return alphas, residual


RealityTyping = namedtuple(
    "RealityTyping", ["type1", "pairs", "unmatched", "is_real", "counts"]
)


def reality_types(terms, tol=1e-9):
    """Type each term: type 1 (α real, R = −Q̄) or one half of a type-2
    pair (α_l = ᾱ_j, R_l = −Q̄_j, Q_l = −R̄_j). counts = (k, l) with k type-1
    terms and l pairs.
    """
    terms = list(terms)
    type1, pairs, used = [], [], set()
    for j, t in enumerate(terms):
        if abs(t.alpha.imag) <= tol * max(1.0, abs(t.alpha)) and abs(
            t.R + t.Q.conjugate()
        ) <= tol:
            type1.append(j)
            used.add(j)
    for j, t in enumerate(terms):
        if j in used:
            continue
        for l in range(j + 1, len(terms)):
            u = terms[l]
            if l in used:
                continue
            if (
                abs(u.alpha - t.alpha.conjugate()) <= tol * max(1.0, abs(t.alpha))
                and abs(u.R + t.Q.conjugate()) <= tol
                and abs(u.Q + t.R.conjugate()) <= tol
            ):
                pairs.append((j, l))
                used.update((j, l))
                break
    unmatched = [j for j in range(len(terms)) if j not in used]
    return RealityTyping(type1, pairs, unmatched, not unmatched, (len(type1), len(pairs)))


def cell_grid(ctx, n, origin=None):
    """n×n points of the elementary cell (left-closed, right-open)."""
    x0, y0 = origin if origin is not None else (-ctx.omega1, -ctx.omega2.imag)
    xs = x0 + 2 * ctx.omega1 * np.arange(n) / n
    ys = y0 + 2 * ctx.omega2.imag * np.arange(n) / n
    X, Y = np.meshgrid(xs, ys)
    return X + 1j * Y


def positivity_scan(field, ctx, n=41):
    """(min Re c̃, max |Im c̃| / max |c̃|) over a cell grid."""
    values = field(cell_grid(ctx, n))
    scale = max(float(np.max(np.abs(values))), 1e-300)
    return float(np.min(values.real)), float(np.max(np.abs(values.imag)) / scale)


def periodicity_residual(field, ctx, n=7, sign=Defaults.FIELD_SIGN):
    """Relative change of B̃ under both period translations on a cell grid."""
    z = cell_grid(ctx, n).ravel() + complex(0.0123, 0.0311)
    B = field.field(z, sign, on_zero="nan")
    worst = 0.0
    for omega in ctx.omegas:
        shifted = field.field(z + 2 * omega, sign, on_zero="nan")
        ok = np.isfinite(B) & np.isfinite(shifted)
        if np.any(ok):
            scale = np.maximum(1.0, np.abs(B[ok]))
            worst = max(worst, float(np.max(np.abs(shifted[ok] - B[ok]) / scale)))
    return worst


def u_function(ctx, lam, t=0):
    """U_t(λ) = λη_t − ω_tζ(λ)."""
    return lam * ctx.etas[t] - ctx.omegas[t] * ctx.zeta(lam)


def period_multiplier(ctx, term, t):
    """The z-free factor a canonical term picks up under z → z + 2ω_t, up
    to a factor shared by all terms: exp{2U_t(R) − 2·conj U_t(Q̄)}.
    """
    return np.exp(
        2 * u_function(ctx, term.R, t) - 2 * np.conj(u_function(ctx, np.conj(term.Q), t))
    )


def periodicity_equations(ctx, lam, n, m):
    """Im U(λ) + πn/2 and Re V(λ) + πm/2 with U = λη₁ − ω₁ζ(λ) and
    V = λη′ − ω′ζ(λ), ω₂ = iω′, η₂ = iη′.
    """
    zeta = ctx.zeta(lam)
    U = lam * ctx.eta1 - ctx.omega1 * zeta
    V = lam * ctx.eta2.imag - ctx.omega2.imag * zeta
    return np.array([U.imag + math.pi * n / 2.0, V.real + math.pi * m / 2.0])


def periodic_terms(ctx, lam, alpha=1.0, beta=0.03):
    """The one-parameter family: a type-1 term with Q₀ = ω₁, R₀ = −ω₁ and
    a type-2 pair Q₁ = λ, R₁ = λ̄, Q₂ = −λ, R₂ = −λ̄. The sign of β makes
    the pair positive at z = ω₁, where the type-1 term vanishes.
    """
    lattice = ctx.lattice
    lam = complex(lam)
    for bad in (0.0, ctx.omega1, -ctx.omega1):
        if lattice.contains(lam - bad):
            raise errors.DegenerateData("lambda = %s is congruent to %s" % (lam, bad))
    if lattice.contains(2 * lam):
        raise errors.DegenerateData("2 lambda lies on the lattice for lambda = %s" % lam)
    pair = [
        CanonicalTerm(1.0, lam.conjugate(), lam),
        CanonicalTerm(1.0, -lam.conjugate(), -lam),
    ]
    at_zero = SigmaSum(ctx, [t.sigma_term(ctx) for t in pair])(complex(ctx.omega1))
    if abs(at_zero) < Tolerance.CANCELLATION:
        raise errors.DegenerateData("the pair vanishes at z = omega1 for lambda = %s" % lam)
    b = abs(beta) * math.copysign(1.0, complex(at_zero).real)
    return [
        CanonicalTerm(alpha, -ctx.omega1, ctx.omega1),
        CanonicalTerm(b, lam.conjugate(), lam),
        CanonicalTerm(b, -lam.conjugate(), -lam),
    ]


PeriodicityResult = namedtuple(
    "PeriodicityResult",
    ["n", "m", "lam", "equation_residual", "periodicity_residual", "terms", "iterations"],
)


def periodicity_search(ctx, n, m, seed, beta=0.03, validate=True):
    """Solve for λ making the field of the family doubly periodic with the
    lattice periods, then check B̃(z + 2ω_s) = B̃(z) on a cell grid.
    """
    seed = complex(seed)
    if ctx.lattice.contains(seed):
        raise errors.DegenerateData("seed %s lies on the lattice" % seed)

    def F(x):
        return periodicity_equations(ctx, complex(x[0], x[1]), n, m)

    result = numerics.newton_solve(F, [seed.real, seed.imag])
    lam = complex(result.x[0], result.x[1])
    logging.info(
        "periodicity (n, m) = (%d, %d): lambda = %s after %d iterations"
        % (n, m, lam, result.iterations)
    )
    terms = periodic_terms(ctx, lam, beta=beta)
    residual = 0.0
    if validate:
        field = build_canonical(ctx, terms)
        residual = periodicity_residual(field, ctx)
        if residual > Tolerance.PERIODICITY:
            raise errors.ValidationFailed(
                "B_tilde is not periodic for lambda = %s: residual %.3e" % (lam, residual)
            )
    return PeriodicityResult(n, m, lam, result.residual, residual, terms, result.iterations)


CellFlux = namedtuple("CellFlux", ["flux", "quanta", "origin"])


def _edge_flux(log_c, start, direction, normal, length, h, tol):
    def integrand(t):
        z = start + t * direction
        return float((log_c(z + h * normal) - log_c(z - h * normal)) / (2 * h))

    return numerics.quad_adaptive_1d(integrand, 0.0, length, tol).value


def cell_flux(ctilde, ctx, sign=Defaults.FIELD_SIGN, origin=None, h=1e-4, tol=1e-10):
    """Flux of B̃ = sign·½Δ ln c̃ through one elementary cell, as
    sign·½∮ ∂_n ln c̃ ds over its boundary. quanta = |flux|/2π.
    """
    w, hgt = 2 * ctx.omega1, 2 * ctx.omega2.imag
    x0, y0 = origin if origin is not None else (-ctx.omega1, -ctx.omega2.imag)
    for attempt in range(2):
        boundary = numerics.rectangle_contour(x0, y0, w, hgt, samples=400)[:-1]
        values = np.asarray(ctilde(boundary))
        if np.all(np.real(values) > 0) and np.all(np.isfinite(values)):
            break
        if attempt == 1:
            raise errors.ZeroOnBoundary(
                "c_tilde is not positive on the cell boundary at (%s, %s)" % (x0, y0)
            )
        logging.warning("c_tilde vanishes on the cell boundary; shifting the cell")
        x0 += 0.137 * ctx.omega1
        y0 += 0.091 * ctx.omega2.imag

    def log_c(z):
        return math.log(float(np.real(ctilde(z))))

    corner = complex(x0, y0)
    edges = [
        (corner, 1.0, -1j, w),
        (corner + w, 1j, 1.0, hgt),
        (corner + complex(w, hgt), -1.0, 1j, w),
        (corner + 1j * hgt, -1j, -1.0, hgt),
    ]
    total = sum(_edge_flux(log_c, s, d, nrm, length, h, tol) for s, d, nrm, length in edges)
    flux = sign * 0.5 * total
    return CellFlux(flux, abs(flux) / (2 * math.pi), (x0, y0))


MultiplierResult = namedtuple(
    "MultiplierResult", ["kx", "ky", "deviation", "rho", "derived", "printed"]
)


class BlochModel(object):
    """ψ_norm(p, z) = ψ″(p, z)/√c(z) for a generating function c with the
    divisor point P of Γ″.
    """

    def __init__(self, ctx, P, c):
        self.ctx = ctx
        self.P = complex(P)
        if ctx.lattice.contains(self.P):
            raise errors.DegenerateData("P is congruent to 0")
        self.c = c

    @classmethod
    def from_data(cls, data):
        return cls(data.ctx, data.P, lambda z: c_genus1(data, z))

    @classmethod
    def from_canonical(cls, ctx, field, P):
        """c(z) = c̃(z + P)/|σ(z + P)|² for a canonical sampler c̃."""
        P = complex(P)

        def c(z):
            z = np.asarray(z, dtype=complex)
            return field(z + P) / np.abs(ctx.sigma(z + P)) ** 2

        model = cls(ctx, P, c)
        model.field = field
        return model

    def c_tilde(self, z):
        z = np.asarray(z, dtype=complex)
        return self.c(z) * np.abs(self.ctx.sigma(z + self.P)) ** 2

    def psi_norm(self, p, z):
        c = np.asarray(self.c(z))
        return _psi_second(self.ctx, self.P, p, z) / np.sqrt(c.astype(complex))

    def sample_points(self, count=5, seed=0):
        rng = np.random.default_rng(seed)
        out = []
        tries = 0
        while len(out) < count and tries < 50 * count:
            tries += 1
            z = complex(
                rng.uniform(-1, 1) * self.ctx.omega1, rng.uniform(-1, 1) * self.ctx.omega2.imag
            )
            if self.ctx.lattice.contains(z + self.P):
                continue
            value = complex(self.c(z))
            if value.real > Tolerance.CANCELLATION and abs(value.imag) <= Tolerance.REALITY * value.real:
                out.append(z)
        if len(out) < 3:
            raise errors.NotPositive("c is not positive at enough sample points")
        return out

    def rho(self, samples=None):
        """(ρ_x, ρ_y) = √(c(z)/c(z + 2ω_t)), constant for a periodic field."""
        samples = self.sample_points() if samples is None else samples
        out = []
        for omega in self.ctx.omegas:
            values = [
                np.sqrt(complex(self.c(z)) / complex(self.c(z + 2 * omega))) for z in samples
            ]
            out.append(complex(np.median(np.real(values)), np.median(np.imag(values))))
        return tuple(out)


def _closed_forms(ctx, p, rho):
    zeta = ctx.zeta(p)
    derived = tuple(
        np.exp(-2 * omega * zeta + 2 * eta * p) * r
        for omega, eta, r in zip(ctx.omegas, ctx.etas, rho)
    )
    printed = tuple(
        np.exp(-2 * omega * zeta - 2 * eta * p) for omega, eta in zip(ctx.omegas, ctx.etas)
    )
    return derived, printed


def bloch_multipliers(model, p, samples=None):
    """κ_t = ψ_norm(p, z + 2ω_t)/ψ_norm(p, z), checked for z-independence."""
    ctx = model.ctx
    _check_off_lattice(ctx, p, "p")
    samples = model.sample_points() if samples is None else samples
    kappas, deviation = [], 0.0
    for omega in ctx.omegas:
        ratios = np.array(
            [complex(model.psi_norm(p, z + 2 * omega) / model.psi_norm(p, z)) for z in samples]
        )
        ref = ratios[0]
        dev = float(np.max(np.abs(ratios - ref)) / max(1.0, abs(ref)))
        deviation = max(deviation, dev)
        if dev > Tolerance.Z_INDEPENDENCE:
            raise errors.NotZIndependent(
                "Bloch ratio for period %s varies by %.3e over z" % (2 * omega, dev)
            )
        kappas.append(complex(ref))
    rho = model.rho(samples)
    derived, printed = _closed_forms(ctx, p, rho)
    mismatch = max(abs(k - d) / max(1.0, abs(k)) for k, d in zip(kappas, derived))
    if mismatch > Tolerance.COMPATIBILITY:
        logging.warning(
            "Bloch multipliers at p = %s differ from the shift-law closed form by %.3e"
            % (p, mismatch)
        )
    printed_gap = max(abs(k - q) for k, q in zip(kappas, printed))
    logging.debug(
        "printed multiplier forms at p = %s are off by %.3e (sign of the eta p term)"
        % (p, printed_gap)
    )
    return MultiplierResult(kappas[0], kappas[1], deviation, rho, derived, printed)


UnitarizeResult = namedtuple(
    "UnitarizeResult", ["u", "kx", "ky", "closed_form", "closed_form_mismatch"]
)


def unitarize(model, p, multipliers=None):
    """u with |κ_t e^{2uω_t}| = 1 for both periods, and the multipliers
    κ̃_t = κ_t e^{2uω_t}. The closed forms κ̃_x = e^{iπp^I/ω′ + iω log ρ_y/ω′},
    κ̃_y = e^{−iπp^R/ω − iω′ log ρ_x/ω} are checked alongside.
    """
    ctx = model.ctx
    result = bloch_multipliers(model, p) if multipliers is None else multipliers
    kappas = (result.kx, result.ky)
    A = np.array([[2 * complex(om).real, -2 * complex(om).imag] for om in ctx.omegas])
    rhs = -np.log(np.abs(kappas))
    if abs(np.linalg.det(A)) < 1e-14:
        raise errors.SingularSystem("unitarization system is singular for %s" % (ctx,))
    uR, uI = np.linalg.solve(A, rhs)
    u = complex(uR, uI)
    kt = tuple(k * np.exp(2 * u * om) for k, om in zip(kappas, ctx.omegas))
    p = complex(p)
    w, wp = ctx.omega1, ctx.omega2.imag
    log_rho = [math.log(abs(r)) for r in result.rho]
    closed = (
        np.exp(1j * (math.pi * p.imag / wp + w * log_rho[1] / wp)),
        np.exp(-1j * (math.pi * p.real / w + wp * log_rho[0] / w)),
    )
    mismatch = max(abs(a - b) for a, b in zip(kt, closed))
    if mismatch > Tolerance.COMPATIBILITY:
        logging.warning(
            "unitarized multipliers at p = %s differ from the closed forms by %.3e"
            % (p, mismatch)
        )
    return UnitarizeResult(u, complex(kt[0]), complex(kt[1]), closed, mismatch)


def printed_unitary_forms(ctx, p):
    """κ̃ as printed: exp{2ip^I[η′ω − ηω′]/ω′}, exp{2ip^R[ηω′ − η′ω]/ω}.
    These are the complex conjugates of the ratio-evaluated ones at ρ = 1.
    """
    p = complex(p)
    w, wp = ctx.omega1, ctx.omega2.imag
    eta, etap = ctx.eta1, ctx.eta2.imag
    return (
        np.exp(2j * p.imag * (etap * w - eta * wp) / wp),
        np.exp(2j * p.real * (eta * wp - etap * w) / w),
    )


def unitarity_locus_point(model, seed, samples=None):
    """A p with |κ_x| = |κ_y| = 1, by Newton iteration on log|κ_t|."""
    ctx = model.ctx
    samples = model.sample_points() if samples is None else samples
    rho = model.rho(samples)

    def F(x):
        derived, _ = _closed_forms(ctx, complex(x[0], x[1]), rho)
        return np.log(np.abs(np.array(derived)))

    seed = complex(seed)
    result = numerics.newton_solve(F, [seed.real, seed.imag])
    p = complex(result.x[0], result.x[1])
    logging.info("unitarity locus point p = %s (residual %.3e)" % (p, result.residual))
    return p


def psi_family(model, p, u, z):
    """Ψ(p, u, z) = ψ″(p, z)/√c(z)·e^{uz}."""
    return model.psi_norm(p, z) * np.exp(complex(u) * np.asarray(z, dtype=complex))


def dn_gauge(model, p, z, u=None):
    """ψ̃ = ψ″σ(z + P)e^{uz}/√c̃ with u from ``unitarize``, scaled so that
    ψ̃(p, 0) > 0.
    """
    ctx = model.ctx
    if u is None:
        u = unitarize(model, p).u

    def raw(w):
        w = np.asarray(w, dtype=complex)
        log = (
            -w * ctx.zeta(p)
            + ctx.log_sigma(p + w + model.P)
            + ctx.log_sigma(model.P)
            - ctx.log_sigma(p + model.P)
            + complex(u) * w
        )
        return np.exp(log) / np.sqrt(np.asarray(model.c_tilde(w)).astype(complex))

    norm = complex(raw(0.0))
    phase = norm / abs(norm) if abs(norm) > 0 else 1.0
    return _scalar(raw(z) / phase)


def magnetic_translation_ratio(model, p, u, z, t):
    """(T_t ψ̃)(z)/ψ̃(z) with (T_t ψ)(z) = −e^{−2i Im(η_t(z + P + ω_t))}ψ(z + 2ω_t);
    equals κ̃_t.
    """
    ctx = model.ctx
    omega, eta = ctx.omegas[t], ctx.etas[t]
    z = complex(z)
    phase = -np.exp(-2j * (eta * (z + model.P + omega)).imag)
    return complex(phase * dn_gauge(model, p, z + 2 * omega, u) / dn_gauge(model, p, z, u))


def zero_count(func, ctx, origin=None, samples=Defaults.WINDING_SAMPLES):
    """Zeros minus poles of ``func`` in one cell, by the argument principle."""
    x0, y0 = origin if origin is not None else (-ctx.omega1, -ctx.omega2.imag)
    return numerics.winding_number(
        func, x0, y0, 2 * ctx.omega1, 2 * ctx.omega2.imag, samples
    )
