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

"""Genus-0 constructions: spectral data on two spheres, the generating
function c as an exponential sum, the Baker–Akhiezer function Ψ, the
magnetic field B = −½Δ ln c, reality classification and residue checks.
"""

import logging
from collections import namedtuple

import numpy as np

from magpauli import numerics
from magpauli.core import errors
from magpauli.core.constants import Columns, Defaults, SignProfile, TermKind, Tolerance
from magpauli.core.utils import read_csv, write_csv_atomic
from magpauli.numerics import ComplexLinearForm


def _check_distinct(points, name, tol=Tolerance.DISTINCT_POINTS):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if abs(points[i] - points[j]) <= tol:
                raise errors.DegenerateData(
                    "%s[%d] and %s[%d] coincide (%s)" % (name, i, name, j, points[i])
                )


class SpectralDataG0(object):
    """Intersection points k_0..k_n on Γ′, p_0..p_n on Γ″ and the pole
    divisor a_1..a_n of Ψ on Γ′.
    """

    def __init__(self, k_points, p_points, divisor=()):
        self.k_points = tuple(complex(k) for k in k_points)
        self.p_points = tuple(complex(p) for p in p_points)
        self.divisor = tuple(complex(a) for a in divisor)
        n1 = len(self.k_points)
        if n1 == 0:
            raise errors.DegenerateData("at least one intersection point is needed")
        if len(self.p_points) != n1:
            raise errors.DegenerateData(
                "got %d k points but %d p points" % (n1, len(self.p_points))
            )
        if len(self.divisor) != n1 - 1:
            raise errors.DegenerateData(
                "divisor must have %d points, got %d" % (n1 - 1, len(self.divisor))
            )
        _check_distinct(self.k_points, "k_points")
        _check_distinct(self.p_points, "p_points")
        for i, a in enumerate(self.divisor):
            for j, k in enumerate(self.k_points):
                if abs(a - k) <= Tolerance.DISTINCT_POINTS:
                    raise errors.DegenerateData(
                        "divisor[%d] coincides with k_points[%d] (%s)" % (i, j, k)
                    )

    @property
    def n(self):
        return len(self.k_points) - 1

    def theta(self):
        """θ_j = Π_i (k_j − a_i)."""
        k = np.array(self.k_points)
        return np.array([np.prod(kj - np.array(self.divisor)) for kj in k])

    def vandermonde(self):
        """V[j, m] = k_j^{n−m}."""
        return np.vander(np.array(self.k_points), self.n + 1)

    def forms(self):
        return [ComplexLinearForm(p, k) for p, k in zip(self.p_points, self.k_points)]


class ExponentialSum(object):
    """c(z, z̄) = Σ_q κ_q e^{W_q} with W_q = p_q z − k_q z̄."""

    def __init__(self, terms):
        terms = [(complex(kappa), form) for kappa, form in terms]
        if not terms:
            raise errors.EmptySum("an exponential sum needs at least one term")
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                a, b = terms[i][1], terms[j][1]
                if abs(a.p - b.p) + abs(a.k - b.k) <= 1e-12:
                    raise errors.DegenerateData(
                        "terms %d and %d share the exponent (%s, %s)" % (i, j, a.p, a.k)
                    )
        self.terms = tuple(terms)

    @classmethod
    def from_real(cls, triples):
        """Build from (κ, α, β) triples, i.e. Σ κ e^{αx + βy}."""
        return cls(
            [(kappa, ComplexLinearForm.from_real(a, b)) for kappa, a, b in triples]
        )

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self):
        return "ExponentialSum(%r)" % (list(self.terms),)

    @property
    def kappas(self):
        return np.array([kappa for kappa, _ in self.terms])

    @property
    def forms(self):
        return [form for _, form in self.terms]

    def real_forms(self):
        """(α_j, β_j) of Re W_j for every term."""
        return [form.real_parts() for form in self.forms]

    def is_real_exponential(self, tol=Tolerance.REALITY):
        """True when every exponent is real (p̄ = −k) and every κ real."""
        for kappa, form in self.terms:
            if abs(kappa.imag) > tol * max(1.0, abs(kappa)):
                return False
            if abs(form.p.conjugate() + form.k) > tol:
                return False
        return True

    def evaluate(self, x, y):
        """Values of c; may overflow to inf where |c| leaves the double range."""
        log_mag, unit, _ = numerics.logsum_grid(self.terms, x, y)
        with np.errstate(over="ignore"):
            return np.exp(log_mag) * unit

    def log_evaluate(self, x, y):
        log_mag, unit, _ = numerics.logsum_grid(self.terms, x, y)
        return log_mag, unit

    def scaled(self, factor):
        return ExponentialSum([(factor * kappa, form) for kappa, form in self.terms])

    def shifted(self, form):
        """e^{form}·c: every exponent shifted by ``form``."""
        return ExponentialSum([(kappa, f + form) for kappa, f in self.terms])

    def without_zero_terms(self):
        return ExponentialSum([t for t in self.terms if t[0] != 0])


def build_exponential_sum(data, check=True):
    """The generating function c = u_0 for genus-0 spectral data.

    The coefficient of e^{W_j} is θ_j / Π_{l≠j}(k_j − k_l), which equals
    (−1)^j θ_j Δ_j^{(n−1)} / Δ^{(n)} with Δ_j the Vandermonde determinant
    with k_j erased. When ``check`` is set the coefficients are compared
    with a dense solve of the interpolation system.
    """
    k = np.array(data.k_points)
    theta = data.theta()
    coeffs = np.empty(len(k), dtype=complex)
    for j in range(len(k)):
        coeffs[j] = theta[j] / np.prod(k[j] - np.delete(k, j))
    if check:
        V = data.vandermonde()
        cond = np.linalg.cond(V)
        dense = np.linalg.solve(V, np.diag(theta))[0]
        scale = max(1.0, np.max(np.abs(coeffs)))
        mismatch = np.max(np.abs(dense - coeffs)) / scale
        if cond > Tolerance.VANDERMONDE_CONDITION:
            logging.warning(
                "Vandermonde system is ill-conditioned (condition %.3e); "
                "using the closed form, dense mismatch %.3e" % (cond, mismatch)
            )
        elif mismatch > max(
            Tolerance.VANDERMONDE_CROSSCHECK, 10 * cond * np.finfo(float).eps
        ):
            raise errors.SelfCheckFailed(
                "closed-form coefficients differ from the dense solve by %.3e"
                % mismatch
            )
    return ExponentialSum(list(zip(coeffs, data.forms())))


def write_c_terms(path, c):
    """One row per term: kappa_re, kappa_im, p_re, p_im, k_re, k_im."""
    rows = [
        [kappa.real, kappa.imag, form.p.real, form.p.imag, form.k.real, form.k.imag]
        for kappa, form in c.terms
    ]
    return write_csv_atomic(path, Columns.C_TERMS, [[float(v) for v in r] for r in rows])


def read_c_terms(path):
    header, rows = read_csv(path)
    if header != Columns.C_TERMS:
        raise ValueError("%s is not a c_terms file: header %s" % (path, header))
    terms = []
    for row in rows:
        kr, ki, pr, pi, kkr, kki = (float(v) for v in row)
        terms.append((complex(kr, ki), ComplexLinearForm(complex(pr, pi), complex(kkr, kki))))
    return ExponentialSum(terms)


def eval_c(c, point):
    """c at one point, as numerics.LogSum."""
    return numerics.logsum_eval(c.terms, point)


def eval_psi_g0(data, k, point):
    """Ψ(k; x, y) = e^{k z̄}(u_0 k^n + ... + u_n) / Π(k − a_i)."""
    k = complex(k)
    for i, a in enumerate(data.divisor):
        if abs(k - a) < Tolerance.POLE:
            raise errors.PoleHit("k = %s hits divisor point a_%d" % (k, i + 1))
    x, y = point
    z = complex(x, y)
    W = np.array([f.p * z - f.k * z.conjugate() for f in data.forms()])
    rhs = data.theta() * np.exp(W)
    u = np.linalg.solve(data.vandermonde(), rhs)
    poly = np.polyval(u, k)
    denom = np.prod(k - np.array(data.divisor)) if data.divisor else 1.0
    return complex(np.exp(k * z.conjugate()) * poly / denom)


def log_derivatives(c, x, y, cancellation=Tolerance.CANCELLATION):
    """(∂ ln c, ∂̄ ln c, ∂∂̄ ln c, cancelled mask) from softmax weights of
    the terms, so nothing overflows.
    """
    L, phase = numerics.log_terms(c.terms, x, y)
    _, shifted, s = numerics.softmax_weights(L, phase)
    cancelled = np.abs(s) < cancellation
    safe = np.where(cancelled, 1.0, s)
    w = shifted / safe
    shape = (-1,) + (1,) * (w.ndim - 1)
    p = np.array([f.p for f in c.forms]).reshape(shape)
    mk = -np.array([f.k for f in c.forms]).reshape(shape)
    d = (w * p).sum(axis=0)
    dbar = (w * mk).sum(axis=0)
    ddbar = (w * p * mk).sum(axis=0) - d * dbar
    return d, dbar, ddbar, cancelled


def magnetic_field(c, x, y, sign=Defaults.FIELD_SIGN, on_zero="raise"):
    """B = sign·½Δ ln c with Δ = 4∂∂̄ (sign −1 gives B = −½Δ ln c).

    :param on_zero: "raise" raises ZeroOfC where c cancels; "nan" returns
        NaN there instead.
    """
    _, _, ddbar, cancelled = log_derivatives(c, x, y)
    if np.any(cancelled):
        if on_zero == "raise":
            raise errors.ZeroOfC("c vanishes on the sampled points; B is singular")
        ddbar = np.where(cancelled, np.nan, ddbar)
    B = 2.0 * sign * ddbar
    finite = np.isfinite(B)
    imag = np.abs(B.imag[finite])
    if imag.size and np.any(imag > Tolerance.REALITY * np.maximum(1.0, np.abs(B.real[finite]))):
        raise errors.NotReal(
            "magnetic field has imaginary part %.3e; c is not real" % imag.max()
        )
    B = B.real
    return float(B) if np.ndim(B) == 0 else B


TermLabel = namedtuple("TermLabel", ["kind", "partner"])


class RealityReport(object):
    def __init__(self, labels, sign_profile, trig_terms, constant_present, constant, amplitude):
        self.labels = labels
        self.overall = (
            "real" if all(l.kind != TermKind.NonReal.value for l in labels) else "non-real"
        )
        self.sign_profile = sign_profile
        self.trig_terms = trig_terms
        self.constant_present = constant_present
        self.constant = constant
        self.amplitude = amplitude

    @property
    def is_real(self):
        return self.overall == "real"

    @property
    def trigonometric(self):
        return self.trig_terms > 0

    @property
    def count_after_pairing(self):
        pairs = sum(1 for l in self.labels if l.partner is not None) // 2
        singles = sum(1 for l in self.labels if l.partner is None)
        return pairs + singles

    @property
    def trig_case(self):
        """"a" for an even number of terms (zeros unavoidable), "b" for an
        odd number with the constant term, None otherwise.
        """
        if not self.trigonometric:
            return None
        total = len(self.labels)
        if total % 2 == 0:
            return "a"
        return "b" if self.constant_present else None

    @property
    def trig_positive(self):
        # sufficient condition: constant dominates the sum of amplitudes
        return self.trigonometric and self.constant_present and self.constant > self.amplitude

    def to_dict(self):
        return {
            "overall": self.overall,
            "sign_profile": self.sign_profile,
            "terms": [
                {"kind": l.kind, "partner": l.partner} for l in self.labels
            ],
            "trigonometric_case": self.trig_case,
            "count_after_pairing": self.count_after_pairing,
            "constant_present": self.constant_present,
        }


def classify_reality(c, tol=Tolerance.REALITY):
    """Label every term of c per the reality cases: real exponent with real
    κ, a mixed pair κe^W + κ̄e^{W̄}, or a trigonometric pair (k = p̄).
    """
    terms = list(c.terms)
    labels = [None] * len(terms)
    for j, (kappa, form) in enumerate(terms):
        if labels[j] is not None:
            continue
        image_p, image_k = -form.k.conjugate(), -form.p.conjugate()
        partner = None
        for l, (kappa_l, form_l) in enumerate(terms):
            if abs(form_l.p - image_p) <= tol and abs(form_l.k - image_k) <= tol:
                partner = l
                break
        if partner is None:
            labels[j] = TermLabel(TermKind.NonReal.value, None)
            continue
        if abs(terms[partner][0] - kappa.conjugate()) > tol * max(1.0, abs(kappa)):
            labels[j] = TermLabel(TermKind.NonReal.value, None)
            continue
        if partner == j:
            labels[j] = TermLabel(TermKind.Exponential.value, None)
        elif abs(form.k - form.p.conjugate()) <= tol:
            labels[j] = TermLabel(TermKind.Trigonometric.value, partner)
            labels[partner] = TermLabel(TermKind.Trigonometric.value, j)
        else:
            labels[j] = TermLabel(TermKind.MixedPair.value, partner)
            labels[partner] = TermLabel(TermKind.MixedPair.value, j)

    trig_terms = sum(1 for l in labels if l.kind == TermKind.Trigonometric.value)
    constant_present = False
    constant = 0.0
    amplitude = 0.0
    for j, (kappa, form) in enumerate(terms):
        if abs(form.p) + abs(form.k) <= tol and labels[j].kind != TermKind.NonReal.value:
            constant_present = True
            constant = kappa.real
            if trig_terms:
                labels[j] = TermLabel(TermKind.Trigonometric.value, None)
        elif labels[j].kind == TermKind.Trigonometric.value:
            amplitude += abs(kappa)

    reals = [
        kappa.real
        for (kappa, form), l in zip(terms, labels)
        if l.kind == TermKind.Exponential.value
    ]
    if not reals:
        profile = SignProfile.Empty.value
    elif all(r > 0 for r in reals):
        profile = SignProfile.AllPositive.value
    elif all(r < 0 for r in reals):
        profile = SignProfile.AllNegative.value
    else:
        profile = SignProfile.Mixed.value
    return RealityReport(labels, profile, trig_terms, constant_present, constant, amplitude)


ResidueReport = namedtuple(
    "ResidueReport", ["s", "omega1", "omega2", "sums", "matched", "max_mismatch"]
)


def residues_omega1(data):
    """Res_{k_j} of Ω₁ = Π(k − a_i) dk / Π(k − k_l)."""
    k = np.array(data.k_points)
    return np.array(
        [data.theta()[j] / np.prod(k[j] - np.delete(k, j)) for j in range(len(k))]
    )


def residues_omega2(data, s=1.0):
    """Res_{p_j} of Ω₂ = s·Π(p + ā_i) dp / Π(p − p_l)."""
    p = np.array(data.p_points)
    abar = np.conj(np.array(data.divisor))
    out = []
    for j in range(len(p)):
        num = np.prod(p[j] + abar) if abar.size else 1.0
        out.append(s * num / np.prod(p[j] - np.delete(p, j)))
    return np.array(out)


def check_residues(data, s=None, tol=Tolerance.REALITY):
    """Per-point sums Res_{k_j}Ω₁ + Res_{p_j}Ω₂. When ``s`` is None it is
    fitted by least squares over all points.
    """
    r1 = residues_omega1(data)
    r2 = residues_omega2(data, 1.0)
    if s is None:
        norm = np.sum(np.abs(r2) ** 2)
        if norm == 0:
            raise errors.DegenerateData("Ω₂ has no nonzero residue; s is undetermined")
        s = -np.sum(np.conj(r2) * r1) / norm
    s = complex(s)
    sums = r1 + s * r2
    worst = float(np.max(np.abs(sums)))
    scale = max(1.0, float(np.max(np.abs(r1))))
    return ResidueReport(s, r1, s * r2, sums, worst <= tol * scale, worst)
