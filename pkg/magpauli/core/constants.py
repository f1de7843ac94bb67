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

from enum import Enum


class _Choice(Enum):
    @classmethod
    def valid(cls, value: str) -> bool:
        return value in cls.values()

    @classmethod
    def values(cls) -> list:
        return [member.value for member in cls]


class RunMode(_Choice):
    Genus0 = "genus0"
    Genus1 = "genus1"
    FluxScan = "flux-scan"
    Polygon = "polygon"
    Verify = "verify"
    Periodicity = "periodicity"
    Bloch = "bloch"


class Suite(_Choice):
    All = "all"
    Genus0 = "genus0"
    Genus1 = "genus1"
    Flux = "flux"


class Sector(_Choice):
    Plus = "L+"
    Minus = "L-"


class ZeroSetKind(_Choice):
    StrictlyPositive = "strictly-positive"
    IsolatedPoints = "isolated-points"
    Segment = "segment"


class TermKind(_Choice):
    Exponential = "exponential-type"
    MixedPair = "mixed-pair"
    Trigonometric = "trigonometric-type"
    NonReal = "non-real"


class SignProfile(_Choice):
    AllPositive = "all-positive"
    AllNegative = "all-negative"
    Mixed = "mixed-signs"
    Empty = "none"


class Membership(_Choice):
    Interior = "interior"
    Boundary = "boundary"
    Exterior = "exterior"


class AsymptoticConvention(_Choice):
    Derived = "derived"
    Printed = "printed"


class PhaseVariant(_Choice):
    # e^{i(alpha y - beta x)/2}, the gauge-map phase
    Derived = "derived"
    # e^{-i(alpha y - beta x)/2}
    Conclusion = "conclusion"
    # e^{-i(alpha x - beta y)/2}
    Section1 = "section1"


class Tolerance(object):
    CANCELLATION = 1e12 * 2.220446049250313e-16
    DISTINCT_POINTS = 1e-9
    REALITY = 1e-10
    VANDERMONDE_CROSSCHECK = 1e-10
    VANDERMONDE_CONDITION = 1e12
    HULL_MEMBERSHIP = 1e-12
    QUAD = 1e-10
    QUAD_MAX_SUBDIVISIONS = 200
    NEWTON = 1e-12
    NEWTON_MAX_ITER = 50
    JACOBIAN_CONDITION = 1e13
    POLE = 1e-12
    SERIES = 1e-14
    SERIES_MAX_TERMS = 64
    LEGENDRE = 1e-9
    LATTICE_REDUCTION = 1e-12
    COMPATIBILITY = 1e-9
    Z_INDEPENDENCE = 1e-9
    PERIODICITY = 1e-6
    PSI_MASK = 1e-12
    L2_INCREMENT = 1e-6


class Defaults(object):
    FD_ORDER = 2
    MIN_GRID_POINTS = 5
    ASYMPTOTIC_ORDER = 1
    MAX_ASYMPTOTIC_ORDER = 3
    FIELD_SIGN = -1
    WINDING_SAMPLES = 2000
    UNITARIZE_SAMPLES = 100
    THREADS = 1
    THREADS_ENV = "MAGPAULI_THREADS"
    FLOAT_FORMAT = "%.17g"


class Columns(object):
    C_TERMS = ["kappa_re", "kappa_im", "p_re", "p_im", "k_re", "k_im"]
    FIELD = ["x", "y", "c", "B"]
    FIELD_PSI = "psi_abs2"
    GENUS1_FIELD = ["x", "y", "c_tilde", "B_tilde"]
    POLYGON = ["vertex", "alpha", "beta"]
    FLUX = ["R", "disk_flux", "regularized", "asymptotic_o1"]
    MULTIPLIERS = ["p_re", "p_im", "abs_kx", "arg_kx", "abs_ky", "arg_ky"]
    PERIODICITY = [
        "n",
        "m",
        "lambda_re",
        "lambda_im",
        "equation_residual",
        "periodicity_residual",
        "flux_quanta",
    ]


class OutputFile(object):
    C_TERMS = "c_terms.csv"
    FIELD = "field.csv"
    POLYGON = "polygon.csv"
    FLUX = "flux.csv"
    MULTIPLIERS = "multipliers.csv"
    PERIODICITY = "periodicity.csv"
    REPORT = "report.yaml"
    VERIFY_REPORT = "verify_report.txt"
