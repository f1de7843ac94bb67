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

from magpauli._version import __version__  # noqa: F401
from magpauli.elliptic import Lattice, WeierstrassContext  # noqa: F401
from magpauli.expsum import (  # noqa: F401
    ExponentialSum,
    SpectralDataG0,
    build_exponential_sum,
    eval_c,
    eval_psi_g0,
    magnetic_field,
)
from magpauli.flux import (  # noqa: F401
    disk_flux,
    flux_asymptotic,
    indicator_integral,
    regularized_flux,
)
from magpauli.genus1 import (  # noqa: F401
    BlochModel,
    CanonicalTerm,
    GenusOneData,
    bloch_multipliers,
    build_canonical,
    cell_flux,
    periodicity_search,
    unitarize,
)
from magpauli.growth import ground_state, polygon_T  # noqa: F401
