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

import os
import sys

import numpy as np

import magpauli
from magpauli import expsum, growth, numerics
from magpauli.core.constants import OutputFile, Sector


def example2():
    data = magpauli.SpectralDataG0(
        [0, 5, -10j, -5, 10j], [0, 5, 10j, -5, -10j], [2, 1j, -2, -1j]
    )
    c = magpauli.build_exponential_sum(data)
    report = expsum.check_residues(data, s=-1.0)
    print("example2: c(0, 0) = %.17g, residue mismatch %.3e" % (
        magpauli.eval_c(c, (0.0, 0.0)).real, report.max_mismatch))
    return c


def example1_zero_mode():
    c = expsum.ExponentialSum.from_real([(1.0, 0.0, 0.0), (1.0, 0.0, 1.0)])
    state = magpauli.ground_state(c, (0.0, -0.5), Sector.Minus.value)
    grid = numerics.Grid2D(-1.0, -1.0, 0.05, 0.05, 41, 41)
    residual = numerics.fd_apply_pauli(growth.potential(c), state, Sector.Minus.value, grid)
    print("example1: B(0) = %.6f, |L_- psi| <= %.3e (%s)" % (
        magpauli.magnetic_field(c, 0.0, 0.0), float(np.max(np.abs(residual))), state.variant))
    return c


if __name__ == "__main__":
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
    os.makedirs(out_dir, exist_ok=True)
    expsum.write_c_terms(os.path.join(out_dir, OutputFile.C_TERMS), example2())
    example1_zero_mode()
