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

import sys

import magpauli
from magpauli import genus1, verification

if __name__ == "__main__":
    ctx = magpauli.WeierstrassContext(magpauli.Lattice(1.0, 1j))
    print("eta1 = %.15f, eta2 = %s" % (ctx.eta1, ctx.eta2))
    for n, m in [(0, 0)]:
        result = magpauli.periodicity_search(ctx, n, m, 1.5 + 0.1j)
        field = magpauli.build_canonical(ctx, result.terms)
        cell = magpauli.cell_flux(field, ctx)
        print("(n, m) = (%d, %d): lambda = %s, flux quanta %.12f" % (n, m, result.lam, cell.quanta))
    model = verification.periodic_bloch_model(ctx)
    p = genus1.unitarity_locus_point(model, 0.4 + 0.3j)
    m = magpauli.bloch_multipliers(model, p)
    print("unitarity locus p = %s: |kx| = %.12f, |ky| = %.12f" % (p, abs(m.kx), abs(m.ky)))
    sys.exit(0)
