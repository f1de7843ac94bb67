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

from magpauli import flux, verification
from magpauli.core.constants import AsymptoticConvention, Columns, OutputFile
from magpauli.core.utils import write_csv_atomic

if __name__ == "__main__":
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
    c = verification.example3_sum()
    rows = flux.flux_scan(c, [10.0, 20.0, 40.0, 80.0], threads=2)
    write_csv_atomic(os.path.join(out_dir, OutputFile.FLUX), Columns.FLUX, [list(r) for r in rows])
    for row in rows:
        orders = [
            flux.flux_asymptotic(c, row.R, order, AsymptoticConvention.Derived.value)
            for order in (1, 2, 3)
        ]
        print("R = %5.1f  regularized %.6e  asymptotic %s" % (row.R, row.regularized, orders))
