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

import csv
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor

from magpauli.core.constants import Defaults


def to_complex(pair, name="value"):
    """Convert a ``[re, im]`` pair from a config into a complex number.
    Plain numbers are accepted as purely real values.
    """
    if isinstance(pair, bool):
        raise TypeError("%s must be a [re, im] pair, got %r" % (name, pair))
    if isinstance(pair, (int, float)):
        re, im = float(pair), 0.0
    elif isinstance(pair, (list, tuple)) and len(pair) == 2:
        if any(isinstance(v, bool) for v in pair):
            raise TypeError("%s must hold numbers, got %r" % (name, pair))
        try:
            re, im = float(pair[0]), float(pair[1])
        except (TypeError, ValueError):
            raise TypeError("%s must hold numbers, got %r" % (name, pair))
    else:
        raise TypeError("%s must be a [re, im] pair, got %r" % (name, pair))
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValueError("%s must be finite, got %r" % (name, pair))
    return complex(re, im)


def complex_pair(z):
    """The inverse of ``to_complex``, used when echoing inputs in reports."""
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def format_float(value):
    # +0.0 folds negative zero, so identical inputs give identical bytes
    return Defaults.FLOAT_FORMAT % (float(value) + 0.0)


def write_csv_atomic(path, header, rows):
    """Write rows to ``path`` through a temporary file in the same
    directory, then rename, so readers never see a partial file.
    Floats are written with 17 significant digits.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        prefix=".%s." % os.path.basename(path), dir=directory
    )
    try:
        with os.fdopen(fd, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [
                        format_float(v) if isinstance(v, float) else v
                        for v in row
                    ]
                )
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def write_text_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(
        prefix=".%s." % os.path.basename(path), dir=directory
    )
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def read_csv(path):
    """Return (header, rows) of a CSV file written by ``write_csv_atomic``."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows


def ordered_map(func, items, threads=1):
    """Map ``func`` over ``items`` on a thread pool. Results come back in
    input order whatever the completion order, so outputs stay
    deterministic.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def to_plain(value):
    """Turn numpy scalars, complex numbers, tuples and namedtuples into
    the plain types the YAML dumper accepts.
    """
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if hasattr(value, "_asdict"):
        return to_plain(value._asdict())
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if hasattr(value, "tolist") and not isinstance(value, str):
        return to_plain(value.tolist())
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, complex):
        return complex_pair(value)
    if isinstance(value, float):
        return value + 0.0
    raise TypeError("cannot serialise %r" % (value,))
