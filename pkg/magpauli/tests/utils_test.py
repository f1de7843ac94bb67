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
import threading
import unittest
from collections import namedtuple

import numpy as np

from magpauli.core import utils
from magpauli.tests.magpauli_test import MagpauliTest


class UtilsTest(MagpauliTest):
    def test_to_complex(self):
        self.assertEqual(utils.to_complex([1, -2]), 1 - 2j)
        self.assertEqual(utils.to_complex(3), 3 + 0j)
        with self.assertRaises(TypeError):
            utils.to_complex([1, 2, 3])
        with self.assertRaises(TypeError):
            utils.to_complex(True)
        with self.assertRaises(TypeError):
            utils.to_complex(["a", 1])
        with self.assertRaises(ValueError):
            utils.to_complex([float("inf"), 0])
        self.assertEqual(utils.complex_pair(-0.0 + 2j), [0.0, 2.0])

    def test_format_float(self):
        self.assertEqual(utils.format_float(0.1), "0.10000000000000001")
        self.assertEqual(utils.format_float(-0.0), "0")
        self.assertEqual(float(utils.format_float(1 / 3.0)), 1 / 3.0)

    def test_csv_round_trip(self):
        path = os.path.join(self.out_dir, "sub", "t.csv")
        utils.write_csv_atomic(path, ["a", "b"], [[1, 0.5], [2, float("nan")]])
        header, rows = utils.read_csv(path)
        self.assertEqual(header, ["a", "b"])
        self.assertEqual(rows, [["1", "0.5"], ["2", "nan"]])
        self.assertEqual(sorted(os.listdir(os.path.dirname(path))), ["t.csv"])

    def test_write_text_atomic(self):
        path = os.path.join(self.out_dir, "r.txt")
        utils.write_text_atomic(path, "one\n")
        utils.write_text_atomic(path, "two\n")
        with open(path) as f:
            self.assertEqual(f.read(), "two\n")

    def test_ordered_map(self):
        seen = set()

        def work(i):
            seen.add(threading.current_thread().name)
            return i * i

        self.assertEqual(utils.ordered_map(work, range(20), threads=4), [i * i for i in range(20)])
        self.assertEqual(utils.ordered_map(work, [3], threads=4), [9])
        self.assertEqual(utils.ordered_map(work, range(3)), [0, 1, 4])

    def test_to_plain(self):
        Point = namedtuple("Point", ["x", "y"])
        plain = utils.to_plain(
            {
                "p": Point(np.float64(1.5), 2),
                "z": 1 - 1j,
                "a": np.array([1.0, 2.0]),
                "flag": np.bool_(True),
                "none": None,
                1: (np.int64(3), "s"),
            }
        )
        self.assertEqual(
            plain,
            {
                "p": {"x": 1.5, "y": 2},
                "z": [1.0, -1.0],
                "a": [1.0, 2.0],
                "flag": True,
                "none": None,
                "1": [3, "s"],
            },
        )
        self.assertIsInstance(plain["a"][0], float)
        with self.assertRaises(TypeError):
            utils.to_plain(object())


if __name__ == "__main__":
    unittest.main()
