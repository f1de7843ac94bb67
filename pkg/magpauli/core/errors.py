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

"""Errors raised by magpauli.

Every error carries the process exit code used by ``magpauli run``.
"""


class MagpauliError(Exception):
    exit_code = 70


class ParseError(MagpauliError, ValueError):
    exit_code = 3

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super(ParseError, self).__init__(
            "%s (line %d, column %d)" % (message, line, column)
        )


class SchemaError(MagpauliError, ValueError):
    exit_code = 4

    def __init__(self, key, message):
        self.key = key
        super(SchemaError, self).__init__("%s: %s" % (key, message))


class EmptySum(MagpauliError, ValueError):
    exit_code = 10


class GridTooSmall(MagpauliError, ValueError):
    exit_code = 11


class MaxSubdivisions(MagpauliError, RuntimeError):
    exit_code = 12


class NoConvergence(MagpauliError, RuntimeError):
    exit_code = 13


class SingularJacobian(MagpauliError, RuntimeError):
    exit_code = 14


class SingularSystem(MagpauliError, RuntimeError):
    exit_code = 15


class DegenerateData(MagpauliError, ValueError):
    exit_code = 16


class PoleHit(MagpauliError, ArithmeticError):
    exit_code = 17


class ZeroOfC(MagpauliError, ArithmeticError):
    exit_code = 18


class NotReal(MagpauliError, ValueError):
    exit_code = 19


class NotPositive(MagpauliError, ValueError):
    exit_code = 20


class EmptyPositivePart(MagpauliError, ValueError):
    exit_code = 21


class DegenerateCorner(MagpauliError, ValueError):
    exit_code = 22


class UnstableClass(MagpauliError, ValueError):
    exit_code = 23


class InvalidLattice(MagpauliError, ValueError):
    exit_code = 24


class SelfCheckFailed(MagpauliError, RuntimeError):
    exit_code = 25


class ValidationFailed(MagpauliError, RuntimeError):
    exit_code = 26


class NotZIndependent(MagpauliError, RuntimeError):
    exit_code = 27


class ZeroOnBoundary(MagpauliError, ArithmeticError):
    exit_code = 28


def exit_code_table():
    """Rows of (exit code, error name), sorted by code."""
    rows = [(0, "success"), (1, "verification checks failed"), (2, "usage")]
    pending = [MagpauliError]
    seen = set()
    while pending:
        cls = pending.pop()
        for sub in cls.__subclasses__():
            if sub not in seen:
                seen.add(sub)
                pending.append(sub)
    rows.extend((cls.exit_code, cls.__name__) for cls in seen)
    rows.append((MagpauliError.exit_code, "internal error"))
    return sorted(rows)
