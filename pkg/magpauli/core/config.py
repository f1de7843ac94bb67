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

"""Run configuration: loading, schema validation and thread resolution.

Configs are JSON-syntax key trees read with PyYAML. Complex numbers are
always ``[re, im]`` pairs.
"""

import logging
import os
import re

import yaml

from magpauli.core import errors
from magpauli.core.constants import (
    AsymptoticConvention,
    Defaults,
    RunMode,
    Sector,
    Suite,
    Tolerance,
)
from magpauli.core.utils import to_complex


class _ConfigLoader(yaml.SafeLoader):
    pass


# YAML 1.1 wants a dot in floats; JSON writes 1e-10
_ConfigLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?[0-9][0-9_]*(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)

# Blocks and their keys. None marks a leaf.
SCHEMA = {
    "mode": None,
    "spectral": {"k_points": None, "p_points": None, "divisor": None, "s": None},
    "terms": None,
    "grid": {"x0": None, "y0": None, "hx": None, "hy": None, "nx": None, "ny": None},
    "ground_state": {"gauge": None, "sector": None, "write_psi": None},
    "polygon": {"queries": None, "oracle_radius": None, "oracle_points": None},
    "flux": {"radii": None, "order": None, "convention": None},
    "lattice": {"omega1": None, "omega2": None},
    "canonical": None,
    "data": {"Q": None, "R": None, "divisor": None, "P": None},
    "periodicity": {"indices": None, "seed": None, "beta": None},
    "bloch": {"P": None, "p_points": None, "locus_seed": None},
    "cell": {"n": None},
    "verify": {"suite": None},
    "tolerances": None,
    "flags": {"field_sign": None, "fd_order": None},
}

TERM_KEYS = {"kappa", "p", "k", "alpha", "beta"}
CANONICAL_KEYS = {"alpha", "R", "Q"}

_SOURCES = ("spectral", "terms")
REQUIRED = {
    RunMode.Genus0.value: [_SOURCES, ("grid",)],
    RunMode.Polygon.value: [_SOURCES],
    RunMode.FluxScan.value: [_SOURCES, ("flux",)],
    RunMode.Genus1.value: [("lattice",), ("canonical", "data")],
    RunMode.Periodicity.value: [("lattice",), ("periodicity",)],
    RunMode.Bloch.value: [("lattice",), ("bloch",), ("canonical", "data", "periodicity")],
    RunMode.Verify.value: [],
}


def tolerance_names():
    return sorted(
        name.lower() for name in vars(Tolerance) if name.isupper()
    )


def _unknown(key, lenient):
    if lenient:
        logging.warning("ignoring unknown config key %s" % key)
    else:
        raise errors.SchemaError(key, "unknown key")


def _complex(key, value):
    try:
        return to_complex(value, key)
    except (TypeError, ValueError) as e:
        raise errors.SchemaError(key, str(e))


def _complex_list(key, value, min_len=0):
    if not isinstance(value, list):
        raise errors.SchemaError(key, "expected a list of [re, im] pairs")
    out = [_complex("%s[%d]" % (key, i), v) for i, v in enumerate(value)]
    if len(out) < min_len:
        raise errors.SchemaError(key, "expected at least %d entries" % min_len)
    return out


def _number(key, value, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise errors.SchemaError(key, "expected a number, got %r" % (value,))
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise errors.SchemaError(key, "expected a finite number")
    if positive and not value > 0:
        raise errors.SchemaError(key, "expected a positive number, got %s" % value)
    return value


def _integer(key, value, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise errors.SchemaError(key, "expected an integer, got %r" % (value,))
    if minimum is not None and value < minimum:
        raise errors.SchemaError(key, "expected an integer >= %d, got %d" % (minimum, value))
    return value


def _choice(key, value, enum):
    if not enum.valid(value):
        raise errors.SchemaError(key, "expected one of %s, got %r" % (enum.values(), value))
    return value


def _distinct(key, points):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if abs(points[i] - points[j]) <= Tolerance.DISTINCT_POINTS:
                raise errors.SchemaError(key, "entries %d and %d coincide" % (i, j))


def _real_pair(key, value):
    if not isinstance(value, list) or len(value) != 2:
        raise errors.SchemaError(key, "expected an [alpha, beta] pair")
    return (_number(key + "[0]", value[0]), _number(key + "[1]", value[1]))


def _check_block(name, block, lenient):
    if not isinstance(block, dict):
        raise errors.SchemaError(name, "expected an object")
    allowed = SCHEMA[name]
    return {k: v for k, v in block.items() if k in allowed or _unknown("%s.%s" % (name, k), lenient)}


def _validate_terms(value, lenient):
    if not isinstance(value, list) or not value:
        raise errors.SchemaError("terms", "expected a nonempty list of terms")
    out = []
    for i, term in enumerate(value):
        key = "terms[%d]" % i
        if not isinstance(term, dict):
            raise errors.SchemaError(key, "expected an object")
        for k in term:
            if k not in TERM_KEYS:
                _unknown("%s.%s" % (key, k), lenient)
        if "kappa" not in term:
            raise errors.SchemaError(key + ".kappa", "missing")
        kappa = _complex(key + ".kappa", term["kappa"])
        if "p" in term or "k" in term:
            if "p" not in term or "k" not in term:
                raise errors.SchemaError(key, "p and k come together")
            out.append(
                ("complex", kappa, _complex(key + ".p", term["p"]), _complex(key + ".k", term["k"]))
            )
        elif "alpha" in term and "beta" in term:
            out.append(
                (
                    "real",
                    kappa,
                    _number(key + ".alpha", term["alpha"]),
                    _number(key + ".beta", term["beta"]),
                )
            )
        else:
            raise errors.SchemaError(key, "give either p and k or alpha and beta")
    return out


def _validate_canonical(value, lenient):
    if not isinstance(value, list) or not value:
        raise errors.SchemaError("canonical", "expected a nonempty list of terms")
    out = []
    for i, term in enumerate(value):
        key = "canonical[%d]" % i
        if not isinstance(term, dict):
            raise errors.SchemaError(key, "expected an object")
        for k in term:
            if k not in CANONICAL_KEYS:
                _unknown("%s.%s" % (key, k), lenient)
        for k in sorted(CANONICAL_KEYS):
            if k not in term:
                raise errors.SchemaError("%s.%s" % (key, k), "missing")
        out.append(
            tuple(_complex("%s.%s" % (key, k), term[k]) for k in ("alpha", "R", "Q"))
        )
    return out


def _validate_tolerances(value, lenient):
    if not isinstance(value, dict):
        raise errors.SchemaError("tolerances", "expected an object")
    names = tolerance_names()
    out = {}
    for k, v in value.items():
        if k not in names:
            _unknown("tolerances.%s" % k, lenient)
            continue
        out[k] = _number("tolerances.%s" % k, v, positive=True)
    return out


def _validate_block(name, block):
    if name == "spectral":
        k = _complex_list("spectral.k_points", block.get("k_points"), 1)
        p = _complex_list("spectral.p_points", block.get("p_points"), 1)
        if len(k) != len(p):
            raise errors.SchemaError("spectral.p_points", "needs as many points as k_points")
        _distinct("spectral.k_points", k)
        _distinct("spectral.p_points", p)
        divisor = _complex_list("spectral.divisor", block.get("divisor", []))
        if len(divisor) != len(k) - 1:
            raise errors.SchemaError(
                "spectral.divisor", "needs %d points for %d k points" % (len(k) - 1, len(k))
            )
        out = {"k_points": k, "p_points": p, "divisor": divisor}
        if "s" in block:
            out["s"] = _complex("spectral.s", block["s"])
        return out
    if name == "grid":
        missing = [k for k in SCHEMA["grid"] if k not in block]
        if missing:
            raise errors.SchemaError("grid.%s" % missing[0], "missing")
        return {
            "x0": _number("grid.x0", block["x0"]),
            "y0": _number("grid.y0", block["y0"]),
            "hx": _number("grid.hx", block["hx"], positive=True),
            "hy": _number("grid.hy", block["hy"], positive=True),
            "nx": _integer("grid.nx", block["nx"], 1),
            "ny": _integer("grid.ny", block["ny"], 1),
        }
    if name == "ground_state":
        out = {"sector": _choice("ground_state.sector", block.get("sector", Sector.Minus.value), Sector)}
        out["gauge"] = (
            _real_pair("ground_state.gauge", block["gauge"]) if "gauge" in block else None
        )
        write_psi = block.get("write_psi", False)
        if not isinstance(write_psi, bool):
            raise errors.SchemaError("ground_state.write_psi", "expected true or false")
        out["write_psi"] = write_psi
        return out
    if name == "polygon":
        queries = block.get("queries", [])
        if not isinstance(queries, list):
            raise errors.SchemaError("polygon.queries", "expected a list of [alpha, beta] pairs")
        return {
            "queries": [_real_pair("polygon.queries[%d]" % i, v) for i, v in enumerate(queries)],
            "oracle_radius": _number("polygon.oracle_radius", block.get("oracle_radius", 40.0), True),
            "oracle_points": _integer("polygon.oracle_points", block.get("oracle_points", 401), 3),
        }
    if name == "flux":
        radii = block.get("radii")
        if not isinstance(radii, list) or not radii:
            raise errors.SchemaError("flux.radii", "expected a nonempty list of radii")
        return {
            "radii": [_number("flux.radii[%d]" % i, r, positive=True) for i, r in enumerate(radii)],
            "order": _integer("flux.order", block.get("order", Defaults.ASYMPTOTIC_ORDER), 1),
            "convention": _choice(
                "flux.convention",
                block.get("convention", AsymptoticConvention.Derived.value),
                AsymptoticConvention,
            ),
        }
    if name == "lattice":
        return {
            "omega1": _number("lattice.omega1", block.get("omega1", 1.0), positive=True),
            "omega2": _complex("lattice.omega2", block.get("omega2", [0.0, 1.0])),
        }
    if name == "data":
        missing = [k for k in SCHEMA["data"] if k not in block]
        if missing:
            raise errors.SchemaError("data.%s" % missing[0], "missing")
        return {
            "Q": _complex_list("data.Q", block["Q"], 1),
            "R": _complex_list("data.R", block["R"], 1),
            "divisor": _complex_list("data.divisor", block["divisor"], 1),
            "P": _complex("data.P", block["P"]),
        }
    if name == "periodicity":
        indices = block.get("indices", [[0, 0]])
        if not isinstance(indices, list) or not indices:
            raise errors.SchemaError("periodicity.indices", "expected a list of [n, m] pairs")
        pairs = []
        for i, pair in enumerate(indices):
            key = "periodicity.indices[%d]" % i
            if not isinstance(pair, list) or len(pair) != 2:
                raise errors.SchemaError(key, "expected an [n, m] pair")
            pairs.append((_integer(key + "[0]", pair[0]), _integer(key + "[1]", pair[1])))
        return {
            "indices": pairs,
            "seed": _complex("periodicity.seed", block.get("seed", [1.5, 0.1])),
            "beta": _number("periodicity.beta", block.get("beta", 0.03), positive=True),
        }
    if name == "bloch":
        if "p_points" not in block:
            raise errors.SchemaError("bloch.p_points", "missing")
        out = {
            "P": _complex("bloch.P", block.get("P", [0.31, 0.17])),
            "p_points": _complex_list("bloch.p_points", block["p_points"], 1),
            "locus_seed": None,
        }
        if "locus_seed" in block:
            out["locus_seed"] = _complex("bloch.locus_seed", block["locus_seed"])
        return out
    if name == "cell":
        return {"n": _integer("cell.n", block.get("n", 41), 2)}
    if name == "verify":
        return {"suite": _choice("verify.suite", block.get("suite", Suite.All.value), Suite)}
    if name == "flags":
        sign = _integer("flags.field_sign", block.get("field_sign", Defaults.FIELD_SIGN))
        if sign not in (-1, 1):
            raise errors.SchemaError("flags.field_sign", "expected -1 or 1")
        order = _integer("flags.fd_order", block.get("fd_order", Defaults.FD_ORDER))
        if order not in (2, 4):
            raise errors.SchemaError("flags.fd_order", "expected 2 or 4")
        return {"field_sign": sign, "fd_order": order}
    raise errors.SchemaError(name, "no validator")


class RunConfig(object):
    """A validated run configuration."""

    def __init__(self, mode, blocks, lenient=False):
        self.mode = mode
        self.blocks = blocks
        self.lenient = lenient

    def get(self, name, default=None):
        return self.blocks.get(name, default)

    def __contains__(self, name):
        return name in self.blocks

    def block(self, name):
        """The named block, or its defaults when the config omits it."""
        if name in self.blocks:
            return self.blocks[name]
        return _validate_block(name, {})

    def tolerance(self, name):
        """Config override of a ``Tolerance`` constant, else its default."""
        overrides = self.blocks.get("tolerances", {})
        if name.lower() in overrides:
            return overrides[name.lower()]
        return getattr(Tolerance, name.upper())

    @property
    def field_sign(self):
        return self.blocks.get("flags", {}).get("field_sign", Defaults.FIELD_SIGN)

    @property
    def fd_order(self):
        return self.blocks.get("flags", {}).get("fd_order", Defaults.FD_ORDER)

    def __repr__(self):
        return "RunConfig(mode=%r, blocks=%s)" % (self.mode, sorted(self.blocks))


def load_tree(text):
    """Parse config text into a plain dict, with 1-based error positions."""
    try:
        tree = yaml.load(text, Loader=_ConfigLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is None:
            raise errors.ParseError(str(e))
        raise errors.ParseError(
            getattr(e, "problem", None) or str(e), mark.line + 1, mark.column + 1
        )
    if tree is None:
        raise errors.ParseError("config is empty", 1, 1)
    if not isinstance(tree, dict):
        raise errors.SchemaError("<root>", "expected an object at the top level")
    return tree


def parse_config(text, lenient=False):
    """Validate config text into a RunConfig.

    :param text: the config file contents.
    :param lenient: log unknown keys instead of raising SchemaError.
    """
    tree = load_tree(text)
    if "mode" not in tree:
        raise errors.SchemaError("mode", "missing")
    mode = _choice("mode", tree["mode"], RunMode)
    blocks = {}
    for name, value in tree.items():
        if name == "mode":
            continue
        if name not in SCHEMA:
            _unknown(name, lenient)
        elif name == "terms":
            blocks[name] = _validate_terms(value, lenient)
        elif name == "canonical":
            blocks[name] = _validate_canonical(value, lenient)
        elif name == "tolerances":
            blocks[name] = _validate_tolerances(value, lenient)
        else:
            blocks[name] = _validate_block(name, _check_block(name, value, lenient))
    for alternatives in REQUIRED[mode]:
        if not any(a in blocks for a in alternatives):
            raise errors.SchemaError(
                alternatives[0], "mode %s needs one of the blocks %s" % (mode, list(alternatives))
            )
    if mode == RunMode.Bloch.value and "periodicity" in blocks and "data" not in blocks:
        if "canonical" not in blocks and len(blocks["periodicity"]["indices"]) != 1:
            raise errors.SchemaError(
                "periodicity.indices", "bloch mode uses exactly one [n, m] pair"
            )
    logging.debug("parsed config %s" % sorted(blocks))
    return RunConfig(mode, blocks, lenient)


def load_config(path, lenient=False):
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read(), lenient)


def resolve_threads(cli_value=None):
    """--threads, else MAGPAULI_THREADS, else 1."""
    if cli_value is not None:
        value, source = cli_value, "--threads"
    else:
        env = os.getenv(Defaults.THREADS_ENV)
        if env is None or env.strip() == "":
            return Defaults.THREADS
        source = Defaults.THREADS_ENV
        try:
            value = int(env)
        except ValueError:
            raise errors.SchemaError(source, "expected an integer, got %r" % env)
    if value < 1:
        raise errors.SchemaError(source, "expected a positive thread count, got %s" % value)
    return value
