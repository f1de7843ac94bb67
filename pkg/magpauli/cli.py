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

"""The ``magpauli`` command line: ``run`` a config, or ``verify`` the
invariant suites.
"""

import argparse
import logging
import os
import sys

import numpy as np
import pyaml

from magpauli import elliptic, expsum, flux, genus1, growth, numerics, verification
from magpauli._version import __version__
from magpauli.core import config as run_config
from magpauli.core import errors
from magpauli.core.constants import (
    AsymptoticConvention,
    Columns,
    OutputFile,
    RunMode,
    Suite,
)
from magpauli.core.utils import (
    complex_pair,
    ordered_map,
    to_plain,
    write_csv_atomic,
    write_text_atomic,
)


def build_sum(cfg):
    """The exponential sum of a genus-0 config, and its report entries."""
    report = {}
    if "spectral" in cfg:
        block = cfg.get("spectral")
        data = expsum.SpectralDataG0(block["k_points"], block["p_points"], block["divisor"])
        c = expsum.build_exponential_sum(data)
        residues = expsum.check_residues(data, block.get("s"), cfg.tolerance("reality"))
        report["residues"] = {
            "s": complex_pair(residues.s),
            "matched": bool(residues.matched),
            "max_mismatch": residues.max_mismatch,
        }
        report["source"] = "spectral"
    else:
        terms = []
        for kind, kappa, a, b in cfg.get("terms"):
            form = (
                numerics.ComplexLinearForm(a, b)
                if kind == "complex"
                else numerics.ComplexLinearForm.from_real(a, b)
            )
            terms.append((kappa, form))
        c = expsum.ExponentialSum(terms)
        report["source"] = "terms"
    report["reality"] = expsum.classify_reality(c, cfg.tolerance("reality")).to_dict()
    return c, report


def _grid(cfg):
    g = cfg.get("grid")
    return numerics.Grid2D(g["x0"], g["y0"], g["hx"], g["hy"], g["nx"], g["ny"])


def run_genus0(cfg, out_dir, threads):
    c, report = build_sum(cfg)
    expsum.write_c_terms(os.path.join(out_dir, OutputFile.C_TERMS), c)
    grid = _grid(cfg)
    X, Y = grid.mesh()
    values = c.evaluate(X, Y)
    B = expsum.magnetic_field(c, X, Y, sign=cfg.field_sign, on_zero="nan")
    columns = [X, Y, values.real, B]
    header = list(Columns.FIELD)
    options = cfg.block("ground_state")
    if options.get("write_psi"):
        W = options.get("gauge")
        if W is None:
            W = growth.minimal_zero_representative(growth.positive_forms(c))
        state = growth.ground_state(c, W, options["sector"])
        columns.append(np.abs(state(X, Y)) ** 2)
        header.append(Columns.FIELD_PSI)
        report["ground_state"] = state.metadata()
        try:
            residual = numerics.fd_apply_pauli(
                growth.potential(c), state, options["sector"], grid, cfg.fd_order
            )
            scale = float(np.max(np.abs(state(X, Y))))
            report["ground_state"]["grid_residual"] = float(np.max(np.abs(residual))) / scale
        except errors.GridTooSmall as e:
            logging.warning("no grid residual: %s" % e)
    rows = [[float(col.flat[i]) for col in columns] for i in range(X.size)]
    write_csv_atomic(os.path.join(out_dir, OutputFile.FIELD), header, rows)
    report["grid"] = repr(grid)
    report["zeros_on_grid"] = int(np.sum(~np.isfinite(B)))
    return report


def run_polygon(cfg, out_dir, threads):
    c, report = build_sum(cfg)
    forms = growth.positive_forms(c)
    if not forms:
        raise errors.EmptyPositivePart("c has no positive exponential terms")
    profile = growth.polygon_T(forms)
    rows = [[i, float(a), float(b)] for i, (a, b) in enumerate(profile.polygon.vertices)]
    write_csv_atomic(os.path.join(out_dir, OutputFile.POLYGON), Columns.POLYGON, rows)
    report["polygon"] = profile.to_dict()
    positive, others = growth.split_mixed_class(c)
    if others:
        mixed = growth.mixed_class_admissibility(positive, others)
        report["mixed_class"] = {
            "admissible": mixed.admissible,
            "violations": [list(f) for f in mixed.violations],
        }
    block = cfg.block("polygon")

    def query(W):
        return {
            "W": list(W),
            "membership": profile.membership(W),
            "oracle_log_max": growth.boundedness_oracle(
                c, W, block["oracle_radius"], block["oracle_points"]
            ),
        }

    report["queries"] = ordered_map(query, block.get("queries", []), threads)
    return report


def run_flux_scan(cfg, out_dir, threads):
    c, report = build_sum(cfg)
    block = cfg.get("flux")
    rows = flux.flux_scan(c, block["radii"], cfg.tolerance("quad"), threads)
    write_csv_atomic(os.path.join(out_dir, OutputFile.FLUX), Columns.FLUX, [list(r) for r in rows])
    report["indicator_integral"] = flux.indicator_integral(flux.gauge_fixed_forms(c))
    profile = growth.polygon_T(growth.positive_forms(c))
    if profile.stable:
        report["corners"] = [
            {"a": k.a, "phi0": k.phi0, "lambdas": list(k.lambdas)}
            for k in flux.corners(growth.positive_forms(c), c.kappas.real)
        ]
        report["asymptotics"] = {
            convention: [
                flux.flux_asymptotic(c, R, block["order"], convention) for R in block["radii"]
            ]
            for convention in AsymptoticConvention.values()
        }
        report["convention"] = block["convention"]
    return report


def _context(cfg):
    block = cfg.get("lattice")
    return elliptic.WeierstrassContext(
        elliptic.Lattice(block["omega1"], block["omega2"]), cfg.tolerance("series")
    )


def _canonical(cfg):
    return [genus1.CanonicalTerm(*t) for t in cfg.get("canonical")]


def _data(ctx, cfg):
    d = cfg.get("data")
    return genus1.GenusOneData(ctx, d["Q"], d["R"], d["divisor"], d["P"])


def run_genus1(cfg, out_dir, threads):
    ctx = _context(cfg)
    report = {"eta": [complex_pair(e) for e in ctx.etas]}
    if "canonical" in cfg:
        terms = _canonical(cfg)
        field = genus1.build_canonical(ctx, terms)
        typing = genus1.reality_types(terms)
        report["reality"] = {
            "type_counts": list(typing.counts),
            "unmatched": typing.unmatched,
            "is_real": typing.is_real,
        }
    else:
        data = _data(ctx, cfg)
        field = genus1.SigmaSum(ctx, genus1.data_terms(data))
        report["compatibility_residual"] = genus1.compatibility_residual(data, 0.0)
    if "grid" in cfg:
        X, Y = _grid(cfg).mesh()
        Z = X + 1j * Y
    else:
        Z = genus1.cell_grid(ctx, cfg.block("cell")["n"])

    def row_block(j):
        z = Z[j]
        values = field(z)
        B = field.field(z, cfg.field_sign, on_zero="nan")
        return [
            [float(z[i].real), float(z[i].imag), float(values[i].real), float(B[i])]
            for i in range(z.size)
        ]

    rows = [r for chunk in ordered_map(row_block, range(Z.shape[0]), threads) for r in chunk]
    write_csv_atomic(os.path.join(out_dir, OutputFile.FIELD), Columns.GENUS1_FIELD, rows)
    minimum, imag = genus1.positivity_scan(field, ctx)
    report["positivity"] = {"min_c_tilde": minimum, "relative_imaginary_part": imag}
    report["periodicity_residual"] = genus1.periodicity_residual(field, ctx, sign=cfg.field_sign)
    try:
        cell = genus1.cell_flux(field, ctx, cfg.field_sign)
        report["cell_flux"] = {"flux": cell.flux, "quanta": cell.quanta}
    except errors.ZeroOnBoundary as e:
        logging.warning("no cell flux: %s" % e)
        report["cell_flux"] = None
    return report


def _search(ctx, cfg, pair):
    block = cfg.get("periodicity")
    return genus1.periodicity_search(ctx, pair[0], pair[1], block["seed"], block["beta"])


def run_periodicity(cfg, out_dir, threads):
    ctx = _context(cfg)

    def solve(pair):
        result = _search(ctx, cfg, pair)
        field = genus1.build_canonical(ctx, result.terms)
        cell = genus1.cell_flux(field, ctx, cfg.field_sign)
        return result, cell

    results = ordered_map(solve, cfg.get("periodicity")["indices"], threads)
    rows = [
        [
            r.n,
            r.m,
            r.lam.real,
            r.lam.imag,
            r.equation_residual,
            r.periodicity_residual,
            cell.quanta,
        ]
        for r, cell in results
    ]
    write_csv_atomic(os.path.join(out_dir, OutputFile.PERIODICITY), Columns.PERIODICITY, rows)
    lams = [r.lam for r, _ in results]
    distinct = all(
        abs(lams[i] - lams[j]) > 1e-8 for i in range(len(lams)) for j in range(i + 1, len(lams))
    )
    return {
        "solutions": [
            {"n": r.n, "m": r.m, "lambda": r.lam, "flux": cell.flux, "iterations": r.iterations}
            for r, cell in results
        ],
        "distinct": distinct,
    }


def _bloch_model(ctx, cfg):
    block = cfg.get("bloch")
    if "data" in cfg:
        return genus1.BlochModel.from_data(_data(ctx, cfg))
    if "canonical" in cfg:
        terms = _canonical(cfg)
    else:
        terms = _search(ctx, cfg, cfg.get("periodicity")["indices"][0]).terms
    return genus1.BlochModel.from_canonical(ctx, genus1.build_canonical(ctx, terms), block["P"])


def run_bloch(cfg, out_dir, threads):
    ctx = _context(cfg)
    block = cfg.get("bloch")
    model = _bloch_model(ctx, cfg)
    samples = model.sample_points()

    def evaluate(p):
        m = genus1.bloch_multipliers(model, p, samples)
        return m, genus1.unitarize(model, p, m)

    results = ordered_map(evaluate, block["p_points"], threads)
    rows = [
        [p.real, p.imag, abs(m.kx), float(np.angle(m.kx)), abs(m.ky), float(np.angle(m.ky))]
        for p, (m, _) in zip(block["p_points"], results)
    ]
    write_csv_atomic(os.path.join(out_dir, OutputFile.MULTIPLIERS), Columns.MULTIPLIERS, rows)
    report = {
        "rho": list(model.rho(samples)),
        "unitarized": [
            {
                "p": p,
                "u": u.u,
                "kx": u.kx,
                "ky": u.ky,
                "closed_form_mismatch": u.closed_form_mismatch,
                "printed": list(genus1.printed_unitary_forms(ctx, p)),
            }
            for p, (_, u) in zip(block["p_points"], results)
        ],
    }
    if block["locus_seed"] is not None:
        p = genus1.unitarity_locus_point(model, block["locus_seed"], samples)
        m = genus1.bloch_multipliers(model, p, samples)
        report["unitarity_locus"] = {"p": p, "abs_kx": abs(m.kx), "abs_ky": abs(m.ky)}
    return report


def run_verify(suite, out_dir):
    checks = verification.run_suite(suite)
    text = verification.format_report(checks)
    sys.stdout.write(text)
    if out_dir is not None:
        write_text_atomic(os.path.join(out_dir, OutputFile.VERIFY_REPORT), text)
    return all(c.passed for c in checks)


RUNNERS = {
    RunMode.Genus0.value: run_genus0,
    RunMode.Polygon.value: run_polygon,
    RunMode.FluxScan.value: run_flux_scan,
    RunMode.Genus1.value: run_genus1,
    RunMode.Periodicity.value: run_periodicity,
    RunMode.Bloch.value: run_bloch,
}


def run(cfg, out_dir, threads=1):
    """Execute one validated config; returns the process exit code."""
    os.makedirs(out_dir, exist_ok=True)
    logging.info("running mode %s into %s" % (cfg.mode, out_dir))
    if cfg.mode == RunMode.Verify.value:
        suite = cfg.block("verify")["suite"]
        passed = run_verify(suite, out_dir)
        report = {"suite": suite, "passed": passed}
    else:
        report = RUNNERS[cfg.mode](cfg, out_dir, threads)
        passed = True
    report = dict(report, mode=cfg.mode, version=__version__, field_sign=cfg.field_sign)
    write_text_atomic(
        os.path.join(out_dir, OutputFile.REPORT),
        pyaml.dump(to_plain(report), string_val_style="plain"),
    )
    return 0 if passed else 1


def _epilog():
    lines = ["exit codes:"]
    lines.extend("  %3d  %s" % row for row in errors.exit_code_table())
    return "\n".join(lines)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="magpauli",
        description="Algebro-geometric 2D Pauli operators: fields, polygons, fluxes, Bloch data.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    sub.required = True
    p_run = sub.add_parser("run", help="run a config file", epilog=_epilog(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    p_run.add_argument("config", help="path of the JSON config")
    p_run.add_argument("--lenient", action="store_true", help="warn on unknown keys")
    p_run.add_argument("--out-dir", default=".", help="directory for the outputs")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $MAGPAULI_THREADS or 1)")
    p_run.add_argument("--verbose", action="store_true", help="debug logging")
    p_verify = sub.add_parser("verify", help="run the invariant suites", epilog=_epilog(),
                              formatter_class=argparse.RawDescriptionHelpFormatter)
    p_verify.add_argument("--suite", default=Suite.All.value, choices=Suite.values())
    p_verify.add_argument("--out-dir", default=None, help="also write verify_report.txt here")
    p_verify.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        if args.command == "verify":
            return 0 if run_verify(args.suite, args.out_dir) else 1
        threads = run_config.resolve_threads(args.threads)
        cfg = run_config.load_config(args.config, lenient=args.lenient)
        return run(cfg, args.out_dir, threads)
    except errors.MagpauliError as e:
        logging.error("%s: %s" % (type(e).__name__, e))
        return e.exit_code
    except OSError as e:
        logging.error("%s" % e)
        return 2
    except Exception:
        logging.exception("internal error")
        return errors.MagpauliError.exit_code


if __name__ == "__main__":
    sys.exit(main())
