"""Command line front end: ``toepexp {expm,condition,bounds,bench,gap-sweep}``.

Exit codes: 0 on success, 2 on usage errors (bad flags or values), 1 when a
numerical routine fails; the failing module and function are printed to
stderr.  Reports are deterministic for a fixed configuration and seed;
wall-clock columns only appear with ``--timings``.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
import traceback

import numpy as np

from .bounds import bound_report, spectral_norm
from .driver import (
    DEFAULT_M_CAP, ReferenceMode, gap_sweep, reference_solution, residual_gap,
    run_exact, run_inexact,
)
from .exceptions import ToeplitzExpmError
from .gsf import NormMode, build_gsf, effective_condition_numbers
from .toeplitz import SymbolKind, SymbolSpec, from_symbol, read_matrix, write_matrix
from .validation import dense_cap

__all__ = ["main", "run_cli", "build_parser"]

SYMBOL_ALIASES = {
    "theta2": SymbolKind.THETA_SQUARED,
    "theta2-itheta3": SymbolKind.THETA_SQUARED_PLUS_I_THETA_CUBED,
    "parter": SymbolKind.PARTER,
}
for _kind in SymbolKind:
    SYMBOL_ALIASES[_kind.value] = _kind

NORM_MODE_ALIASES = {"exact": NormMode.EXACT_1NORM, "proxy": NormMode.COLROW_PROXY}
for _mode in NormMode:
    NORM_MODE_ALIASES[_mode.value] = _mode

DEFAULT_FORMAT = {"expm": "json", "condition": "json", "bounds": "csv", "bench": "csv",
                  "gap-sweep": "csv"}


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_list(text):
    try:
        vals = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return vals


def _symbol(text):
    try:
        return SYMBOL_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown symbol {text!r}; choose from {', '.join(sorted(SYMBOL_ALIASES))}")


def _norm_mode(text):
    try:
        return NORM_MODE_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown norm mode {text!r}")


def _add_common(p, tol_exp=True, t=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--symbol", type=_symbol,
                     help="theta2, theta2-itheta3 or parter (full enum names also accepted)")
    src.add_argument("--matrix", metavar="FILE", help="Toeplitz matrix in the text format")
    p.add_argument("--n", type=_int_list, default=None,
                   help="comma-separated sizes (required with --symbol)")
    p.add_argument("--coefficients", choices=("analytic", "quadrature"), default="analytic",
                   help="how symbol Fourier coefficients are obtained")
    p.add_argument("--gamma", type=float, default=0.1)
    if t:
        p.add_argument("--t", type=float, default=1.0)
    if tol_exp:
        p.add_argument("--tol-exp", type=_float_list, default=[1e-6])
    p.add_argument("--output", "-o", metavar="FILE", help="write the report here (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--timings", action="store_true", help="include wall-clock columns")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="toepexp", description="Toeplitz matrix exponential actions via the "
        "Gohberg-Semencul inverse and shift-and-invert Arnoldi.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expm", help="compute exp(-tA) v with v = ones")
    _add_common(p)
    p.add_argument("--algorithm", choices=("exact", "inexact"), default="inexact")
    p.add_argument("--m-max", type=int, default=DEFAULT_M_CAP)
    p.add_argument("--verify", action="store_true",
                   help="compare with a dense reference and report the residual gap")
    p.add_argument("--save-y", metavar="FILE", help="write y as 're im' lines")
    p.add_argument("--save-matrix", metavar="FILE", help="write A in the matrix text format")

    p = sub.add_parser("condition", help="GSF condition number of I + gamma A")
    _add_common(p, tol_exp=False, t=False)
    p.add_argument("--norm-mode", type=_norm_mode, default=NormMode.EXACT_1NORM,
                   help="exact_1norm (exact) or colrow_proxy (proxy)")

    p = sub.add_parser("bounds", help="GSF perturbation bounds against a dense oracle")
    _add_common(p, tol_exp=False, t=False)
    p.add_argument("--eps", type=_float_list, default=[1e-6, 1e-9, 1e-12])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-seeds", type=int, default=1)

    p = sub.add_parser("bench", help="exact versus inexact runs")
    _add_common(p)
    p.add_argument("--m-cap", type=int, default=DEFAULT_M_CAP)
    p.add_argument("--verify", action="store_true",
                   help="dense reference for Error and a residual-gap column")

    p = sub.add_parser("gap-sweep", help="residual gap over a tol_exp sweep")
    _add_common(p)
    p.add_argument("--m-cap", type=int, default=DEFAULT_M_CAP)
    p.add_argument("--verify", action="store_true", help="dense reference for the error column")
    p.add_argument("--n-jobs", type=int, default=1)
    return parser


def _matrices(args):
    """Yield ``A`` for each requested size (or the single file matrix)."""
    if args.matrix is not None:
        if args.n is not None:
            raise UsageError("--n cannot be combined with --matrix")
        return [read_matrix(args.matrix)]
    if args.n is None:
        raise UsageError("--symbol needs --n")
    spec = SymbolSpec(args.symbol, coefficients=args.coefficients)
    return [from_symbol(spec, n) for n in args.n]


def _reference(A, v, t, verify):
    if verify:
        return reference_solution(A, v, t, ReferenceMode.DENSE_EXPM)
    return reference_solution(A, v, t, ReferenceMode.TIGHT_ARNOLDI)


def _cmd_expm(args):
    rows = []
    for A in _matrices(args):
        if args.save_matrix:
            write_matrix(A, args.save_matrix)
        v = np.ones(A.n)
        run = run_exact if args.algorithm == "exact" else run_inexact
        ref = reference_solution(A, v, args.t, ReferenceMode.DENSE_EXPM) if args.verify else None
        for tol in args.tol_exp:
            rep = run(A, v, args.t, args.gamma, tol, m_max=args.m_max, reference=ref,
                      verify=args.verify)
            row = {"n": A.n, "t": args.t, "gamma": args.gamma}
            row.update(rep.summary())
            row["y_2norm"] = float(np.linalg.norm(rep.y))
            row["y_head"] = [[float(z.real), float(z.imag)] for z in rep.y[:4]]
            if args.timings:
                row["wall_times"] = rep.wall_times
            rows.append(row)
            if args.save_y:
                with open(args.save_y, "w") as fh:
                    for z in rep.y:
                        fh.write(f"{z.real:.17g} {z.imag:.17g}\n")
    return rows


def _cmd_condition(args):
    rows = []
    for A in _matrices(args):
        T = A.shifted(args.gamma)
        t0 = time.perf_counter()
        G = build_gsf(T, 1e-14)
        k_i, k_ii = effective_condition_numbers(G, T, args.norm_mode)
        t1 = time.perf_counter()
        row = {"n": A.n, "gamma": args.gamma, "norm_mode": args.norm_mode.value,
               "kappa_gsf": k_i * k_ii, "kappa_eff_I": k_i, "x1_over_xi0": k_ii,
               "solve_iters": [r.iterations for r in G.solve_reports],
               "kappa_1": None, "ratio": None}
        if A.n <= dense_cap():
            D = T.to_dense()
            kappa_1 = float(np.linalg.norm(D, 1) * np.linalg.norm(np.linalg.inv(D), 1))
            row["kappa_1"] = kappa_1
            row["ratio"] = row["kappa_gsf"] / kappa_1
        if args.timings:
            row["gsf_seconds"] = t1 - t0
            row["dense_seconds"] = time.perf_counter() - t1 if row["kappa_1"] else None
        rows.append(row)
    return rows


def _cmd_bounds(args):
    if args.n_seeds < 1:
        raise UsageError("--n-seeds must be >= 1")
    if min(args.eps) < 0:
        raise UsageError("--eps values must be nonnegative")
    rows = []
    for A in _matrices(args):
        T = A.shifted(args.gamma)
        t0 = time.perf_counter()
        G = build_gsf(T, 1e-14)
        inv = np.linalg.inv(T.to_dense())
        norms = (float(np.max(np.abs(inv).sum(axis=0))), spectral_norm(inv))
        for eps in args.eps:
            for seed in range(args.seed, args.seed + args.n_seeds):
                rep = bound_report(T, eps, seed=seed, x=G.x, y=G.y, dense_inverse=inv,
                                   inverse_norms=norms)
                row = rep.as_dict()
                if args.timings:
                    row["seconds"] = time.perf_counter() - t0
                rows.append(row)
    return rows


def _cmd_bench(args):
    rows = []
    for A in _matrices(args):
        v = np.ones(A.n)
        ref = _reference(A, v, args.t, args.verify)
        for tol in args.tol_exp:
            for rep in (run_exact(A, v, args.t, args.gamma, tol, reference=ref,
                                  verify=args.verify),
                        run_inexact(A, v, args.t, args.gamma, tol, m_cap=args.m_cap,
                                    reference=ref, verify=args.verify)):
                row = {"n": A.n, "algorithm": rep.algorithm.value, "tol_exp": tol,
                       "tol_sys": rep.tol_sys, "Error": rep.relative_error,
                       "m": rep.expm_result.m, "gmres_iters_x": rep.gsf_solve_iters[0],
                       "gmres_iters_y": rep.gsf_solve_iters[1]}
                if args.verify:
                    row["gap"] = rep.residual_gap
                if args.timings:
                    w = rep.wall_times
                    row.update({"CPU": w["total"], "solve_systems": w["solve_systems"],
                                "arnoldi": w["arnoldi"], "small_expm": w["small_expm"]})
                rows.append(row)
    return rows


def _cmd_gap_sweep(args):
    rows = []
    for A in _matrices(args):
        v = np.ones(A.n)
        ref = _reference(A, v, args.t, args.verify)
        t0 = time.perf_counter()
        cells = gap_sweep(A, v, args.t, args.gamma, args.tol_exp, reference=ref,
                          m_cap=args.m_cap, n_jobs=args.n_jobs)
        for cell in cells:
            row = {"n": A.n, "tol_exp": cell["tol_exp"], "tol_sys": cell["tol_sys"],
                   "gap": cell["gap"], "gap_ratio": cell["gap"] / cell["tol_exp"],
                   "error": cell["error"], "m": cell["m"],
                   "assumption_ratio": cell["report"].assumption_ratio}
            if args.timings:
                row["CPU"] = cell["report"].wall_times["total"]
            rows.append(row)
        if args.timings:
            rows[-1]["sweep_seconds"] = time.perf_counter() - t0
    return rows


COMMANDS = {"expm": _cmd_expm, "condition": _cmd_condition, "bounds": _cmd_bounds,
            "bench": _cmd_bench, "gap-sweep": _cmd_gap_sweep}


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6e}"
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def render(rows, fmt, command):
    """Serialize report rows as CSV or JSON text."""
    if fmt == "json":
        return json.dumps({"command": command, "rows": _jsonable(rows)}, indent=2) + "\n"
    buf = io.StringIO()
    fields = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(_jsonable(row.get(k))) for k in fields})
    return buf.getvalue()


def _origin(exc):
    """``module.function`` of the innermost package frame that raised `exc`."""
    pkg_dir = os.path.dirname(os.path.abspath(__file__))
    frames = traceback.extract_tb(exc.__traceback__)
    for fr in reversed(frames):
        if os.path.dirname(os.path.abspath(fr.filename)) == pkg_dir:
            mod = os.path.splitext(os.path.basename(fr.filename))[0]
            return f"{__package__}.{mod}.{fr.name}"
    return "unknown"


def run_cli(argv=None):
    """Parse `argv`, run the command, and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    fmt = args.format or DEFAULT_FORMAT[args.command]
    try:
        rows = COMMANDS[args.command](args)
    except ToeplitzExpmError as exc:
        print(f"toepexp {args.command}: {type(exc).__name__} in {_origin(exc)}: {exc}",
              file=sys.stderr)
        return 1
    except (UsageError, ValueError, OSError) as exc:
        print(f"toepexp {args.command}: {exc}", file=sys.stderr)
        return 2
    text = render(rows, fmt, args.command)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run_cli(argv))
