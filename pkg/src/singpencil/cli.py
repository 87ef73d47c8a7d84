"""Command-line interface.

Subcommands

* ``solve``        compute finite eigenvalues of a pencil given as two
                   Matrix Market files (or a shipped pencil)
* ``gen``          generate a structured singular pencil + ground truth
* ``mc``           Monte Carlo ratio experiment (histogram, mean, KS)
* ``bounds``       tail-bound table from the direct product-law sampler
* ``sensitivity``  delta-weak condition number estimate

Exit codes: 0 success, 2 genericity failure, 3 I/O error, 64 usage error.
Every JSON report embeds a run manifest; CSV output carries it as a leading
``#`` comment line.  All commands are deterministic for a fixed ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import numpy as np
import scipy

from . import __version__
from .experiments import bounds_figure, mc_ratio
from .kcfgen import KcfParseError, disguise, parse_kcf_string, paper_pencil, assemble
from .matcore import FieldKind
from .mmio import MatrixMarketError, read_matrix, write_matrix
from .oracle import weak_cond_estimate
from .pencil import Pencil, normal_rank
from .randstat import RngState, ks_critical
from .solvers import GenericityFailure, MethodConfig, solve

EXIT_OK = 0
EXIT_GENERICITY = 2
EXIT_IO = 3
EXIT_USAGE = 64

PAPER_PENCILS = ("hmp8x8", "delta25", "blockdiag10")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class UsageError(Exception):
    pass


def _manifest(command: str, args: argparse.Namespace) -> dict:
    # deliberately excludes wall-clock time: output files must be
    # byte-identical for a fixed seed (timing goes to stderr instead)
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command") and v is not None}
    return {
        "schema": "singpencil/1",
        "command": command,
        "config": echo,
        "seed": getattr(args, "seed", None),
        "versions": {
            "singpencil": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }


def _report_timing(command: str, started: float) -> None:
    print(f"singpencil {command}: {time.perf_counter() - started:.3f}s", file=sys.stderr)


def _write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)


def _write_csv(path, manifest: dict, headers: list[str], rows) -> None:
    lines = ["#" + json.dumps(manifest, sort_keys=True)]
    lines.append(",".join(headers))
    for row in rows:
        lines.append(",".join("" if v is None else format(v, ".12g") if isinstance(v, float) else str(v) for v in row))
    text = "\r\n".join(lines) + "\r\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)


def _parse_scalar(text: str) -> complex:
    s = text.strip().replace("i", "j").replace(" ", "")
    if "/" in s and "j" not in s:
        return complex(Fraction(s))
    return complex(s)


def _load_pencil(args) -> Pencil:
    if getattr(args, "paper", None):
        return paper_pencil(args.paper)[0]
    if not (args.matrix_a and args.matrix_b):
        raise UsageError("provide either --paper or both -A and -B")
    a = read_matrix(args.matrix_a)
    b = read_matrix(args.matrix_b)
    return Pencil(a, b)


def _resolve_k(args, p: Pencil) -> int:
    if args.k is not None:
        if args.k < 1 or args.k >= p.n:
            raise UsageError(f"--k must satisfy 1 <= k < n (got {args.k}, n={p.n})")
        return args.k
    info = normal_rank(p, rng=RngState(args.seed, 999))
    if info.k < 1:
        raise UsageError(f"estimated normal rank {info.nrank} means the pencil is regular")
    return info.k


def _fmt_value(z: complex, is_finite: bool) -> str:
    if not is_finite:
        return "inf"
    if abs(z.imag) <= 1e-10 * (1.0 + abs(z.real)):
        return format(z.real, ".12g")
    return f"{z.real:.12g}{z.imag:+.12g}i"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(args) -> int:
    started = time.perf_counter()
    p = _load_pencil(args)
    k = _resolve_k(args, p)
    cfg = MethodConfig(
        method=args.method,
        field=FieldKind.parse(args.field),
        tau=args.tau,
        delta1=args.delta1,
        delta2=args.delta2,
        seed=args.seed,
    )
    report = solve(p, k, cfg)
    payload = report.to_json_dict()
    payload["manifest"] = _manifest("solve", args)
    _write_json(args.out, payload)
    _report_timing("solve", started)

    print(f"method={args.method} field={cfg.field.value} n={report.n} k={k}")
    print("finite eigenvalues:")
    for z in report.finite_eigenvalues:
        print(f"  {_fmt_value(z, True)}")
    print(f"{'group':14s} {'lambda':>24s} {'gamma':>12s} {'sigma':>10s} {'tau':>10s}")
    for rec in report.records:
        print(
            f"{rec.group:14s} {_fmt_value(rec.value, rec.is_finite):>24s} "
            f"{rec.gamma:12.4e} {rec.sigma:10.2e} {rec.tau:10.2e}"
        )
    return EXIT_OK


def _cmd_gen(args) -> int:
    started = time.perf_counter()
    if (args.paper is None) == (args.spec is None):
        raise UsageError("provide exactly one of --paper or --spec")
    if args.paper:
        p, gt = paper_pencil(args.paper)
    else:
        p, gt = assemble(parse_kcf_string(args.spec))
    if args.disguise != "none":
        kind = "uniform_entries" if args.disguise == "uniform" else args.disguise
        p, gt = disguise(p, gt, kind, RngState(args.seed))
    manifest = _manifest("gen", args)
    comment = json.dumps(manifest, sort_keys=True)
    write_matrix(f"{args.out_dir}/A.mtx", p.a, fmt=args.format, comments=[comment])
    write_matrix(f"{args.out_dir}/B.mtx", p.b, fmt=args.format, comments=[comment])
    truth = gt.to_json_dict()
    truth["manifest"] = manifest
    _write_json(f"{args.out_dir}/truth.json", truth)
    print(f"wrote {args.out_dir}/A.mtx, B.mtx, truth.json (n={gt.n}, nrank={gt.nrank}, k={gt.k})")
    _report_timing("gen", started)
    return EXIT_OK


def _cmd_mc(args) -> int:
    started = time.perf_counter()
    if args.paper is None:
        raise UsageError("mc requires --paper (ground truth is needed)")
    p, gt = paper_pencil(args.paper)
    lam = _parse_scalar(args.lam)
    report = mc_ratio(
        p, gt, lam, args.method, FieldKind.parse(args.field), args.trials, RngState(args.seed)
    )
    manifest = _manifest("mc", args)
    payload = report.to_json_dict()
    payload["manifest"] = manifest
    if args.csv:
        _write_csv(
            args.csv,
            manifest,
            ["bin_lo", "bin_hi", "count", "model_pdf_midpoint"],
            report.histogram_rows(),
        )
    _write_json(args.out, payload)
    crit = ks_critical(args.trials)
    print(
        f"trials={args.trials} mean={report.empirical_mean:.5f} "
        f"model_mean={report.model.mean():.5f} ks={report.ks_stat:.5f} (1% critical {crit:.5f})"
    )
    _report_timing("mc", started)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    started = time.perf_counter()
    t_grid = [float(t) for t in args.t_grid.split(",")]
    table = bounds_figure(args.k, FieldKind.parse(args.field), t_grid, args.trials, RngState(args.seed))
    manifest = _manifest("bounds", args)
    rows = [
        (r.t, r.empirical, r.std_err, r.simple_upper, r.refined_upper, r.lower)
        for r in table.rows
    ]
    _write_csv(args.csv or args.out, manifest, ["t", "empirical", "std_err", "simple_upper", "refined_upper", "lower"], rows)
    _report_timing("bounds", started)
    return EXIT_OK


def _cmd_sensitivity(args) -> int:
    started = time.perf_counter()
    if args.paper is None:
        raise UsageError("sensitivity requires --paper (ground truth is needed)")
    p, gt = paper_pencil(args.paper)
    lam = _parse_scalar(args.lam)
    if args.delta == "auto":
        delta = gt.k / (4.0 * gt.n**2)
    else:
        delta = float(args.delta)
    est = weak_cond_estimate(gt, lam, delta, args.trials, RngState(args.seed))
    payload = {
        "schema": "singpencil/1",
        "lambda": [lam.real, lam.imag],
        "delta": delta,
        "trials": args.trials,
        "quantile": est.quantile_value,
        "quantile_lo": est.quantile_lo,
        "quantile_hi": est.quantile_hi,
        "lower_bound": est.lower_bound,
        "upper_bound": est.upper_bound,
        "degenerate_trials": est.degenerate_trials,
        "manifest": _manifest("sensitivity", args),
    }
    _write_json(args.out, payload)
    print(
        f"delta={delta:.3e} quantile={est.quantile_value:.6g} "
        f"bracket=[{est.lower_bound:.6g}, {est.upper_bound:.6g}]"
    )
    _report_timing("sensitivity", started)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="singpencil", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="JSON output path ('-' for stdout)")

    sp = sub.add_parser("solve", help="compute finite eigenvalues of a singular pencil")
    sp.add_argument("-A", dest="matrix_a", help="Matrix Market file for A")
    sp.add_argument("-B", dest="matrix_b", help="Matrix Market file for B")
    sp.add_argument("--paper", choices=PAPER_PENCILS)
    sp.add_argument("--method", choices=("modify", "project", "augment"), default="modify")
    sp.add_argument("--field", choices=("real", "complex"), default="complex")
    sp.add_argument("--k", type=int, default=None, help="n - normal rank (estimated when absent)")
    sp.add_argument("--tau", type=float, default=1e-2)
    sp.add_argument("--delta1", type=float, default=float(np.sqrt(np.finfo(float).eps)))
    sp.add_argument("--delta2", type=float, default=100.0 * float(np.finfo(float).eps))
    add_common(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("gen", help="generate a structured singular pencil")
    sp.add_argument("--spec", help="block list, e.g. 'J1(0.5),J1(1/3),N1,L0,L1,LT0,LT2'")
    sp.add_argument("--paper", choices=PAPER_PENCILS)
    sp.add_argument("--disguise", choices=("none", "orthogonal", "uniform"), default="none")
    sp.add_argument("--format", choices=("array", "coordinate"), default="array")
    sp.add_argument("--out-dir", default=".")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_gen)

    sp = sub.add_parser("mc", help="Monte Carlo ratio experiment")
    sp.add_argument("--paper", choices=PAPER_PENCILS, required=True)
    sp.add_argument("--lambda", dest="lam", required=True, help="target eigenvalue, e.g. 1/3 or 1+1i")
    sp.add_argument("--method", choices=("modify", "project", "augment"), default="modify")
    sp.add_argument("--field", choices=("real", "complex"), default="complex")
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--csv", default=None, help="histogram CSV path")
    add_common(sp)
    sp.set_defaults(func=_cmd_mc)

    sp = sub.add_parser("bounds", help="left-tail bound table")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--field", choices=("real", "complex"), default="complex")
    sp.add_argument("--t-grid", default="1e-5,1e-4,1e-3,1e-2")
    sp.add_argument("--trials", type=int, default=100000)
    sp.add_argument("--csv", default=None)
    add_common(sp)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("sensitivity", help="delta-weak condition number estimate")
    sp.add_argument("--paper", choices=PAPER_PENCILS, required=True)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--delta", default="auto", help="probability level or 'auto' (= k/(4 n^2))")
    sp.add_argument("--trials", type=int, default=200000)
    add_common(sp)
    sp.set_defaults(func=_cmd_sensitivity)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"singpencil: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KcfParseError as exc:
        print(f"singpencil: spec error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenericityFailure as exc:
        print(f"singpencil: {exc}", file=sys.stderr)
        return EXIT_GENERICITY
    except (MatrixMarketError, OSError) as exc:
        print(f"singpencil: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
