"""Command line front end: generate instances, run solvers, batch benchmarks.

Exit codes: 0 success, 1 benchmark cells failed, 2 usage error, 3 I/O or
malformed instance, 4 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SOLVER = 4

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

# (m, n) cells of the three published benchmark suites.
SUITES = {
    "table1": [(m, n) for n in (1000, 2000) for m in (10000, 20000, 30000, 40000, 50000, 100000)],
    "table2": [(m, 100) for m in (16000, 32000, 64000, 128000, 256000, 512000, 1024000, 2048000)],
    "table3": [
        (2000, 5000),
        (2000, 10000),
        (5000, 5000),
        (5000, 10000),
        (8000, 7000),
        (100000, 8000),
        (100000, 10000),
        (200000, 10000),
    ],
}

ALGORITHM_NAMES = ("inewton", "newton", "lbfgs")


def _configure_threads(argv: list[str]) -> None:
    """Pin the BLAS reduction width before numpy initializes.

    --threads wins over SEB_THREADS; the default of 1 keeps every reduction
    single-threaded and therefore byte-deterministic.
    """
    threads = os.environ.get("SEB_THREADS", "1")
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif arg.startswith("--threads="):
            threads = arg.split("=", 1)[1]
    if not threads.isdigit() or int(threads) < 1:
        threads = "1"
    for var in _THREAD_VARS:
        os.environ[var] = threads


def _positive_int(name: str):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if value < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return value

    return parse


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sebsolve",
        description="Smallest enclosing ball of balls: solvers and benchmarks.",
    )
    parser.add_argument(
        "--threads",
        type=_positive_int("threads"),
        default=None,
        help="parallel reduction width (default 1; SEB_THREADS as fallback)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a deterministic benchmark instance")
    gen.add_argument("--m", type=_positive_int("m"), required=True, help="number of balls")
    gen.add_argument("--n", type=_positive_int("n"), required=True, help="dimension")
    gen.add_argument("--out", required=True, help="output path")
    gen.add_argument("--format", choices=("text", "binary"), default="text")
    gen.set_defaults(func=cmd_generate)

    sol = sub.add_parser("solve", help="solve one instance and report JSON")
    sol.add_argument("--input", required=True, help="instance file (text or binary)")
    sol.add_argument("--algorithm", choices=ALGORITHM_NAMES, default="inewton")
    sol.add_argument("--eps1", type=float, default=None, help="outer continuation stop")
    sol.add_argument("--c1", type=float, default=None, help="sufficient-decrease constant")
    sol.add_argument("--beta", type=float, default=None, help="backtracking factor")
    sol.add_argument("--eps2", type=float, default=None, help="constant stage gradient tolerance")
    sol.add_argument("--eps3", type=float, default=None, help="constant truncation tolerance")
    sol.add_argument("--mu0", type=float, default=None, help="initial smoothing parameter")
    sol.add_argument("--sigma", type=float, default=None, help="smoothing decay per stage")
    sol.add_argument("--include-final-mu-stage", action="store_true")
    sol.add_argument("--max-backtracks", type=_positive_int("max-backtracks"), default=None)
    sol.add_argument("--cg-max-iters", type=_positive_int("cg-max-iters"), default=None)
    sol.add_argument("--lbfgs-memory", type=_positive_int("lbfgs-memory"), default=None)
    sol.add_argument("--emit-x", action="store_true", help="include the center in the JSON")
    sol.add_argument("--no-timing", action="store_true", help="omit timing fields")
    sol.add_argument("--out", default=None, help="write JSON here instead of stdout")
    sol.set_defaults(func=cmd_solve)

    ben = sub.add_parser("bench", help="run a benchmark suite and emit CSV")
    ben.add_argument("--suite", choices=("table1", "table2", "table3", "custom"), required=True)
    ben.add_argument("--scale", type=float, default=1.0, help="shrink factor applied to m")
    ben.add_argument("--algorithms", required=True, help="comma-separated algorithm list")
    ben.add_argument("--m", type=_positive_int("m"), default=None, help="custom suite: balls")
    ben.add_argument("--n", type=_positive_int("n"), default=None, help="custom suite: dimension")
    ben.add_argument("--no-timing", action="store_true", help="leave the time column empty")
    ben.add_argument("--out", default=None, help="write CSV here instead of stdout")
    ben.set_defaults(func=cmd_bench)

    return parser


def _solver_table():
    from . import baselines, newton

    return {
        "inewton": newton.solve,
        "newton": baselines.solve_classical_newton_cg,
        "lbfgs": baselines.solve_smoothing_lbfgs,
    }


def _config_from_args(args) -> "SolverConfig":
    from .newton import SolverConfig

    kwargs = {}
    if args.eps1 is not None:
        kwargs["eps1"] = args.eps1
    if args.c1 is not None:
        kwargs["c1"] = args.c1
    if args.beta is not None:
        kwargs["beta"] = args.beta
    if args.eps2 is not None:
        tol = args.eps2
        kwargs["eps2_schedule"] = lambda mu: tol
    if args.eps3 is not None:
        tol3 = args.eps3
        kwargs["eps3_schedule"] = lambda mu: tol3
    if args.mu0 is not None or args.sigma is not None:
        mu0 = args.mu0 if args.mu0 is not None else 1.0
        sigma = args.sigma if args.sigma is not None else 0.1
        if mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if not 0.0 < sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        kwargs["mu_schedule"] = lambda k: mu0 * sigma**k
    if args.include_final_mu_stage:
        kwargs["include_final_mu_stage"] = True
    if args.max_backtracks is not None:
        kwargs["max_backtracks"] = args.max_backtracks
    if args.cg_max_iters is not None:
        kwargs["cg_max_iters"] = args.cg_max_iters
    if args.lbfgs_memory is not None:
        kwargs["lbfgs_memory"] = args.lbfgs_memory
    return SolverConfig(**kwargs)


def report_document(report, emit_x: bool, include_timing: bool) -> dict:
    """JSON-ready view of a solve report (numbers stay shortest round-trip)."""
    doc = {}
    if emit_x:
        doc["x"] = [float(v) for v in report.x_final]
    doc["objective"] = float(report.objective_nonsmooth)
    doc["smoothed_objective"] = float(report.objective_smoothed_final)
    doc["algorithm"] = report.algorithm
    if include_timing:
        doc["wall_time_seconds"] = float(report.wall_time)
    doc["stages"] = [
        {
            "mu": float(st.mu),
            "inner_iters": int(st.inner_iterations),
            "cg_iters": int(st.cg_iterations_total),
            "mean_active_set": float(st.mean_active_set),
            "grad_norm": float(st.final_truncated_gradient_norm),
        }
        for st in report.per_mu_stats
    ]
    return doc


def cmd_generate(args) -> int:
    from .problem import generate_instance, save_instance

    try:
        instance = generate_instance(args.m, args.n)
    except MemoryError:
        _error(f"instance of {args.m} x {args.n} does not fit in memory")
        return EXIT_FAILURE
    try:
        save_instance(instance, args.out, args.format)
        with open(args.out, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        _error(f"cannot write {args.out}: {exc}")
        return EXIT_IO
    print(f"m={instance.m} n={instance.n} sha256={digest}")
    return EXIT_OK


def cmd_solve(args) -> int:
    from .newton import ConvergenceError, LineSearchError
    from .problem import InstanceFormatError, load_instance

    try:
        instance = load_instance(args.input)
    except OSError as exc:
        _error(f"cannot read {args.input}: {exc}")
        return EXIT_IO
    except InstanceFormatError as exc:
        _error(f"corrupt instance {args.input}: {exc}")
        return EXIT_IO

    try:
        config = _config_from_args(args)
    except ValueError as exc:
        _error(str(exc))
        return EXIT_USAGE

    solver = _solver_table()[args.algorithm]
    try:
        report = solver(instance, config)
    except (LineSearchError, ConvergenceError) as exc:
        _error(f"solver failed: {exc}")
        return EXIT_SOLVER

    doc = report_document(report, emit_x=args.emit_x, include_timing=not args.no_timing)
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="ascii") as fh:
                fh.write(text)
        except OSError as exc:
            _error(f"cannot write {args.out}: {exc}")
            return EXIT_IO
    else:
        sys.stdout.write(text)
    print(
        f"objective = {report.objective_nonsmooth:.17g} ({report.algorithm})",
        file=sys.stderr,
    )
    return EXIT_OK


def _bench_cells(args, parser_error) -> list[tuple[int, int]]:
    if args.suite == "custom":
        if args.m is None or args.n is None:
            parser_error("custom suite requires --m and --n")
        return [(args.m, args.n)]
    if args.scale <= 0:
        parser_error("--scale must be positive")
    return [(max(1, round(m * args.scale)), n) for m, n in SUITES[args.suite]]


def cmd_bench(args) -> int:
    from .problem import generate_instance

    algorithms = [name for name in args.algorithms.split(",") if name]
    if not algorithms:
        _error("at least one algorithm is required")
        return EXIT_USAGE
    for name in algorithms:
        if name not in ALGORITHM_NAMES:
            _error(f"unknown algorithm {name!r} (choose from {', '.join(ALGORITHM_NAMES)})")
            return EXIT_USAGE

    def parser_error(message):
        _error(message)
        raise SystemExit(EXIT_USAGE)

    cells = _bench_cells(args, parser_error)
    solvers = _solver_table()

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["m", "n", "algorithm", "time_seconds", "objective", "status"])
    any_failed = False
    for m, n in cells:
        try:
            instance = generate_instance(m, n)
        except MemoryError:
            for name in algorithms:
                writer.writerow([m, n, name, "", "", "error: out of memory"])
            any_failed = True
            continue
        for name in algorithms:
            try:
                report = solvers[name](instance, None)
            except Exception as exc:  # per-cell failures must not kill the run
                writer.writerow([m, n, name, "", "", f"error: {exc}"])
                any_failed = True
                continue
            time_field = "" if args.no_timing else f"{report.wall_time:.6e}"
            writer.writerow(
                [m, n, name, time_field, f"{report.objective_nonsmooth:.17g}", "ok"]
            )

    text = buffer.getvalue()
    if args.out:
        try:
            with open(args.out, "w", encoding="ascii", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            _error(f"cannot write {args.out}: {exc}")
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_FAILURE if any_failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_threads(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
