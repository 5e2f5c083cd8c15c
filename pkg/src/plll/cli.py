"""Command line front end: ``reduce``, ``solve`` and ``experiment``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .experiments import MATRIX_TYPES, ExperimentConfig, emit_csv, run_experiment
from .ils import solve_ils
from .linalg import format_matrix, read_matrix
from .reduction import ReductionError, ReductionParams, reduce

REDUCERS = ("lll", "elll", "plll")


def _delta(text: str) -> float:
    try:
        d = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.25 < d <= 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (0.25, 1], got {d}")
    return d


def _int_list(text: str) -> tuple:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return vals


def _algo_list(text: str) -> tuple:
    vals = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [v for v in vals if v not in REDUCERS]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {REDUCERS}")
    return vals


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plll", description="LLL / ELLL / PLLL reduction and integer least squares")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="QRZ-reduce a square matrix")
    r.add_argument("--algo", choices=REDUCERS, default="plll")
    r.add_argument("--delta", type=_delta, default=0.75)
    r.add_argument("--input", type=_existing, required=True, help="matrix file (header 'n n' then rows)")
    r.add_argument("--out-prefix", default=None,
                   help="write <P>R.txt, <P>Z.txt, <P>Q.txt; print to stdout when omitted")

    s = sub.add_parser("solve", help="solve min ||y - Hx|| over integer x")
    s.add_argument("--algo", choices=REDUCERS + ("none",), default="plll")
    s.add_argument("--delta", type=_delta, default=0.75)
    s.add_argument("--input", type=_existing, required=True, help="matrix file for H")
    s.add_argument("--y", type=_existing, required=True, help="whitespace-separated observation vector")

    e = sub.add_parser("experiment", help="run a seeded sweep and write aggregate CSV")
    e.add_argument("--type", choices=MATRIX_TYPES, default="type1")
    e.add_argument("--n-list", type=_int_list, default=(5, 10, 15, 20, 25, 30, 35, 40))
    e.add_argument("--runs", type=int, default=50)
    e.add_argument("--delta", type=_delta, default=0.75)
    e.add_argument("--sigma", type=float, default=0.2)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--algos", type=_algo_list, default=REDUCERS)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    return p


def _read_vector(path: Path, n: int) -> np.ndarray:
    vals = [float(t) for t in path.read_text(encoding="utf-8").split()]
    if len(vals) == n + 2 and vals[:2] == [n, 1]:
        vals = vals[2:]
    if len(vals) != n:
        raise ValueError(f"{path}: expected {n} entries, found {len(vals)}")
    return np.array(vals)


def _cmd_reduce(args) -> int:
    H = read_matrix(args.input)
    system = reduce(H, ReductionParams(delta=args.delta, algorithm=args.algo))
    stats = f"flops={system.flops} swaps={system.swaps} igts={system.igts}"
    if args.out_prefix is None:
        for name, M in (("R", system.R), ("Z", system.Z), ("Q", system.Q)):
            print(f"# {name}")
            sys.stdout.write(format_matrix(M))
    else:
        for name, M in (("R", system.R), ("Z", system.Z), ("Q", system.Q)):
            Path(f"{args.out_prefix}{name}.txt").write_text(format_matrix(M), encoding="utf-8")
    print(stats)
    return 0


def _cmd_solve(args) -> int:
    H = read_matrix(args.input)
    y = _read_vector(args.y, H.shape[0])
    sol, system = solve_ils(H, y, ReductionParams(delta=args.delta, algorithm=args.algo))
    print("xhat=" + " ".join(str(int(v)) for v in sol.xhat))
    print(f"residual={sol.residual_sq!r}")
    print(f"nodes={sol.nodes_total}")
    return 0


def _cmd_experiment(args) -> int:
    if args.runs < 1:
        raise ValueError("--runs must be positive")
    config = ExperimentConfig(matrix_type=args.type, n_list=args.n_list, runs=args.runs,
                              delta=args.delta, sigma=args.sigma, seed=args.seed,
                              algorithms=args.algos, workers=args.workers)
    records = run_experiment(config)
    if args.out is None:
        emit_csv(records, sys.stdout)
    else:
        emit_csv(records, args.out)
    # flop means include the initial QR factorization
    print("# flops include the initial QR factorization; failed runs count as BER 1",
          file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"reduce": _cmd_reduce, "solve": _cmd_solve, "experiment": _cmd_experiment}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError, ReductionError) as exc:
        print(f"plll {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
