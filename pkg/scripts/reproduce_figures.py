"""Run the four comparison sweeps and write one CSV per figure.

    python scripts/reproduce_figures.py --runs 50 --out-dir results
"""

import argparse
import sys
import time
from pathlib import Path

from plll.experiments import ExperimentConfig, emit_csv, run_experiment

SWEEPS = {
    # flops and backward error on Gaussian matrices
    "type1": dict(matrix_type="type1", n_list=(5, 10, 15, 20, 25, 30, 35, 40)),
    # flops and Babai BER on conditioned U D V^T matrices
    "type2": dict(matrix_type="type2", n_list=(5, 10, 15, 20, 25, 30, 35, 40)),
    "pathological": dict(matrix_type="pathological", n_list=(10, 20, 30, 40, 50, 60)),
}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--only", choices=sorted(SWEEPS), action="append")
    args = p.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.only or SWEEPS:
        runs = 1 if name == "pathological" else args.runs
        cfg = ExperimentConfig(runs=runs, seed=args.seed, sigma=args.sigma, workers=args.workers,
                               **SWEEPS[name])
        t0 = time.perf_counter()
        text = emit_csv(run_experiment(cfg), args.out_dir / f"{name}.csv")
        print(f"== {name} ({time.perf_counter() - t0:.1f}s)")
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
