"""Matrix generators, metrics and the seeded experiment sweep.

Per-run randomness comes from ``numpy.random.SeedSequence([seed, n, run])`` so
any single run can be reproduced (or farmed out to a worker) on its own.
"""

from __future__ import annotations

import csv
import io
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .ils import babai_point, sphere_decode
from .linalg import as_matrix
from .reduction import ReducedSystem, ReductionError, ReductionParams, reduce

MATRIX_TYPES = ("type1", "type2", "pathological")
SYMBOLS = (-7, 8)  # inclusive range of transmitted integers
CSV_HEADER = ("algo", "n", "runs", "mean_flops", "mean_backward_error", "mean_ber", "failures")


def run_rng(seed: int, n: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, n, run]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gen_type1(n: int, seed=None) -> np.ndarray:
    """i.i.d. standard normal entries."""
    return _rng(seed).standard_normal((n, n))


def gen_type2(n: int, seed=None, diag: Optional[Sequence[float]] = None) -> np.ndarray:
    """``U @ diag(d) @ V.T`` with Haar-like orthogonal U, V.

    The first ceil(n/2) entries of d are uniform on [10, 100], the rest on
    [0.1, 1], so the condition number never exceeds 1000.
    """
    rng = _rng(seed)
    U = np.linalg.qr(rng.standard_normal((n, n)))[0]
    V = np.linalg.qr(rng.standard_normal((n, n)))[0]
    if diag is None:
        big = (n + 1) // 2
        d = np.concatenate([rng.uniform(10.0, 100.0, big), rng.uniform(0.1, 1.0, n - big)])
    else:
        d = np.asarray(diag, dtype=np.float64)
        if d.shape != (n,):
            raise ValueError(f"diag must have length {n}")
    return (U * d) @ V.T


def gen_pathological(n: int) -> np.ndarray:
    """Unit upper triangular matrix on which ELLL grows entries like 2^(n-1).

    Superdiagonal entries are 2; the second superdiagonal alternates 4, 0, 4, ...
    starting from the first row.
    """
    H = np.eye(n)
    i = np.arange(n - 1)
    H[i, i + 1] = 2.0
    i = np.arange(0, n - 2, 2)
    H[i, i + 2] = 4.0
    return H


GENERATORS = {"type1": gen_type1, "type2": gen_type2}


def unimodular_inverse(Z: np.ndarray, drift_tol: float = 1e-6) -> np.ndarray:
    """Solve ``Z W = I`` and snap W to integers when it is integral to ``drift_tol``."""
    n = Z.shape[0]
    W = np.linalg.solve(np.asarray(Z, dtype=np.float64), np.eye(n))
    if np.all(np.isfinite(W)) and np.max(np.abs(W - np.round(W))) <= drift_tol:
        W = np.round(W)
    return W


def backward_error(H, system: ReducedSystem) -> float:
    """``||H - Q R Z^{-1}||_2 / ||H||_2`` for a computed QRZ factorization."""
    H = as_matrix(H)
    with np.errstate(all="ignore"):
        W = unimodular_inverse(system.Z)
        E = H - system.Q @ system.R @ W
    if not np.all(np.isfinite(E)):
        return math.inf
    return float(np.linalg.norm(E, 2) / np.linalg.norm(H, 2))


@dataclass
class LinearModel:
    H: np.ndarray
    x_true: np.ndarray
    sigma: float
    y: np.ndarray


def gen_linear_model(H, sigma: float, seed=None, symbols=SYMBOLS) -> LinearModel:
    """``y = H x + v`` with x uniform on the integer range ``symbols`` and v ~ N(0, sigma^2 I)."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = _rng(seed)
    H = as_matrix(H)
    n = H.shape[0]
    x = rng.integers(symbols[0], symbols[1] + 1, size=n)
    y = H @ x + sigma * rng.standard_normal(n)
    return LinearModel(H=H, x_true=x, sigma=sigma, y=y)


def symbol_error_rate(xhat, x_true) -> float:
    """Fraction of wrongly decoded components."""
    xhat = np.asarray(xhat)
    x_true = np.asarray(x_true)
    return float(np.mean(xhat != x_true))


@dataclass(frozen=True)
class ExperimentConfig:
    matrix_type: str = "type1"
    n_list: tuple = (5, 10, 15, 20, 25, 30, 35, 40)
    runs: int = 50
    delta: float = 0.75
    sigma: Optional[float] = 0.2
    seed: int = 0
    algorithms: tuple = ("lll", "elll", "plll")
    # run the full sphere decoder as well as the Babai point
    search: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.matrix_type not in MATRIX_TYPES:
            raise ValueError(f"unknown matrix type {self.matrix_type!r}")
        if self.runs < 1:
            raise ValueError("runs must be positive")
        if any(int(n) < 1 for n in self.n_list):
            raise ValueError("dimensions must be positive")
        for a in self.algorithms:
            ReductionParams(delta=self.delta, algorithm=a)


@dataclass
class RunRecord:
    algorithm: str
    n: int
    run: int
    flops: Optional[int] = None
    backward_error: Optional[float] = None
    # failed runs carry ber = 1.0: no estimate means every component is lost
    ber: Optional[float] = None
    nodes_total: Optional[int] = None
    wall_time: float = 0.0
    failed: bool = False
    reason: str = ""


def _one_run(config: ExperimentConfig, n: int, run: int) -> list:
    rng = run_rng(config.seed, n, run)
    if config.matrix_type == "pathological":
        H = gen_pathological(n)
    else:
        H = GENERATORS[config.matrix_type](n, rng)
    model = gen_linear_model(H, config.sigma, rng) if config.sigma is not None else None
    out = []
    for algo in config.algorithms:
        rec = RunRecord(algorithm=algo, n=n, run=run)
        t0 = time.perf_counter()
        try:
            system = reduce(H, ReductionParams(delta=config.delta, algorithm=algo))
            rec.flops = system.flops
            rec.backward_error = backward_error(H, system)
            if model is not None:
                ybar = system.transform(model.y)
                rec.ber = symbol_error_rate(system.Z @ babai_point(system.R, ybar), model.x_true)
                if config.search:
                    rec.nodes_total = sphere_decode(system.R, ybar).nodes_total
        except (ReductionError, OverflowError, FloatingPointError) as exc:
            rec.failed = True
            rec.reason = f"{type(exc).__name__}: {exc}"
            rec.flops = None
            rec.backward_error = None
            rec.ber = 1.0 if model is not None else None
        rec.wall_time = time.perf_counter() - t0
        out.append(rec)
    return out


def run_experiment(config: ExperimentConfig) -> list:
    """All (n, run, algorithm) records of a sweep, in deterministic order."""
    jobs = [(int(n), run) for n in config.n_list for run in range(config.runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = pool.map(_one_run, [config] * len(jobs), *zip(*jobs))
            chunks = list(chunks)
    else:
        chunks = [_one_run(config, n, run) for n, run in jobs]
    return [rec for chunk in chunks for rec in chunk]


def _mean(values) -> float:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else math.nan


@dataclass
class Summary:
    algorithm: str
    n: int
    runs: int
    mean_flops: float
    mean_backward_error: float
    mean_ber: float
    failures: int
    extra: dict = field(default_factory=dict)


def aggregate(records: Iterable[RunRecord]) -> list:
    """Per (algorithm, n) means; failed runs only count towards BER and failures."""
    groups = defaultdict(list)
    for r in records:
        groups[(r.algorithm, r.n)].append(r)
    rows = []
    for (algo, n) in sorted(groups):
        rs = groups[(algo, n)]
        ok = [r for r in rs if not r.failed]
        rows.append(Summary(
            algorithm=algo, n=n, runs=len(rs),
            mean_flops=_mean(r.flops for r in ok),
            mean_backward_error=_mean(r.backward_error for r in ok),
            mean_ber=_mean(r.ber for r in rs),
            failures=len(rs) - len(ok),
        ))
    return rows


def _fmt(v: float) -> str:
    return "nan" if v is None or math.isnan(v) else repr(float(v))


def emit_csv(records: Iterable[RunRecord], out=None) -> str:
    """Write the aggregate table as CSV to ``out`` (path or text stream); return the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in aggregate(records):
        w.writerow([s.algorithm, s.n, s.runs, _fmt(s.mean_flops), _fmt(s.mean_backward_error),
                    _fmt(s.mean_ber), s.failures])
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text
