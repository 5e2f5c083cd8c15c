"""Integer least squares on a triangular system: Babai point and sphere decoding.

Both solvers work on the reduced problem ``min ||ybar - R z||^2`` over integer
vectors z, with R upper triangular. ``solve_ils`` wraps reduction, the change
of coordinates and the map back ``x = Z z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .linalg import as_matrix, nearest_int
from .reduction import ReducedSystem, ReductionParams, SingularBasisError, reduce


@dataclass
class IlsSolution:
    """Sphere decoding outcome. ``zhat`` is None when no point lies inside beta0."""

    zhat: Optional[np.ndarray]
    residual_sq: float
    babai: Optional[np.ndarray]
    babai_residual_sq: float
    nodes_per_level: np.ndarray
    xhat: Optional[np.ndarray] = None

    @property
    def found(self) -> bool:
        return self.zhat is not None

    @property
    def nodes_total(self) -> int:
        return int(self.nodes_per_level.sum())


def _check_triangular(R, ybar):
    R = np.asarray(R, dtype=np.float64)
    ybar = np.asarray(ybar, dtype=np.float64)
    n = R.shape[0]
    if R.shape != (n, n) or ybar.shape != (n,):
        raise ValueError(f"shape mismatch: R {R.shape}, ybar {ybar.shape}")
    if np.any(np.diag(R) == 0.0):
        raise SingularBasisError("R has a zero diagonal entry")
    return R, ybar


def zigzag(c: float) -> Iterator[int]:
    """Candidates for one level in Schnorr-Euchner order around center ``c``.

    Starts at round(c), then alternates sides, first stepping down when
    ``c <= round(c)`` and up otherwise.
    """
    z = nearest_int(c)
    d = -1 if c <= z else 1
    while True:
        yield z
        z += d
        d = -d - (1 if d > 0 else -1)


def babai_point(R, ybar) -> np.ndarray:
    """Nearest-plane point: round each center during back substitution."""
    R, ybar = _check_triangular(R, ybar)
    n = R.shape[0]
    z = np.zeros(n, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        c = (ybar[k] - R[k, k + 1:] @ z[k + 1:]) / R[k, k]
        z[k] = nearest_int(c)
    return z


def sphere_decode(R, ybar, beta0: float = math.inf, max_nodes: Optional[int] = None,
                  trace: Optional[Callable] = None) -> IlsSolution:
    """Depth-first Schnorr-Euchner search for ``argmin ||ybar - R z||^2``.

    The search keeps points with squared residual strictly below the current
    radius ``beta``; each leaf found shrinks ``beta`` to its residual. With
    ``beta0 = inf`` the first leaf is the Babai point. ``nodes_per_level[k]``
    counts every candidate value of ``z[k]`` tested against the radius.

    Centers are rounded with ties away from zero, which is not invariant under
    integer shifts: a center landing exactly on a half-integer can make the
    search on ``R`` and on a size-reduced ``R Z`` diverge.

    ``trace(k, z, accepted, beta)`` is called for every tested node with a
    copy of the current integer vector (entries below k are stale).
    """
    R, ybar = _check_triangular(R, ybar)
    n = R.shape[0]
    diag2 = np.diag(R) ** 2
    z = np.zeros(n, dtype=np.int64)
    c = np.zeros(n)
    step = np.zeros(n, dtype=np.int64)
    # above[k] = sum over levels j > k of diag2[j] (z[j] - c[j])^2
    above = np.zeros(n)
    nodes = np.zeros(n, dtype=np.int64)
    beta = float(beta0)
    best = None
    best_res = math.inf
    babai = None
    babai_res = math.inf
    visited = 0

    def enter(k):
        ck = (ybar[k] - R[k, k + 1:] @ z[k + 1:]) / R[k, k]
        c[k] = ck
        zk = nearest_int(ck)
        z[k] = zk
        step[k] = -1 if ck <= zk else 1

    def next_candidate(k):
        d = step[k]
        z[k] += d
        step[k] = -d - (1 if d > 0 else -1)

    k = n - 1
    enter(k)
    while True:
        t = diag2[k] * (z[k] - c[k]) ** 2
        nodes[k] += 1
        visited += 1
        if max_nodes is not None and visited > max_nodes:
            raise RuntimeError(f"sphere decoding exceeded {max_nodes} nodes")
        accepted = t < beta - above[k]
        if trace is not None:
            trace(k, z.copy(), accepted, beta)
        if accepted:
            if k > 0:
                above[k - 1] = above[k] + t
                k -= 1
                enter(k)
                continue
            best = z.copy()
            best_res = above[0] + t
            if babai is None:
                babai, babai_res = best.copy(), best_res
            beta = best_res
            # any other value at level 0 is farther from c[0]
            k += 1
        else:
            k += 1
        if k >= n:
            break
        next_candidate(k)

    if best is not None:
        best_res = float(np.sum((ybar - R @ best) ** 2))
        babai_res = float(np.sum((ybar - R @ babai) ** 2))
    return IlsSolution(zhat=best, residual_sq=best_res, babai=babai,
                       babai_residual_sq=babai_res, nodes_per_level=nodes)


def solve_ils(H, y, params: Optional[ReductionParams] = None,
              beta0: float = math.inf) -> tuple[IlsSolution, ReducedSystem]:
    """Reduce H, decode in reduced coordinates and map back with ``x = Z z``."""
    H = as_matrix(H)
    system = reduce(H, params)
    sol = sphere_decode(system.R, system.transform(y), beta0)
    if sol.found:
        sol.xhat = system.Z @ sol.zhat
    return sol, system


def babai_estimate(system: ReducedSystem, y) -> np.ndarray:
    """Babai point of a reduced system, in original coordinates."""
    return system.Z @ babai_point(system.R, system.transform(y))
