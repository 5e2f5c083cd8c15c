"""LLL, effective LLL and partial LLL reductions as QRZ factorizations.

Each reduction returns ``Q, R, Z`` with ``Q.T @ H @ Z == R`` where Q is
orthogonal, R upper triangular and Z unimodular. The three algorithms share
two primitives: an integer Gauss transformation (``apply_igt``) that
subtracts an integer multiple of one column of R from a later one, and a
column swap followed by a Givens retriangularization (``swap_step``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import (
    FlopCounter,
    as_matrix,
    givens_retriangularize,
    nearest_int,
    qr_gso,
    qr_householder,
    qr_min_pivot,
)

ALGORITHMS = ("lll", "elll", "plll", "none")

# beyond 2^53 Z no longer converts exactly to float64
Z_LIMIT = 2**53


class ReductionError(ArithmeticError):
    pass


class SingularBasisError(ReductionError):
    """A zero diagonal entry of R was used as a pivot."""


class GrowthOverflowError(ReductionError):
    """An entry of R or Z grew past the representable or configured bound."""

    def __init__(self, msg: str, entry=None, value=None):
        super().__init__(msg)
        self.entry = entry
        self.value = value


class IterationLimitError(ReductionError):
    pass


@dataclass(frozen=True)
class ReductionParams:
    delta: float = 0.75
    algorithm: str = "plll"
    # "gso" / "householder" / "min_pivot"; None picks the algorithm's own choice
    qr: Optional[str] = None
    overflow_guard: float = 1e300
    max_iter: int = 10**6

    def __post_init__(self):
        if not (0.25 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.qr not in (None, "gso", "householder", "min_pivot"):
            raise ValueError(f"unknown initial factorization {self.qr!r}")


@dataclass
class ReducedSystem:
    """Outcome of a reduction: ``Q.T @ H @ Z == R``."""

    Q: np.ndarray
    R: np.ndarray
    Z: np.ndarray
    algorithm: str
    delta: float
    flops: int = 0
    swaps: int = 0
    igts: int = 0
    # nonzero IGTs whose column step ended without a swap
    idle_igts: int = 0
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    def transform(self, y) -> np.ndarray:
        """Map an observation into reduced coordinates, ``Q.T @ y``."""
        return self.Q.T @ np.asarray(y, dtype=np.float64)


def apply_igt(R: np.ndarray, Z: np.ndarray, i: int, j: int,
              fc: Optional[FlopCounter] = None, zeta: Optional[int] = None,
              guard: float = math.inf) -> int:
    """Reduce ``R[i, j]`` against ``R[i, i]`` with an integer Gauss transformation.

    Column j of R and Z loses ``zeta`` times column i, where
    ``zeta = round(R[i, j] / R[i, i])`` (ties away from zero) unless given.
    Only rows ``0..i`` of R change. Returns zeta.
    """
    if not i < j:
        raise ValueError(f"IGT needs i < j, got ({i}, {j})")
    rii = R[i, i]
    if rii == 0.0:
        raise SingularBasisError(f"zero diagonal entry R[{i},{i}]")
    if zeta is None:
        zeta = nearest_int(R[i, j] / rii)
        if fc is not None:
            fc.add(1)
    if zeta == 0:
        return 0
    R[: i + 1, j] -= zeta * R[: i + 1, i]
    if fc is not None:
        fc.add(2 * (i + 1))
    zmax = abs(zeta) * int(np.max(np.abs(Z[:, i]))) + int(np.max(np.abs(Z[:, j])))
    if zmax > Z_LIMIT:
        raise GrowthOverflowError(f"unimodular factor entry in column {j} exceeds 2^53",
                                  entry=("Z", j), value=zmax)
    Z[:, j] -= zeta * Z[:, i]
    if guard < math.inf:
        col = np.abs(R[: i + 1, j])
        big = int(np.argmax(col))
        if col[big] > guard:
            raise GrowthOverflowError(f"|R[{big},{j}]| = {col[big]:.3g} exceeds guard {guard:.3g}",
                                      entry=("R", big, j), value=float(col[big]))
    return zeta


def swap_step(R: np.ndarray, Z: np.ndarray, Q: Optional[np.ndarray], k: int,
              fc: Optional[FlopCounter] = None) -> None:
    """Swap columns k-1, k of R and Z, then restore R to triangular form.

    Afterwards ``R[k-1, k-1]**2`` equals the old ``R[k-1, k]**2 + R[k, k]**2``.
    """
    if not 1 <= k < R.shape[0]:
        raise IndexError(f"swap index {k} out of range for n={R.shape[0]}")
    R[:, [k - 1, k]] = R[:, [k, k - 1]]
    Z[:, [k - 1, k]] = Z[:, [k, k - 1]]
    givens_retriangularize(R, k, fc, Q)


def lovasz_holds(R: np.ndarray, delta: float) -> bool:
    """True when ``delta r_{i-1,i-1}^2 <= r_{i-1,i}^2 + r_{i,i}^2`` for every i."""
    d = np.diag(R)
    sup = np.diag(R, 1)
    return bool(np.all(delta * d[:-1] ** 2 <= sup**2 + d[1:] ** 2))


def size_reduced(R: np.ndarray, tol: float = 0.0, superdiagonal_only: bool = False) -> bool:
    """True when ``|r_{ij}| <= |r_{ii}|/2 (1 + tol)`` for i < j."""
    d = np.abs(np.diag(R))
    if superdiagonal_only:
        return bool(np.all(np.abs(np.diag(R, 1)) <= d[:-1] / 2 * (1 + tol)))
    upper = np.abs(np.triu(R, 1))
    return bool(np.all(upper <= (d[:, None] / 2) * (1 + tol)))


def _initial_qr(H: np.ndarray, how: str, fc: FlopCounter):
    if how == "gso":
        Q, R = qr_gso(H, fc)
        return Q, R, np.eye(H.shape[0], dtype=np.int64)
    if how == "householder":
        Q, R = qr_householder(H, fc)
        return Q, R, np.eye(H.shape[0], dtype=np.int64)
    pqr = qr_min_pivot(H, fc)
    return pqr.Q, pqr.R, pqr.P.copy()


def _check_diag(R: np.ndarray) -> None:
    zero = np.nonzero(np.diag(R) == 0.0)[0]
    if zero.size:
        raise SingularBasisError(f"zero diagonal entry R[{zero[0]},{zero[0]}]; H is singular")


class _Loop:
    """Shared iteration state for the three reduction loops."""

    def __init__(self, H, params: ReductionParams, default_qr: str, fc: Optional[FlopCounter]):
        self.params = params
        self.fc = fc if fc is not None else FlopCounter()
        self.Q, self.R, self.Z = _initial_qr(as_matrix(H), params.qr or default_qr, self.fc)
        _check_diag(self.R)
        self.swaps = 0
        self.igts = 0
        self.idle = 0
        self.pending = 0
        self.iterations = 0

    def tick(self) -> None:
        self.iterations += 1
        if self.iterations > self.params.max_iter:
            raise IterationLimitError(
                f"{self.params.algorithm}: no convergence after {self.params.max_iter} passes")

    def igt(self, i: int, k: int, zeta: Optional[int] = None, guard: float = math.inf) -> int:
        z = apply_igt(self.R, self.Z, i, k, self.fc, zeta=zeta, guard=guard)
        if z != 0:
            self.igts += 1
            self.pending += 1
        return z

    def swap(self, k: int) -> None:
        swap_step(self.R, self.Z, self.Q, k, self.fc)
        self.swaps += 1
        self.pending = 0

    def advance(self) -> None:
        self.idle += self.pending
        self.pending = 0

    def lovasz_fails(self, k: int, sup: Optional[float] = None) -> bool:
        R = self.R
        if sup is None:
            sup = R[k - 1, k]
        self.fc.add(6)
        return self.params.delta * R[k - 1, k - 1] ** 2 > sup * sup + R[k, k] ** 2

    def result(self) -> ReducedSystem:
        return ReducedSystem(Q=self.Q, R=self.R, Z=self.Z, algorithm=self.params.algorithm,
                             delta=self.params.delta, flops=self.fc.count, swaps=self.swaps,
                             igts=self.igts, idle_igts=self.idle, iterations=self.iterations)


def _lll_loop(H, params: ReductionParams, fc, full_size_reduction: bool) -> ReducedSystem:
    st = _Loop(H, params, "gso", fc)
    guard = params.overflow_guard
    n = st.R.shape[0]
    k = 1
    while k < n:
        st.tick()
        st.igt(k - 1, k, guard=guard)
        if st.lovasz_fails(k):
            st.swap(k)
            if k > 1:
                k -= 1
        else:
            if full_size_reduction:
                for i in range(k - 2, -1, -1):
                    st.igt(i, k, guard=guard)
            st.advance()
            k += 1
    return st.result()


def reduce_lll(H, params: Optional[ReductionParams] = None,
               fc: Optional[FlopCounter] = None) -> ReducedSystem:
    """Classic LLL reduction: size-reduced and Lovasz-ordered R.

    The initial QR uses classical Gram-Schmidt unless ``params.qr`` says
    otherwise.
    """
    params = params or ReductionParams(algorithm="lll")
    if params.algorithm != "lll":
        params = ReductionParams(**{**params.__dict__, "algorithm": "lll"})
    return _lll_loop(H, params, fc, full_size_reduction=True)


def reduce_elll(H, params: Optional[ReductionParams] = None,
                fc: Optional[FlopCounter] = None) -> ReducedSystem:
    """Effective LLL: the LLL loop with only superdiagonal size reduction.

    Off-diagonal entries may grow geometrically; growth past
    ``params.overflow_guard`` raises ``GrowthOverflowError``.
    """
    params = params or ReductionParams(algorithm="elll")
    if params.algorithm != "elll":
        params = ReductionParams(**{**params.__dict__, "algorithm": "elll"})
    return _lll_loop(H, params, fc, full_size_reduction=False)


def reduce_plll(H, params: Optional[ReductionParams] = None,
                fc: Optional[FlopCounter] = None) -> ReducedSystem:
    """Partial LLL reduction.

    Starts from Householder QR with minimum column pivoting. At column k the
    superdiagonal IGT is only applied when a swap is going to follow; when
    ``|zeta| >= 2`` the rest of column k is size-reduced too, which keeps
    off-diagonal growth in check.
    """
    params = params or ReductionParams(algorithm="plll")
    if params.algorithm != "plll":
        params = ReductionParams(**{**params.__dict__, "algorithm": "plll"})
    st = _Loop(H, params, "min_pivot", fc)
    R = st.R
    n = R.shape[0]
    k = 1
    while k < n:
        st.tick()
        rkk1 = R[k - 1, k - 1]
        zeta = nearest_int(R[k - 1, k] / rkk1)
        alpha = R[k - 1, k] - zeta * rkk1
        st.fc.add(3)
        if st.lovasz_fails(k, sup=alpha):
            if zeta != 0:
                st.igt(k - 1, k, zeta=zeta)
                if abs(zeta) >= 2:
                    for i in range(k - 2, -1, -1):
                        st.igt(i, k)
            st.swap(k)
            if k > 1:
                k -= 1
        else:
            st.advance()
            k += 1
    return st.result()


def reduce_none(H, params: Optional[ReductionParams] = None,
                fc: Optional[FlopCounter] = None) -> ReducedSystem:
    """Plain Householder QR with ``Z = I`` (no lattice reduction)."""
    params = params or ReductionParams(algorithm="none")
    fc = fc if fc is not None else FlopCounter()
    Q, R, Z = _initial_qr(as_matrix(H), params.qr or "householder", fc)
    _check_diag(R)
    return ReducedSystem(Q=Q, R=R, Z=Z, algorithm="none", delta=params.delta, flops=fc.count)


_DISPATCH = {"lll": reduce_lll, "elll": reduce_elll, "plll": reduce_plll, "none": reduce_none}


def reduce(H, params: Optional[ReductionParams] = None,
           fc: Optional[FlopCounter] = None) -> ReducedSystem:
    """Run the reduction named by ``params.algorithm``."""
    params = params or ReductionParams()
    return _DISPATCH[params.algorithm](H, params, fc)
