"""Dense orthogonal-factorization kernels with flop accounting.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Indices in the
code are 0-based; docstrings use the same convention.

Flop model: every scalar add, subtract, multiply, divide and square root costs
one flop. Comparisons, swaps, sign flips and integer arithmetic are free. Work
spent accumulating an explicit Q factor that the underlying algorithm would not
form on its own is not counted (see ``qr_householder``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np


class FlopCounter:
    """Running tally of scalar floating point operations."""

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = int(count)

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("flop increments must be nonnegative")
        self.count += int(k)

    def __int__(self) -> int:
        return self.count

    def __repr__(self) -> str:
        return f"FlopCounter({self.count})"


def _tally(fc: Optional[FlopCounter], k: int) -> None:
    if fc is not None:
        fc.add(k)


def as_matrix(H, square: bool = True) -> np.ndarray:
    """Validate ``H`` and return it as a fresh float64 2-D array."""
    A = np.array(H, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def nearest_int(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    if not math.isfinite(x):
        raise ValueError(f"cannot round non-finite value {x!r}")
    r = math.floor(abs(x) + 0.5)
    return int(r) if x >= 0 else -int(r)


@dataclass
class PivotedQR:
    """Result of ``qr_min_pivot``: ``Q.T @ H @ P == R``."""

    Q: np.ndarray
    R: np.ndarray
    P: np.ndarray
    perm: np.ndarray
    column_norms: np.ndarray


def _house(x: np.ndarray, fc: Optional[FlopCounter]):
    """Householder vector v, scalar beta with (I - beta v v^T) x = ||x|| e_0.

    Uses the cancellation-free choice of v[0] so the image has a nonnegative
    leading entry (Golub & Van Loan, Alg. 5.1.1).
    """
    m = x.shape[0]
    sigma = float(x[1:] @ x[1:])
    _tally(fc, 2 * (m - 1))
    v = x.copy()
    x0 = float(x[0])
    if sigma == 0.0:
        # already a multiple of e_0; reflect only to fix a negative sign
        if x0 >= 0.0:
            return None, 0.0, x0
        v[0] = 1.0
        v[1:] = 0.0
        return v, 2.0, -x0
    mu = math.sqrt(x0 * x0 + sigma)
    _tally(fc, 3)
    if x0 <= 0.0:
        v[0] = x0 - mu
        _tally(fc, 1)
    else:
        v[0] = -sigma / (x0 + mu)
        _tally(fc, 2)
    v0sq = v[0] * v[0]
    beta = 2.0 * v0sq / (sigma + v0sq)
    v /= v[0]
    _tally(fc, 4 + m)
    return v, beta, mu


def _apply_house(A: np.ndarray, v: np.ndarray, beta: float, fc: Optional[FlopCounter]) -> None:
    """A <- (I - beta v v^T) A, in place."""
    if A.shape[1] == 0:
        return
    w = v @ A
    A -= np.outer(beta * v, w)
    m, p = A.shape
    _tally(fc, 4 * m * p + m)


def _form_q(vs: list, n: int) -> np.ndarray:
    """Backward accumulation of Q = H_0 H_1 ... H_{n-1} (not counted)."""
    Q = np.eye(n)
    for k in range(len(vs) - 1, -1, -1):
        v, beta = vs[k]
        if v is None:
            continue
        _apply_house(Q[k:, k:], v, beta, None)
    return Q


def qr_householder(H, fc: Optional[FlopCounter] = None):
    """Householder QR, ``H = Q @ R`` with nonnegative diagonal in R.

    About 4n^3/3 flops are charged for computing R; Q is formed afterwards
    from the stored reflectors without charge.
    """
    R = as_matrix(H)
    n = R.shape[0]
    vs = []
    for k in range(n):
        v, beta, alpha = _house(R[k:, k], fc)
        vs.append((v, beta))
        if v is not None:
            _apply_house(R[k:, k + 1:], v, beta, fc)
        R[k, k] = alpha
        R[k + 1:, k] = 0.0
    return _form_q(vs, n), R


def qr_gso(H, fc: Optional[FlopCounter] = None):
    """QR by classical Gram-Schmidt (about 2n^3 flops).

    Orthogonality of Q degrades on nearly dependent columns. An exactly
    dependent column yields a zero diagonal entry and a zero column of Q.
    """
    A = as_matrix(H)
    n = A.shape[0]
    Q = np.zeros_like(A)
    R = np.zeros_like(A)
    for j in range(n):
        v = A[:, j].copy()
        if j > 0:
            R[:j, j] = Q[:, :j].T @ A[:, j]
            v -= Q[:, :j] @ R[:j, j]
            _tally(fc, 4 * n * j)
        nrm = math.sqrt(float(v @ v))
        _tally(fc, 2 * n)
        R[j, j] = nrm
        if nrm > 0.0:
            Q[:, j] = v / nrm
            _tally(fc, n)
    return Q, R


def qr_min_pivot(H, fc: Optional[FlopCounter] = None, recompute_tol: float = 1e-6) -> PivotedQR:
    """Householder QR with minimum column pivoting, ``Q.T @ H @ P == R``.

    At step k the column of ``R[k:, k:]`` with the smallest squared norm is
    moved to position k (ties go to the smallest index). Squared norms are
    downdated after each step and recomputed from the trailing entries when
    they drop below ``recompute_tol`` times their original value.
    """
    R = as_matrix(H)
    n = R.shape[0]
    perm = np.arange(n)
    l = np.einsum("ij,ij->j", R, R)
    _tally(fc, 2 * n * n)
    l0 = l.copy()
    vs = []
    for k in range(n):
        j = k + int(np.argmin(l[k:]))
        if j != k:
            R[:, [k, j]] = R[:, [j, k]]
            l[[k, j]] = l[[j, k]]
            l0[[k, j]] = l0[[j, k]]
            perm[[k, j]] = perm[[j, k]]
        v, beta, alpha = _house(R[k:, k], fc)
        vs.append((v, beta))
        if v is not None:
            _apply_house(R[k:, k + 1:], v, beta, fc)
        R[k, k] = alpha
        R[k + 1:, k] = 0.0
        if k + 1 < n:
            l[k + 1:] -= R[k, k + 1:] ** 2
            _tally(fc, 2 * (n - k - 1))
            for c in np.nonzero(l[k + 1:] < recompute_tol * l0[k + 1:])[0]:
                c += k + 1
                tail = R[k + 1:, c]
                l[c] = float(tail @ tail)
                l0[c] = l[c]
                _tally(fc, 2 * tail.shape[0])
    P = np.zeros((n, n), dtype=np.int64)
    P[perm, np.arange(n)] = 1
    return PivotedQR(Q=_form_q(vs, n), R=R, P=P, perm=perm, column_norms=l)


def givens(a: float, b: float, fc: Optional[FlopCounter] = None):
    """Return (c, s, r) with [[c, s], [-s, c]] @ [a, b] = [r, 0], r >= 0."""
    if b == 0.0:
        if a >= 0.0:
            return 1.0, 0.0, a
        return -1.0, 0.0, -a
    r = math.hypot(a, b)
    _tally(fc, 6)
    return a / r, b / r, r


def givens_retriangularize(R: np.ndarray, k: int, fc: Optional[FlopCounter] = None,
                           Q: Optional[np.ndarray] = None) -> None:
    """Zero ``R[k, k-1]`` by rotating rows k-1 and k, in place.

    Intended for use right after columns k-1 and k of an upper triangular R
    were swapped. If ``Q`` is given it receives the transposed rotation on
    columns k-1, k so that ``Q @ R`` is unchanged. A zero subdiagonal entry
    leaves everything untouched.
    """
    if k < 1 or k >= R.shape[0]:
        raise IndexError(f"rotation index {k} out of range for n={R.shape[0]}")
    b = float(R[k, k - 1])
    if b == 0.0:
        return
    a = float(R[k - 1, k - 1])
    c, s, r = givens(a, b, fc)
    R[k - 1, k - 1] = r
    R[k, k - 1] = 0.0
    top = R[k - 1, k:].copy()
    bot = R[k, k:].copy()
    R[k - 1, k:] = c * top + s * bot
    R[k, k:] = -s * top + c * bot
    _tally(fc, 6 * top.shape[0])
    if Q is not None:
        left = Q[:, k - 1].copy()
        right = Q[:, k].copy()
        Q[:, k - 1] = c * left + s * right
        Q[:, k] = -s * left + c * right


def spectral_condition(H) -> float:
    """2-norm condition number; ``inf`` when H is numerically singular."""
    A = as_matrix(H)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= A.shape[0] * np.finfo(float).eps * s[0]:
        return math.inf
    return float(s[0] / s[-1])


def read_matrix(path) -> np.ndarray:
    """Read the text format: header line ``n n`` followed by n rows."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError:
        raise ValueError(f"{path}: header must be two integers 'rows cols'") from None
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {len(body)}")
    data = []
    for i, ln in enumerate(body, start=2):
        try:
            vals = [float(t) for t in ln.split()]
        except ValueError:
            raise ValueError(f"{path}:{i}: non-numeric entry") from None
        if len(vals) != cols:
            raise ValueError(f"{path}:{i}: expected {cols} entries, found {len(vals)}")
        data.append(vals)
    return as_matrix(data, square=False)


def format_matrix(M: np.ndarray) -> str:
    M = np.asarray(M)
    fmt = (lambda v: str(int(v))) if np.issubdtype(M.dtype, np.integer) else (lambda v: repr(float(v)))
    out = [f"{M.shape[0]} {M.shape[1]}"]
    out += [" ".join(fmt(v) for v in row) for row in M]
    return "\n".join(out) + "\n"


def write_matrix(path, M: np.ndarray) -> None:
    Path(path).write_text(format_matrix(M), encoding="utf-8")
