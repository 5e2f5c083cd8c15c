"""Independent reference computations used across the test modules."""

import itertools
import math

import numpy as np

U = np.finfo(float).eps / 2


def int_det(M) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss elimination)."""
    A = [[int(v) for v in row] for row in np.asarray(M)]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def certified_box(R, ybar):
    """Per-coordinate integer ranges guaranteed to contain every ILS minimizer.

    With c = R^{-1} ybar and any integer point z0, each minimizer z satisfies
    |z_i - c_i| <= ||row i of R^{-1}|| * ||ybar - R z0||. z0 is a nearest-plane
    point computed here by plain back substitution.
    """
    n = len(ybar)
    z0 = np.zeros(n)
    for k in range(n - 1, -1, -1):
        z0[k] = np.floor((ybar[k] - R[k, k + 1:] @ z0[k + 1:]) / R[k, k] + 0.5)
    rho = np.linalg.norm(ybar - R @ z0) * (1 + 1e-9)
    Rinv = np.linalg.inv(R)
    c = Rinv @ ybar
    w = np.linalg.norm(Rinv, axis=1) * rho
    return [range(math.floor(ci - wi), math.ceil(ci + wi) + 1) for ci, wi in zip(c, w)], c


def brute_force_ils(R, ybar, box, chunk=200_000):
    """Exhaustive minimum of ||ybar - R z||^2 over the product of integer ranges.

    Returns the minimum and every point attaining it (to 1e-12 relative).
    """
    best = np.inf
    winners = []
    it = itertools.product(*box)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=float)
        if block.size == 0:
            break
        block = block.reshape(-1, len(box))
        res = np.sum((ybar[None, :] - block @ R.T) ** 2, axis=1)
        m = res.min()
        if m < best * (1 + 1e-12):
            if m < best:
                winners = [w for w in winners if w[0] <= m * (1 + 1e-12)]
                best = m
            hits = res <= best * (1 + 1e-12)
            winners += [(r, z) for r, z in zip(res[hits], block[hits])]
    winners = [z for r, z in winners if r <= best * (1 + 1e-12)]
    return best, np.array(winners, dtype=np.int64)


def box_size(box) -> int:
    return math.prod(len(r) for r in box)


def pathological_literal(n):
    """Upper-left block of the 1-2-4 banded example written out by hand."""
    full = np.array([
        [1, 2, 4, 0, 0, 0],
        [0, 1, 2, 0, 0, 0],
        [0, 0, 1, 2, 4, 0],
        [0, 0, 0, 1, 2, 0],
        [0, 0, 0, 0, 1, 2],
        [0, 0, 0, 0, 0, 1],
    ], dtype=float)
    return full[:n, :n]
