"""Independent reference computations used by the test-suite."""

import numpy as np

from iqnkit.accelerators import PastStepRecord


def gauss_solve(M, b):
    """Gaussian elimination with partial pivoting in plain Python floats."""
    n = len(M)
    A = [[float(M[i][j]) for j in range(n)] + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col]))
        A[col], A[piv] = A[piv], A[col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            for c in range(col, n + 1):
                A[r][c] -= f * A[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = A[r][n] - sum(A[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / A[r][r]
    return np.array(x)


def normal_equation_solve(V, rhs):
    V = np.asarray(V, dtype=float)
    G = [[float(V[:, i] @ V[:, j]) for j in range(V.shape[1])] for i in range(V.shape[1])]
    return gauss_solve(G, [float(V[:, i] @ rhs) for i in range(V.shape[1])])


def random_history(rng, m, n_steps, k_range=(1, 4)):
    """Random (V, W, Z) records with Z the pseudo-inverse of V (via SVD)."""
    records = []
    for i in range(n_steps):
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        k = min(k, m)
        V = rng.standard_normal((m, k))
        W = rng.standard_normal((m, k))
        records.append(PastStepRecord(V, W, np.linalg.pinv(V), i))
    return records


def rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return diff / scale if scale > 0 else diff


def iterates(report):
    return [[x for x, _, _ in step.history] for step in report.steps]
