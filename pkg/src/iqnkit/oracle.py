"""Brute-force references for the multi-vector Jacobian.

Everything here forms dense m x m matrices or re-evaluates products from
scratch on purpose; it exists to check the fast paths and is never used by
the accelerators or the command line.
"""

import numpy as np

from iqnkit.linalg import count


def _triplet(entry):
    if hasattr(entry, "Z"):
        return entry.V, entry.W, entry.Z
    return entry


def jacobian_by_recursion(history, J0):
    """Fold ``J <- J + (W - J V) Z`` over the history, oldest first."""
    J = np.array(J0, dtype=float)
    for entry in history:
        V, W, Z = _triplet(entry)
        J = J + (W - J @ V) @ Z
    return J


def jacobian_by_product_sum(history, J0):
    """Closed form ``J0 prod_i (I - V_i Z_i) + sum_i W_i Z_i prod_{j>i} (I - V_j Z_j)``,
    with products taken in increasing index from left to right."""
    J0 = np.array(J0, dtype=float)
    m = J0.shape[0]
    I = np.eye(m)
    projectors = [I - V @ Z for V, _, Z in map(_triplet, history)]

    def tail(start):
        P = I
        for Pj in projectors[start:]:
            P = P @ Pj
        return P

    J = J0 @ tail(0)
    for i, entry in enumerate(history):
        V, W, Z = _triplet(entry)
        J = J + W @ Z @ tail(i + 1)
    return J


def naive_implicit_product(records, R, q=None, flops=None):
    """Truncated sum over the last ``q`` records, every projector chain
    applied to ``R`` afresh (quadratic in ``q``)."""
    R = np.asarray(R, dtype=float)
    records = list(records)
    n = len(records)
    q = n if q is None else min(int(q), n)
    m = R.size
    b = np.zeros(m)
    for i in range(n - q, n):
        a = R.copy()
        for j in range(n - 1, i, -1):
            V, _, Z = _triplet(records[j])
            a = a - V @ (Z @ a)
            count(flops, "naive_product", 2 * m * V.shape[1] + m)
        V, W, Z = _triplet(records[i])
        b = b + W @ (Z @ a)
        count(flops, "naive_product", 2 * m * V.shape[1] + m)
    return b
