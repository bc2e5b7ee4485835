"""Dense kernels shared by the quasi-Newton updates.

Two routes lead to the same ``(V^T V)^{-1} V^T`` operator: a Householder QR
factorization (used for the least-squares coefficients and the explicit
Jacobian variants) and an LU inversion of the Gram matrix (used when a
past-step factor ``Z`` has to be stored cheaply).  Both fail loudly on
degenerate data instead of filtering columns.

Every routine accepts an optional ``flops`` counter (any mutable mapping,
normally a :class:`collections.Counter`) and adds the multiply-add count of
the work it performed under a short category key.
"""

import warnings

import numpy as np
import scipy.linalg

from iqnkit.errors import DimensionMismatch, RankDeficient, SingularGram

RANK_TOLERANCE = 1e-12
PIVOT_TOLERANCE = 1e-14


def count(flops, key, n):
    if flops is not None:
        flops[key] += int(n)


def as_matrix(V, name="V"):
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {V.shape}")
    if V.shape[0] < 1:
        raise DimensionMismatch(f"{name} needs at least one row")
    if not np.all(np.isfinite(V)):
        raise ValueError(f"{name} contains non-finite entries")
    return V


def householder_qr(V, rank_tolerance=RANK_TOLERANCE, flops=None):
    """Thin Householder QR ``V = Q R`` of a tall matrix, no column pivoting.

    Raises RankDeficient if a diagonal entry of ``R`` is smaller than
    ``rank_tolerance`` times the largest one, or if ``V`` is wider than tall.
    """
    V = as_matrix(V)
    m, k = V.shape
    if k < 1:
        raise DimensionMismatch("cannot factor a matrix without columns")
    if k > m:
        raise RankDeficient(f"{k} columns in {m} dimensions cannot be independent")
    Q, R = scipy.linalg.qr(V, mode="economic", check_finite=False)
    count(flops, "qr", 2 * m * k * k)
    diag = np.abs(np.diag(R))
    largest = diag.max()
    if largest == 0.0 or np.any(diag < rank_tolerance * largest):
        j = int(np.argmin(diag))
        raise RankDeficient(
            f"|R[{j},{j}]| = {diag[j]:.3e} below {rank_tolerance:g} * {largest:.3e}"
        )
    return Q, R


def solve_least_squares(V, rhs, rank_tolerance=RANK_TOLERANCE, flops=None):
    """Minimize ``||V a - rhs||_2`` through Householder QR.

    ``rhs`` may be a vector of length m or an m x n block; the result has
    shape (k,) or (k, n) accordingly.
    """
    V = as_matrix(V)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != V.shape[0] or rhs.ndim > 2:
        raise DimensionMismatch(f"rhs shape {rhs.shape} does not match V {V.shape}")
    Q, R = householder_qr(V, rank_tolerance, flops)
    m, k = V.shape
    n = 1 if rhs.ndim == 1 else rhs.shape[1]
    qtb = Q.T @ rhs
    count(flops, "qr", m * k * n + k * k * n // 2)
    return scipy.linalg.solve_triangular(R, qtb, check_finite=False)


def qr_pseudo_factor(V, rank_tolerance=RANK_TOLERANCE, flops=None):
    """``Z = (V^T V)^{-1} V^T`` as ``R^{-1} Q^T``, i.e. the m least-squares
    problems against the unit vectors solved with a single factorization."""
    V = as_matrix(V)
    Q, R = householder_qr(V, rank_tolerance, flops)
    m, k = V.shape
    count(flops, "qr", m * k * k // 2)
    return scipy.linalg.solve_triangular(R, Q.T, check_finite=False)


def invert_gram(V, pivot_tolerance=PIVOT_TOLERANCE, flops=None):
    """Inverse of ``V^T V`` by LU with partial pivoting.

    A pivot is rejected when its magnitude falls below ``pivot_tolerance``
    times the largest diagonal entry of the Gram matrix, which keeps the
    test independent of the scale of ``V``.
    """
    V = as_matrix(V)
    m, k = V.shape
    if k < 1:
        raise DimensionMismatch("cannot invert the Gram matrix of zero columns")
    gram = V.T @ V
    count(flops, "gram", m * k * k)
    scale = np.max(np.diag(gram))
    if scale == 0.0:
        raise SingularGram("Gram matrix is identically zero")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(gram, check_finite=False)
    count(flops, "lu", k**3)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots < pivot_tolerance * scale):
        j = int(np.argmin(pivots))
        raise SingularGram(
            f"pivot {j} has magnitude {pivots[j]:.3e} below {pivot_tolerance:g} * {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), np.eye(k), check_finite=False)


def compute_pseudo_factor(V, pivot_tolerance=PIVOT_TOLERANCE, flops=None):
    """``Z = (V^T V)^{-1} V^T`` through the LU-inverted Gram matrix (k x m)."""
    V = as_matrix(V)
    G = invert_gram(V, pivot_tolerance, flops)
    m, k = V.shape
    count(flops, "gram", m * k * k)
    return G @ V.T
