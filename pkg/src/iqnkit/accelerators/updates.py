"""Single update steps of the relaxation and interface quasi-Newton schemes.

These functions are stateless apart from the scratch object of the IMVLS
updates; the classes in :mod:`iqnkit.accelerators.schemes` own the state
carried across iterations and time steps.
"""

import numpy as np

from iqnkit.accelerators.config import Scheme
from iqnkit.accelerators.storage import PastStepRecord
from iqnkit.errors import DimensionMismatch, SingularGram, StagnantResidual
from iqnkit.linalg import (
    PIVOT_TOLERANCE,
    RANK_TOLERANCE,
    compute_pseudo_factor,
    count,
    qr_pseudo_factor,
    solve_least_squares,
)

STAGNATION_FLOOR = 1e-300
STORAGE_CHECK = 1e-8


def _vectors(*arrays):
    out = [np.asarray(a, dtype=float) for a in arrays]
    shape = out[0].shape
    if len(shape) != 1 or any(a.shape != shape for a in out):
        raise DimensionMismatch(f"vector shapes differ: {[a.shape for a in out]}")
    return out


def relax_update(x, xtilde, omega, flops=None):
    """``omega * xtilde + (1 - omega) * x``."""
    x, xtilde = _vectors(x, xtilde)
    count(flops, "vector", 2 * x.size)
    if omega == 1.0:
        return xtilde.copy()
    return omega * xtilde + (1.0 - omega) * x


def aitken_omega(omega_prev, R_prev, R_curr, omega_max=2.0):
    """Aitken's dynamic relaxation factor, clamped to ``[-omega_max, omega_max]``."""
    R_prev, R_curr = _vectors(R_prev, R_curr)
    dR = R_curr - R_prev
    denom = float(dR @ dR)
    if np.sqrt(denom) < STAGNATION_FLOOR:
        raise StagnantResidual("consecutive residuals are identical")
    omega = -omega_prev * float(R_prev @ dR) / denom
    return float(np.clip(omega, -omega_max, omega_max))


def ils_update(V, W, xtilde, R, rank_tolerance=RANK_TOLERANCE, flops=None):
    """IQN-ILS step ``xtilde + W alpha`` with ``alpha = argmin ||V alpha + R||``.

    ``V`` and ``W`` may already contain columns of past time steps.
    """
    xtilde, R = _vectors(xtilde, R)
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    if V.shape != W.shape or V.shape[0] != R.size:
        raise DimensionMismatch(f"V {V.shape}, W {W.shape}, R {R.shape}")
    alpha = solve_least_squares(V, -R, rank_tolerance, flops)
    count(flops, "vector", W.size)
    return xtilde + W @ alpha


def imvj_update(J_prev, V, W, xtilde, R, rank_tolerance=RANK_TOLERANCE, flops=None):
    """IQN-IMVJ step: rebuild ``J = J_prev + (W - J_prev V) Z`` and return
    ``(xtilde - J R, J)``.

    ``J_prev`` is the converged Jacobian of the previous time step; the
    update is never chained from an earlier iteration of the current step.
    """
    xtilde, R = _vectors(xtilde, R)
    m = R.size
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    if J_prev.shape != (m, m) or V.shape != W.shape or V.shape[0] != m:
        raise DimensionMismatch(f"J {J_prev.shape}, V {V.shape}, W {W.shape}, m={m}")
    k = V.shape[1]
    Z = qr_pseudo_factor(V, rank_tolerance, flops)
    B = W - J_prev @ V
    J = J_prev + B @ Z
    count(flops, "dense_jacobian", 2 * m * m * k + m * m)
    x = xtilde - J @ R
    count(flops, "dense_jacobian", m * m)
    return x, J


def implicit_jacobian_product(records, R, flops=None):
    """Product of the multi-vector inverse Jacobian with ``R`` from stored triplets.

    ``records`` are ordered oldest to newest.  They are visited newest first
    while a running vector accumulates the projector products, so every
    record costs a fixed number of m x k_i products and nothing is
    re-evaluated.  An empty list yields the zero vector (zero initial
    Jacobian).
    """
    R = np.asarray(R, dtype=float)
    b = np.zeros_like(R)
    a = R.copy()
    m = R.size
    for rec in reversed(records):
        if rec.V.shape[0] != m:
            raise DimensionMismatch(f"record of dimension {rec.V.shape[0]}, residual {m}")
        t = rec.Z @ a
        b += rec.W @ t
        a -= rec.V @ t
        count(flops, "jacobian_product", 3 * m * rec.k + 2 * m)
    return b


def _imvls_step(product, scratch, pairs, xtilde, R, rank_tolerance, flops):
    xtilde, R = _vectors(xtilde, R)
    if scratch.B.k != pairs.k - 1:
        raise DimensionMismatch(
            f"scratch holds {scratch.B.k} columns for {pairs.k} data pairs"
        )
    m = R.size
    b = product(R)
    scratch.B.append(pairs.W[:, -1] - b + scratch.b_prev)
    count(flops, "vector", 2 * m)
    scratch.b_prev = b
    V, B = pairs.V, scratch.B.matrix
    if scratch.V_extra is not None:
        V = np.hstack([V, scratch.V_extra])
        B = np.hstack([B, scratch.B_extra])
    alpha = solve_least_squares(V, -R, rank_tolerance, flops)
    count(flops, "vector", B.size + 2 * m)
    return xtilde - b + B @ alpha


def imvls_explicit_update(J_prev, scratch, pairs, xtilde, R, rank_tolerance=RANK_TOLERANCE, flops=None):
    """IMVLS step ``xtilde - J R + (W - J V) alpha`` with a dense previous Jacobian.

    ``pairs`` already holds the newest data pair; its ``W - J V`` column is
    appended to ``scratch.B`` from the restored ``b_prev``, so one dense
    matrix-vector product is spent per call.
    """

    def product(r):
        count(flops, "dense_jacobian", J_prev.size)
        return J_prev @ r

    return _imvls_step(product, scratch, pairs, xtilde, R, rank_tolerance, flops)


def imvls_implicit_update(records, scratch, pairs, xtilde, R, rank_tolerance=RANK_TOLERANCE, flops=None):
    """Same step as :func:`imvls_explicit_update` with the Jacobian product
    evaluated from the stored past-step triplets."""

    def product(r):
        return implicit_jacobian_product(records, r, flops)

    return _imvls_step(product, scratch, pairs, xtilde, R, rank_tolerance, flops)


def make_record(pairs, step_index=0, pivot_tolerance=PIVOT_TOLERANCE, flops=None):
    """Compute ``Z`` by LU and package the step's data for later reuse.

    Raises SingularGram if the Gram matrix is singular or ``Z V`` misses the
    identity by more than 1e-8.
    """
    V = pairs.V.copy()
    Z = compute_pseudo_factor(V, pivot_tolerance, flops)
    err = np.max(np.abs(Z @ V - np.eye(V.shape[1])))
    if not err <= STORAGE_CHECK:
        raise SingularGram(f"Z V deviates from the identity by {err:.3e}")
    return PastStepRecord(V, pairs.W.copy(), Z, step_index)


def finalize_time_step(pairs, config, step_index=0, J_prev=None, B=None, flops=None):
    """End-of-step bookkeeping.

    Implicit IMVLS returns a :class:`PastStepRecord`; the explicit variants
    return the committed Jacobian ``J_prev + (W - J_prev V) Z``, reusing
    ``B = W - J_prev V`` when the caller already has it.
    """
    if pairs.k < 1:
        raise ValueError("cannot finalize a time step without data pairs")
    if config.scheme is Scheme.IMVLS_IMPLICIT:
        return make_record(pairs, step_index, config.pivot_tolerance, flops)
    if not config.scheme.keeps_dense_jacobian:
        raise ValueError(f"{config.scheme.value} keeps no Jacobian to finalize")
    m, k = pairs.V.shape
    if J_prev is None:
        J_prev = np.zeros((m, m))
    Z = qr_pseudo_factor(pairs.V, config.rank_tolerance, flops)
    if B is None:
        B = pairs.W - J_prev @ pairs.V
        count(flops, "dense_jacobian", m * m * k)
    count(flops, "dense_jacobian", m * m * k + m * m)
    return J_prev + B @ Z
