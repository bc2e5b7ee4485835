"""Stateful accelerators driven by :mod:`iqnkit.driver`.

Each accelerator sees one coupling sequence through three calls:
``start_step`` with the first evaluation of a time step, ``update`` for every
later evaluation, and ``finish_step`` once the step has converged.  Each
call returns the next interface iterate (``finish_step`` returns nothing).
"""

import os
from collections import Counter, deque

import numpy as np

from iqnkit.accelerators.config import AcceleratorConfig, Scheme
from iqnkit.accelerators.storage import DataPairMatrices, IterationScratch
from iqnkit.accelerators.updates import (
    aitken_omega,
    ils_update,
    imvj_update,
    imvls_explicit_update,
    imvls_implicit_update,
    implicit_jacobian_product,
    make_record,
    relax_update,
)
from iqnkit.errors import SingularGram
from iqnkit.linalg import count, qr_pseudo_factor, solve_least_squares

DEGENERATE_PAIR = 1e-14
# dense Jacobian variants hold J, its successor and one m x m temporary
DENSE_COPIES = 3


def available_memory():
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def check_dense_memory(m):
    need = DENSE_COPIES * 8 * m * m
    have = available_memory()
    if have is not None and need > have:
        raise MemoryError(
            f"an explicit {m} x {m} Jacobian needs about {need / 2**30:.1f} GiB, "
            f"only {have / 2**30:.1f} GiB available"
        )


class Accelerator:
    def __init__(self, config, m):
        self.config = config
        self.m = int(m)
        self.flops = Counter()
        self.warnings = Counter()
        self.step_index = 0

    def begin_step(self):
        """Reset per-step state; called before the first evaluation of a step."""

    def start_step(self, x, xtilde, R):
        raise NotImplementedError

    def update(self, x, xtilde, R):
        raise NotImplementedError

    def finish_step(self):
        self.step_index += 1

    def _relax(self, x, xtilde, omega=None):
        return relax_update(x, xtilde, self.config.omega0 if omega is None else omega, self.flops)


class ConstantRelaxation(Accelerator):
    def start_step(self, x, xtilde, R):
        return self._relax(x, xtilde)

    def update(self, x, xtilde, R):
        return self._relax(x, xtilde)


class AitkenRelaxation(Accelerator):
    """Dynamic relaxation; the factor restarts from ``omega0`` every step
    unless ``aitken_carry_omega`` is set."""

    def __init__(self, config, m):
        super().__init__(config, m)
        self.omega = config.omega0
        self._R_prev = None

    def start_step(self, x, xtilde, R):
        if not self.config.aitken_carry_omega:
            self.omega = self.config.omega0
        self._R_prev = np.array(R, dtype=float)
        return self._relax(x, xtilde, self.omega)

    def update(self, x, xtilde, R):
        omega_max = self.config.aitken_omega_max
        self.omega = aitken_omega(self.omega, self._R_prev, R, omega_max)
        if abs(self.omega) == omega_max:
            self.warnings["aitken_clamped"] += 1
        count(self.flops, "vector", 3 * self.m)
        self._R_prev = np.array(R, dtype=float)
        return self._relax(x, xtilde, self.omega)


class SecantAccelerator(Accelerator):
    """Shared data-pair bookkeeping of the quasi-Newton schemes.

    A new pair whose residual difference is below 1e-14 times the step's
    first residual norm is rejected and the iteration falls back to
    constant relaxation.  The least-squares matrix never gets more columns
    than rows: reused columns of earlier steps go first, then the oldest
    pairs of the current step (counted under ``dropped_pairs``).
    """

    def begin_step(self):
        self.pairs = DataPairMatrices(self.m)

    def start_step(self, x, xtilde, R):
        self._R_prev = np.array(R, dtype=float)
        self._xtilde_prev = np.array(xtilde, dtype=float)
        self._R0_norm = float(np.linalg.norm(R))
        return self._first_update(x, xtilde, R)

    def update(self, x, xtilde, R):
        dR = R - self._R_prev
        if np.linalg.norm(dR) < DEGENERATE_PAIR * self._R0_norm:
            self.warnings["rejected_pairs"] += 1
            return self._relax(x, xtilde)
        if self.pairs.k == self.m:
            self._drop_oldest_pair()
        self.pairs.append(dR, xtilde - self._xtilde_prev)
        count(self.flops, "vector", 2 * self.m)
        self._R_prev = np.array(R, dtype=float)
        self._xtilde_prev = np.array(xtilde, dtype=float)
        return self._secant_update(x, xtilde, R)

    def _drop_oldest_pair(self):
        self.pairs.drop_oldest()
        self.warnings["dropped_pairs"] += 1

    def _first_update(self, x, xtilde, R):
        return self._relax(x, xtilde)

    def _secant_update(self, x, xtilde, R):
        raise NotImplementedError


class IQNILS(SecantAccelerator):
    """IQN-ILS with the columns of the ``q`` most recent steps appended."""

    def __init__(self, config, m):
        super().__init__(config, m)
        self.past = deque(maxlen=config.history_limit)

    def _past_columns(self, room):
        """The newest ``room`` reused columns (None when there are none)."""
        if not self.past or room < 1:
            return None, None
        V = np.hstack([V for V, _ in self.past])
        W = np.hstack([W for _, W in self.past])
        if V.shape[1] > room:
            self.warnings["truncated_reuse"] += 1
            V, W = V[:, -room:], W[:, -room:]
        return V, W

    def _first_update(self, x, xtilde, R):
        V, W = self._past_columns(self.m)
        if V is None:
            return self._relax(x, xtilde)
        return ils_update(V, W, xtilde, R, self.config.rank_tolerance, self.flops)

    def _secant_update(self, x, xtilde, R):
        V, W = self.pairs.V, self.pairs.W
        Vp, Wp = self._past_columns(self.m - V.shape[1])
        if Vp is not None:
            V, W = np.hstack([V, Vp]), np.hstack([W, Wp])
        return ils_update(V, W, xtilde, R, self.config.rank_tolerance, self.flops)

    def finish_step(self):
        if self.config.q != 0 and self.pairs.k > 0:
            self.past.append((self.pairs.V.copy(), self.pairs.W.copy()))
        super().finish_step()


class IQNIMVJ(SecantAccelerator):
    """Multi-vector Jacobian scheme with a dense m x m inverse Jacobian."""

    def __init__(self, config, m):
        super().__init__(config, m)
        check_dense_memory(self.m)
        self.J = np.zeros((self.m, self.m))
        self._J_next = None
        self.has_history = False

    def begin_step(self):
        super().begin_step()
        self._J_next = None

    def _first_update(self, x, xtilde, R):
        if not self.has_history:
            return self._relax(x, xtilde)
        count(self.flops, "dense_jacobian", self.m * self.m)
        return xtilde - self.J @ R

    def _secant_update(self, x, xtilde, R):
        x_new, self._J_next = imvj_update(
            self.J, self.pairs.V, self.pairs.W, xtilde, R, self.config.rank_tolerance, self.flops
        )
        return x_new

    def finish_step(self):
        if self._J_next is not None:
            self.J = self._J_next
            self._J_next = None
            self.has_history = True
        super().finish_step()


class IQNIMVLS(SecantAccelerator):
    """Multi-vector least-squares scheme.

    With ``scheme=IMVLSExplicit`` the previous inverse Jacobian is kept as a
    dense matrix; with ``IMVLSImplicit`` only the (V, W, Z) triplets of the
    last ``q`` steps are stored and every Jacobian product is evaluated from
    them.
    """

    def __init__(self, config, m):
        super().__init__(config, m)
        self.explicit = config.scheme is Scheme.IMVLS_EXPLICIT
        if self.explicit:
            check_dense_memory(self.m)
            self.J = np.zeros((self.m, self.m))
            self.has_explicit_history = False
        else:
            self.records = deque(maxlen=config.history_limit)
        self._last_pairs = None

    @property
    def has_history(self):
        return self.has_explicit_history if self.explicit else bool(self.records)

    def jacobian_product(self, r):
        if self.explicit:
            count(self.flops, "dense_jacobian", self.m * self.m)
            return self.J @ r
        return implicit_jacobian_product(self.records, r, self.flops)

    def _first_update(self, x, xtilde, R):
        b0 = self.jacobian_product(R) if self.has_history else np.zeros(self.m)
        self.scratch = IterationScratch(self.m, b0)
        if self.config.explicit_recent_step and self._last_pairs is not None:
            V_prev, W_prev = self._last_pairs
            JV = np.column_stack([self.jacobian_product(V_prev[:, j]) for j in range(V_prev.shape[1])])
            self.scratch.V_extra = V_prev
            self.scratch.B_extra = W_prev - JV
            alpha = solve_least_squares(V_prev, -R, self.config.rank_tolerance, self.flops)
            return xtilde - b0 + self.scratch.B_extra @ alpha
        if not self.has_history:
            return self._relax(x, xtilde)
        return xtilde - b0

    def _drop_oldest_pair(self):
        super()._drop_oldest_pair()
        self.scratch.B.drop_first()

    def _secant_update(self, x, xtilde, R):
        tol = self.config.rank_tolerance
        extra = self.scratch.V_extra
        if extra is not None and self.pairs.k + extra.shape[1] > self.m:
            room = self.m - self.pairs.k
            self.warnings["truncated_reuse"] += 1
            if room < 1:
                self.scratch.V_extra = self.scratch.B_extra = None
            else:
                self.scratch.V_extra = extra[:, -room:]
                self.scratch.B_extra = self.scratch.B_extra[:, -room:]
        if self.explicit:
            return imvls_explicit_update(self.J, self.scratch, self.pairs, xtilde, R, tol, self.flops)
        return imvls_implicit_update(self.records, self.scratch, self.pairs, xtilde, R, tol, self.flops)

    def finish_step(self):
        if self.pairs.k > 0:
            if self.explicit:
                Z = qr_pseudo_factor(self.pairs.V, self.config.rank_tolerance, self.flops)
                B = self.scratch.B.matrix
                count(self.flops, "dense_jacobian", self.m * self.m * B.shape[1] + self.m * self.m)
                self.J = self.J + B @ Z
                self.has_explicit_history = True
            elif self.config.q != 0:
                try:
                    record = make_record(
                        self.pairs, self.step_index, self.config.pivot_tolerance, self.flops
                    )
                except SingularGram:
                    self.warnings["dropped_records"] += 1
                else:
                    self.records.append(record)
            self._last_pairs = (self.pairs.V.copy(), self.pairs.W.copy())
        super().finish_step()


_CLASSES = {
    Scheme.CONST_RELAX: ConstantRelaxation,
    Scheme.AITKEN: AitkenRelaxation,
    Scheme.ILS: IQNILS,
    Scheme.IMVJ: IQNIMVJ,
    Scheme.IMVLS_EXPLICIT: IQNIMVLS,
    Scheme.IMVLS_IMPLICIT: IQNIMVLS,
}


def make_accelerator(config, m):
    if not isinstance(config, AcceleratorConfig):
        config = AcceleratorConfig(**config)
    return _CLASSES[config.scheme](config, m)
