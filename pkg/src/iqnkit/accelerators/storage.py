from dataclasses import dataclass

import numpy as np

from iqnkit.errors import DimensionMismatch


class ColumnBuffer:
    """An m x k matrix grown one column at a time (column-major storage)."""

    def __init__(self, m, capacity=8):
        self._data = np.empty((m, max(capacity, 1)), order="F")
        self.k = 0

    @property
    def m(self):
        return self._data.shape[0]

    def append(self, column):
        column = np.asarray(column, dtype=float)
        if column.shape != (self.m,):
            raise DimensionMismatch(f"column of shape {column.shape}, expected ({self.m},)")
        if self.k == self._data.shape[1]:
            grown = np.empty((self.m, 2 * self.k), order="F")
            grown[:, : self.k] = self._data
            self._data = grown
        self._data[:, self.k] = column
        self.k += 1

    def drop_first(self):
        """Discard the oldest column."""
        if self.k == 0:
            raise IndexError("buffer is empty")
        self._data[:, : self.k - 1] = self._data[:, 1 : self.k]
        self.k -= 1

    @property
    def matrix(self):
        return self._data[:, : self.k]


class DataPairMatrices:
    """Residual differences ``V`` and output differences ``W`` of one time step.

    Column j of ``V`` is ``R^j - R^(j-1)`` and column j of ``W`` is
    ``x~^j - x~^(j-1)``, appended in iteration order.
    """

    def __init__(self, m, capacity=8):
        self._V = ColumnBuffer(m, capacity)
        self._W = ColumnBuffer(m, capacity)

    @classmethod
    def from_columns(cls, V, W):
        V = np.atleast_2d(np.asarray(V, dtype=float))
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if V.shape != W.shape:
            raise DimensionMismatch(f"V {V.shape} and W {W.shape} differ")
        pairs = cls(V.shape[0], V.shape[1])
        for j in range(V.shape[1]):
            pairs.append(V[:, j], W[:, j])
        return pairs

    def append(self, dR, dxtilde):
        self._V.append(dR)
        self._W.append(dxtilde)

    def drop_oldest(self):
        self._V.drop_first()
        self._W.drop_first()

    @property
    def m(self):
        return self._V.m

    @property
    def k(self):
        return self._V.k

    @property
    def V(self):
        return self._V.matrix

    @property
    def W(self):
        return self._W.matrix


@dataclass(frozen=True)
class PastStepRecord:
    """The triplet kept per converged step for the implicit Jacobian product."""

    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        m, k = self.V.shape
        if self.W.shape != (m, k) or self.Z.shape != (k, m):
            raise DimensionMismatch(
                f"inconsistent record shapes V{self.V.shape} W{self.W.shape} Z{self.Z.shape}"
            )

    @property
    def k(self):
        return self.V.shape[1]


class IterationScratch:
    """Quantities the IMVLS update restores from the previous iteration.

    ``B`` holds ``W - J V`` column by column and ``b_prev`` the Jacobian
    product with the previous residual.  ``V_extra``/``B_extra`` are the
    previous step's columns when they enter the least-squares problem.
    """

    def __init__(self, m, b_prev=None):
        self.B = ColumnBuffer(m)
        self.b_prev = np.zeros(m) if b_prev is None else b_prev
        self.V_extra = None
        self.B_extra = None
