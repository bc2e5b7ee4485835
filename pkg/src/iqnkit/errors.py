"""Exception types raised by the coupling accelerators and drivers."""


class CouplingError(Exception):
    """Base class for every failure raised by iqnkit."""


class DimensionMismatch(CouplingError, ValueError):
    pass


class RankDeficient(CouplingError):
    """The least-squares matrix lost column rank (duplicate or collinear pairs)."""


class SingularGram(CouplingError):
    """LU elimination of a Gram matrix hit a pivot below tolerance."""


class StagnantResidual(CouplingError):
    """Two consecutive residuals coincide, so Aitken's factor is undefined."""


class NotConverged(CouplingError):
    """The coupling loop ran out of iterations or produced non-finite values.

    ``residual_history`` holds the residual norms of the failed time step and
    ``step`` the index of that step (``None`` when raised outside a simulation).
    """

    def __init__(self, message, residual_history=(), step=None):
        super().__init__(message)
        self.residual_history = list(residual_history)
        self.step = step
