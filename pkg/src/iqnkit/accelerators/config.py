from dataclasses import dataclass
from enum import Enum

from iqnkit.linalg import PIVOT_TOLERANCE, RANK_TOLERANCE

ALL = "all"


class Scheme(str, Enum):
    CONST_RELAX = "ConstRelax"
    AITKEN = "Aitken"
    ILS = "ILS"
    IMVJ = "IMVJ"
    IMVLS_EXPLICIT = "IMVLSExplicit"
    IMVLS_IMPLICIT = "IMVLSImplicit"

    @property
    def is_quasi_newton(self):
        return self not in (Scheme.CONST_RELAX, Scheme.AITKEN)

    @property
    def keeps_dense_jacobian(self):
        return self in (Scheme.IMVJ, Scheme.IMVLS_EXPLICIT)


_LABELS = {
    Scheme.CONST_RELAX: "Under-relaxation",
    Scheme.AITKEN: "Aitken",
    Scheme.ILS: "IQN-ILS",
    Scheme.IMVJ: "IQN-IMVJ",
    Scheme.IMVLS_EXPLICIT: "IQN-IMVLS explicit",
    Scheme.IMVLS_IMPLICIT: "IQN-IMVLS",
}


@dataclass(frozen=True)
class AcceleratorConfig:
    """Settings of one update scheme.

    ``q`` counts reused past time steps: explicitly appended columns for ILS,
    truncation of the implicit product for IMVLSImplicit.  The string
    ``"all"`` keeps every past step.  ``explicit_recent_step`` additionally
    feeds the previous step's data pairs into the least-squares problem of
    the IMVLS schemes.
    """

    scheme: Scheme
    omega0: float = 0.5
    q: object = 0
    explicit_recent_step: bool = False
    rank_tolerance: float = RANK_TOLERANCE
    pivot_tolerance: float = PIVOT_TOLERANCE
    aitken_omega_max: float = 2.0
    aitken_carry_omega: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not 0.0 < self.omega0 <= 1.0:
            raise ValueError(f"omega0 must lie in (0, 1], got {self.omega0}")
        q = self.q
        if isinstance(q, str):
            if q.strip().lower() != ALL:
                q = int(q)
            else:
                q = ALL
        if q != ALL:
            if int(q) != q or q < 0:
                raise ValueError(f"q must be a non-negative integer or 'all', got {self.q!r}")
            q = int(q)
        object.__setattr__(self, "q", q)
        if self.explicit_recent_step and self.scheme not in (
            Scheme.IMVLS_EXPLICIT,
            Scheme.IMVLS_IMPLICIT,
        ):
            raise ValueError("explicit_recent_step only applies to the IMVLS schemes")
        if self.rank_tolerance <= 0 or self.pivot_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.aitken_omega_max <= 0:
            raise ValueError("aitken_omega_max must be positive")

    @property
    def history_limit(self):
        """Number of past steps kept, or None for all of them."""
        return None if self.q == ALL else self.q

    @property
    def label(self):
        name = _LABELS[self.scheme]
        if self.scheme is Scheme.CONST_RELAX:
            return f"{name}, omega={self.omega0:g}"
        if self.scheme in (Scheme.ILS, Scheme.IMVLS_IMPLICIT):
            name += f", q={self.q}"
        if self.explicit_recent_step:
            name += ", 1 explicit step"
        return name
