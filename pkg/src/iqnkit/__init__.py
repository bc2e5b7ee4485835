"""Interface quasi-Newton accelerators for partitioned fixed-point coupling."""

from iqnkit.accelerators import ALL, AcceleratorConfig, Scheme, make_accelerator
from iqnkit.driver import ConvergenceCriteria, CouplingReport, run_simulation, run_time_step
from iqnkit.errors import (
    CouplingError,
    DimensionMismatch,
    NotConverged,
    RankDeficient,
    SingularGram,
    StagnantResidual,
)
from iqnkit.problems import (
    FixedPointProblem,
    affine_problem,
    make_added_mass_surrogate,
    make_pulse_sequence,
)

__version__ = "0.1.0"
