"""Relaxation and interface quasi-Newton update schemes."""

from iqnkit.accelerators.config import ALL, AcceleratorConfig, Scheme
from iqnkit.accelerators.schemes import (
    Accelerator,
    AitkenRelaxation,
    ConstantRelaxation,
    IQNILS,
    IQNIMVJ,
    IQNIMVLS,
    make_accelerator,
)
from iqnkit.accelerators.storage import (
    ColumnBuffer,
    DataPairMatrices,
    IterationScratch,
    PastStepRecord,
)
from iqnkit.accelerators.updates import (
    aitken_omega,
    finalize_time_step,
    ils_update,
    imvj_update,
    imvls_explicit_update,
    imvls_implicit_update,
    implicit_jacobian_product,
    make_record,
    relax_update,
)

__all__ = [
    "ALL",
    "Accelerator",
    "AcceleratorConfig",
    "AitkenRelaxation",
    "ColumnBuffer",
    "ConstantRelaxation",
    "DataPairMatrices",
    "IQNILS",
    "IQNIMVJ",
    "IQNIMVLS",
    "IterationScratch",
    "PastStepRecord",
    "Scheme",
    "aitken_omega",
    "finalize_time_step",
    "ils_update",
    "imvj_update",
    "imvls_explicit_update",
    "imvls_implicit_update",
    "implicit_jacobian_product",
    "make_accelerator",
    "make_record",
    "relax_update",
]
