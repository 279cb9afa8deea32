"""Greedy sparse sensor placement and full-state reconstruction under cost
constraints, with two sensor fidelities (cheap/noisy vs. expensive/accurate).
"""

__version__ = "0.1.0"

from .basis import Basis, randomized_basis, svd_basis, truncate_basis
from .dataset import (
    Dataset,
    FileSource,
    MatrixFormatError,
    MatrixParseError,
    SpectrumSpec,
    SplitDataset,
    SyntheticSource,
    energy_rank,
    fit_power_law,
    load_matrix,
    overall_variance,
    power_law_spectrum,
    save_matrix,
    split,
    synthesize,
)
from .evaluation import (
    CellResult,
    CompositionResult,
    ExperimentConfig,
    MinErrorPoint,
    classify_composition_sweep,
    classify_regime,
    fractional_error,
    mf_sweep,
    min_error_curve,
    pooled_standard_error,
    reconstruct,
    run_trial,
    sweep_modes_sensors,
)
from .linalg import (
    PivotResult,
    condition_number,
    cpqr,
    cpqr_factors,
    gaussian_matrix,
    lstsq_minnorm,
    random_orthogonal,
    random_orthonormal_columns,
    svd,
)
from .multifidelity import (
    BudgetSpec,
    Composition,
    NoiseModel,
    assign_fidelities,
    budget_from_endpoints,
    enumerate_compositions,
    noisy_measure,
)
from .placement import (
    PlacementPolicy,
    SensorPlan,
    measure,
    oversample_odeim_e,
    oversample_random,
    oversample_sigma_min,
    place,
    qr_pivots,
)
from .seeding import derive_seed

__all__ = [
    "__version__",
    "Basis",
    "BudgetSpec",
    "CellResult",
    "Composition",
    "CompositionResult",
    "Dataset",
    "ExperimentConfig",
    "FileSource",
    "MatrixFormatError",
    "MatrixParseError",
    "MinErrorPoint",
    "NoiseModel",
    "PivotResult",
    "PlacementPolicy",
    "SensorPlan",
    "SpectrumSpec",
    "SplitDataset",
    "SyntheticSource",
    "assign_fidelities",
    "budget_from_endpoints",
    "classify_composition_sweep",
    "classify_regime",
    "condition_number",
    "cpqr",
    "cpqr_factors",
    "derive_seed",
    "energy_rank",
    "enumerate_compositions",
    "fit_power_law",
    "fractional_error",
    "gaussian_matrix",
    "load_matrix",
    "lstsq_minnorm",
    "measure",
    "mf_sweep",
    "min_error_curve",
    "noisy_measure",
    "overall_variance",
    "oversample_odeim_e",
    "oversample_random",
    "oversample_sigma_min",
    "place",
    "pooled_standard_error",
    "power_law_spectrum",
    "qr_pivots",
    "random_orthogonal",
    "random_orthonormal_columns",
    "randomized_basis",
    "reconstruct",
    "run_trial",
    "save_matrix",
    "split",
    "svd",
    "svd_basis",
    "sweep_modes_sensors",
    "synthesize",
    "truncate_basis",
]
