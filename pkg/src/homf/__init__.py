"""Precision limits for two-photon delay measurements with Hong-Ou-Mandel interference."""

__version__ = "0.1.0"

from .errors import HomfError, NumericalLimitError, ValidationError
from .estimate import EstimationReport, ExperimentConfig, run_experiment
from .hom import (
    BeamsplitterConfig,
    HomDip,
    cfi_gaussian,
    cfi_numeric,
    cfi_zero_delay,
    coincidence_probability,
    coincidence_probability_gaussian,
    hom_dip,
    max_cfi_gaussian,
    visibility_overlap,
)
from .metrology import QfiMatrix, effective_qfi, optimal_covariance, qcrb, qfi_matrix
from .spectra import (
    GaussianJsaParams,
    Grid2D,
    JointAmplitude,
    SpectralMoments,
    gaussian_jsa,
    moments,
    to_spectral,
    to_temporal,
)
from .timeresolved import (
    ClickDistribution,
    DetectorConfig,
    cfi_matrix_timeresolved,
    click_distribution_exact,
    click_distribution_slow,
)

__all__ = [
    "BeamsplitterConfig",
    "ClickDistribution",
    "DetectorConfig",
    "EstimationReport",
    "ExperimentConfig",
    "GaussianJsaParams",
    "Grid2D",
    "HomDip",
    "HomfError",
    "JointAmplitude",
    "NumericalLimitError",
    "QfiMatrix",
    "SpectralMoments",
    "ValidationError",
    "cfi_gaussian",
    "cfi_matrix_timeresolved",
    "cfi_numeric",
    "cfi_zero_delay",
    "click_distribution_exact",
    "click_distribution_slow",
    "coincidence_probability",
    "coincidence_probability_gaussian",
    "effective_qfi",
    "gaussian_jsa",
    "hom_dip",
    "max_cfi_gaussian",
    "moments",
    "optimal_covariance",
    "qcrb",
    "qfi_matrix",
    "run_experiment",
    "to_spectral",
    "to_temporal",
    "visibility_overlap",
]
