"""Complex (proper and improper) Gaussian random tensors.

Sampling with arbitrary, mode-restricted or separable correlation, moment
estimation, densities in tensor form, characteristic functions and
empirical checks of separable channel correlations.
"""

from .channel import (
    KroneckerReport,
    Lemma1Report,
    counterexample_correlation,
    kronecker_counterexample_check,
    separable_channel_correlation,
    unit_correlation_matrix,
    verify_lemma1,
)
from .density import (
    FLAVORS,
    GaussianSpec,
    characteristic_function,
    empirical_cf,
    log_pdf,
    log_pdf_vectorized,
)
from .moments import (
    MomentEstimate,
    augment,
    augmented_covariance,
    composite,
    estimate_correlation,
    estimate_moments,
    propriety_statistic,
    split_augmented,
)
from .sampling import (
    PSD_CLAMP,
    SeparableCorrelation,
    build_mode_restricted_correlation,
    correlation_sqrt,
    hermitian_sqrt,
    parameter_counts,
    sample_correlated,
    sample_iid,
    sample_separable,
    separable_to_full,
)

__all__ = [
    "FLAVORS",
    "PSD_CLAMP",
    "GaussianSpec",
    "KroneckerReport",
    "Lemma1Report",
    "MomentEstimate",
    "SeparableCorrelation",
    "augment",
    "augmented_covariance",
    "build_mode_restricted_correlation",
    "characteristic_function",
    "composite",
    "correlation_sqrt",
    "counterexample_correlation",
    "empirical_cf",
    "estimate_correlation",
    "estimate_moments",
    "hermitian_sqrt",
    "kronecker_counterexample_check",
    "log_pdf",
    "log_pdf_vectorized",
    "parameter_counts",
    "propriety_statistic",
    "sample_correlated",
    "sample_iid",
    "sample_separable",
    "separable_channel_correlation",
    "separable_to_full",
    "split_augmented",
    "unit_correlation_matrix",
    "verify_lemma1",
]
