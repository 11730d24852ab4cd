"""Estimate the number of spikes of a high-dimensional covariance matrix."""

from .errors import (
    AggregationError,
    ConfigurationError,
    DomainError,
    InputError,
    NumericalError,
    SpikeCountError,
)
from .model import (
    AspectRatio,
    MpLaw,
    SpikeSpec,
    beta_finite,
    beta_limit,
    bulk_edges,
    factor_to_spike,
    mp_density,
    phi,
    threshold_dn,
)
from .sampling import SampleSeed, Spectrum, sample_spectrum, spectrum_from_data
from .estimators import (
    EstimateResult,
    GapEstimatorSettings,
    KnSettings,
    consecutive_gaps,
    estimate_q_known_variance,
    estimate_q_unknown_variance,
    kn_estimate,
    trimmed_variance,
)
from .tracy_widom import tw1_cdf, tw1_upper_quantile

__version__ = "0.1.0"
