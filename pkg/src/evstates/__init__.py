"""Extreme intensity statistics of complex random states and kicked-rotor eigenstates."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    PrecisionLossError,
    gumbel_limit_cdf,
    harmonic_number,
    inclusion_exclusion_cdf,
    max_cdf,
    max_cdf_alternating,
    max_pdf,
    mean_max,
    mean_min,
    min_cdf,
    second_moment_max,
    std_max,
    weibull_limit_cdf,
)
