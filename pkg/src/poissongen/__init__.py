"""Explicit lambda-Poisson generic sequences built from de Bruijn blocks."""

from .construction import (
    Construction,
    ProbabilityProfile,
    StepSchedule,
    active_support,
    digit_stream,
    ladder_row,
    segment_report,
    validate_profile,
)
from .debruijn import DeBruijnStream, extend_debruijn, generate_debruijn, is_cyclic_debruijn
from .exactnum import LambdaSpec, RealEnclosure, floor_scaled, ln_rational, poisson_pmf, truncate_digits
from .stats import (
    badset_count,
    badset_tally,
    count_occurrences,
    lambda_scaling_check,
    normality_table,
    occupancy,
    occurrence_histogram,
    quasi_debruijn_metric,
    z_table,
)

__version__ = "0.1.0"
