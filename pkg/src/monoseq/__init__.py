"""Optimal online selection of a monotone subsequence: dynamic programming,
simulation and diagnostics."""

from .distribution import DistributionModel, cdf, pdf, quantile, to_exponential_coord, to_uniform_coord
from .estimator import OptimalOnlineSelector
from .oracle import small_n_oracle
from .rng import RngStream
from .simulator import (
    EpisodeTrace,
    coupled_invariance_batch,
    coupled_invariance_check,
    offline_lis,
    simulate_batch,
    simulate_episode,
    simulate_poisson_batch,
    simulate_poisson_horizon,
    simulate_traces,
)
from .stats import (
    BoundReport,
    MonteCarloSummary,
    bound_report,
    clt_statistic,
    ks_to_standard_normal,
    property_report,
    summarize,
    trace_property_report,
)
from .value_engine import (
    GridSpec,
    ValueTable,
    accepts,
    build_value_table,
    critical_value,
    derivative_at,
    threshold_at,
    value_at,
)
from .variance_engine import (
    VarianceTable,
    ab_components,
    build_variance_table,
    conditional_variance_series,
    drift_at,
    variance_at,
)

__version__ = "0.1.0"
