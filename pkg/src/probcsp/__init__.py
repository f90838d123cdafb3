"""Predictive arc-inconsistency analysis for binary constraint networks."""
from .core import (
    ConstraintNetwork,
    NetworkError,
    RemovalProfile,
    SupportCounts,
    ac3,
    load_network,
    load_profile,
    read_network,
    read_profile,
    support_counts,
)
from .kernels import DEFAULT_BACKEND
from .probability import (
    ProbabilityReport,
    analyze,
    bound_domain,
    bound_network,
    bound_value,
    expected_domain,
    expected_network,
    prob_value_constraint,
    prob_value_network,
)
from .propagation import PropagationState, prob_ac, propagation_trace

__version__ = "0.1.0"
