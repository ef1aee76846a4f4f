"""Interval-function calculus and product-integral estimation for
multi-state event histories.

The pieces fit together like this: ``intervals`` supplies endpoint-aware
intervals and partitions; ``interval_functions`` the additive and
multiplicative transforms, product integrals and step-function integrals
built on them; ``multistate`` an exactly enumerable law of a multi-state
process serving as the oracle; ``estimators`` the Nelson-Aalen /
Aalen-Johansen pipeline on observed event histories; ``simulation`` the
grid samplers and censoring mechanisms; ``checks`` the verification
suites; and ``cli`` the command-line harness.
"""

from .intervals import (
    Interval,
    Partition,
    halve_open_cells,
    ordered_before,
    refine,
    refines,
    young_partition,
)
from .interval_functions import (
    AdditiveIF,
    BoundCheck,
    ConvergenceError,
    GeneralIF,
    StepFunction,
    additive_transform,
    check_product_variation_bound,
    defect_profile,
    kolmogorov_integral,
    matrix_norm,
    multiplicative_transform,
    plus_identity,
    product_integral,
    refinement_partitions,
    strict_transform_defect,
    variation_norm,
)
from .multistate import (
    ExtinctionReport,
    HazardMatrixIF,
    PathSpace,
    StatePath,
    load_pathspace,
    save_pathspace,
)
from .estimators import (
    EstimateGrid,
    EstimationError,
    EventHistory,
    FormatError,
    aalen_johansen,
    empirical_counts,
    empirical_occupancy,
    estimate,
    nelson_aalen,
    occupation_estimate,
    read_event_histories,
    write_event_histories,
)
from .simulation import (
    CensoringConfig,
    ConfigError,
    ScenarioConfig,
    TransitionRule,
    apply_censoring,
    exact_pathspace,
    forced_exit_scenario,
    illness_death_scenario,
    load_censoring,
    load_scenario,
    sample_path,
    simulate_sample,
    subject_rng,
    two_state_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveIF",
    "BoundCheck",
    "CensoringConfig",
    "ConfigError",
    "ConvergenceError",
    "EstimateGrid",
    "EstimationError",
    "EventHistory",
    "ExtinctionReport",
    "FormatError",
    "GeneralIF",
    "HazardMatrixIF",
    "Interval",
    "Partition",
    "PathSpace",
    "ScenarioConfig",
    "StatePath",
    "StepFunction",
    "TransitionRule",
    "aalen_johansen",
    "additive_transform",
    "apply_censoring",
    "check_product_variation_bound",
    "defect_profile",
    "empirical_counts",
    "empirical_occupancy",
    "estimate",
    "exact_pathspace",
    "forced_exit_scenario",
    "halve_open_cells",
    "illness_death_scenario",
    "kolmogorov_integral",
    "load_censoring",
    "load_pathspace",
    "load_scenario",
    "matrix_norm",
    "multiplicative_transform",
    "nelson_aalen",
    "occupation_estimate",
    "ordered_before",
    "plus_identity",
    "product_integral",
    "read_event_histories",
    "refine",
    "refinement_partitions",
    "refines",
    "sample_path",
    "save_pathspace",
    "simulate_sample",
    "strict_transform_defect",
    "subject_rng",
    "two_state_scenario",
    "variation_norm",
    "write_event_histories",
    "young_partition",
]
