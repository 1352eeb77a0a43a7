"""Knowledge-state algorithms for small-cache paging, in exact arithmetic.

Implements the 3/2-competitive two-page-cache and 11/6-competitive
three-page-cache randomized online algorithms, with the machinery to
certify their ratios (estimators, transportation costs, potential
tables), simulate them exactly or by Monte Carlo, and cross-check
against optimal offline oracles.
"""

from .cache import CacheProblem, Config, Page, distance, service_cost, service_support
from .estimator import (
    Estimator,
    WeightedSum,
    format_bar,
    minimize_support,
    parse_bar,
    weighted_sum,
)
from .knowledge import (
    ActionOutcome,
    KnowledgeState,
    PotentialReport,
    SynthesisResult,
    action_outcome,
    check_update_inequality,
    max_adjust,
    synthesize_potential,
    verify_potential,
)
from .offline import (
    WorkFunctionTable,
    opt_cost,
    opt_cost_classical,
    opt_cost_to,
    work_function,
)
from .rules import (
    ActionSpec,
    K2Rules,
    K3Rules,
    StateClass,
    k2_rules,
    k3_rules,
    reference_potentials,
    rules_for,
)
from .simulate import (
    BehavioralState,
    DistributionalRun,
    ExactChain,
    behavioral_chain_exact,
    behavioral_run,
    behavioral_step,
    monte_carlo,
    parse_sequence,
    read_sequence,
    start_behavioral,
    trial_rng,
)
from .transport import (
    ConfigDistribution,
    TransportInstance,
    TransportPlan,
    distribution_distance,
    solve_min_cost,
    step_cost,
    step_plan,
)

__all__ = [
    "ActionOutcome",
    "ActionSpec",
    "BehavioralState",
    "CacheProblem",
    "Config",
    "ConfigDistribution",
    "DistributionalRun",
    "Estimator",
    "ExactChain",
    "K2Rules",
    "K3Rules",
    "KnowledgeState",
    "Page",
    "PotentialReport",
    "StateClass",
    "SynthesisResult",
    "TransportInstance",
    "TransportPlan",
    "WeightedSum",
    "WorkFunctionTable",
    "action_outcome",
    "behavioral_chain_exact",
    "behavioral_run",
    "behavioral_step",
    "check_update_inequality",
    "distance",
    "distribution_distance",
    "format_bar",
    "k2_rules",
    "k3_rules",
    "max_adjust",
    "minimize_support",
    "monte_carlo",
    "opt_cost",
    "opt_cost_classical",
    "opt_cost_to",
    "parse_bar",
    "parse_sequence",
    "read_sequence",
    "reference_potentials",
    "rules_for",
    "service_cost",
    "service_support",
    "solve_min_cost",
    "start_behavioral",
    "step_cost",
    "step_plan",
    "synthesize_potential",
    "trial_rng",
    "verify_potential",
    "weighted_sum",
    "work_function",
]

__version__ = "0.1.0"
