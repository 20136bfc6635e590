"""Inventory planning for dynamic assortment under multinomial logit choice."""

from .catalog import (
    Budget,
    Cardinality,
    Catalog,
    CustomerTypes,
    Demand,
    Model,
    ValidationError,
    deterministic,
    from_pmf,
    geometric,
    make_budget,
    make_catalog,
    make_types,
    poisson,
    shifted_geometric,
    single_type,
    validate,
)
from .cdlp import f_lp, multi_type_sblp_reference, single_type_reference, solve_sblp_fast
from .choice import assortment_revenue, choice_prob, optimal_static_assortment
from .da_planner import DaPlan, UnsupportedDemand, solve_da, transform_round_bad
from .dap_planner import DapPlan, calculate_benefit, get_number, optimize_dap
from .fluid import fp_consumption, fp_revenue, separability_decompose, sequence
from .policies import build_sampling_policy, greedy_offer, sampling_offer
from .simulator import SimResult, simulate_da, simulate_dap

__version__ = "0.1.0"
