"""Knock-out barrier option pricing under GBM: standard and sequential Monte Carlo."""

from .bridge import BridgeQuery, no_hit_prob, no_hit_prob_double, no_hit_prob_single
from .engine import PriceEstimate, estimate_psi, price_knock_in, price_mc, price_smc
from .errors import (ConfigError, DegenerateSupport, DegenerateWindow,
                     InsufficientReps, InvalidRatio, InvalidTwist,
                     SeriesNotConverged)
from .harness import (BarrierWindow, EfficiencyReport, ExperimentConfig,
                      RunRecord, emit, load_config, run_experiment, summarize)
from .model import (MarketTermStructure, OptionSpec, PathState, inv_norm_cdf,
                    step_gbm, step_truncated_chain, survival_prob_phi)
from .oracles import OraclePrice, double_barrier_closed_form, quadrature_price, vanilla_bs
from .potentials import (Continuous, Discrete, ImportanceDensity, PayoffTwist,
                         TransitionParticle, TruncatedChain,
                         drift_shift_proposal, terminal_payoff)
from .resampler import WeightedSupport, inverse_cdf_walk, ordered_uniforms, resample_rejected

__version__ = "0.1.0"

__all__ = [
    "BarrierWindow", "BridgeQuery", "ConfigError", "Continuous",
    "DegenerateSupport", "DegenerateWindow", "Discrete", "EfficiencyReport",
    "ExperimentConfig", "ImportanceDensity", "InsufficientReps", "InvalidRatio",
    "InvalidTwist", "MarketTermStructure", "OptionSpec", "OraclePrice",
    "PathState", "PayoffTwist", "PriceEstimate", "RunRecord",
    "SeriesNotConverged", "TransitionParticle", "TruncatedChain",
    "WeightedSupport", "double_barrier_closed_form", "drift_shift_proposal",
    "emit", "estimate_psi", "inv_norm_cdf", "inverse_cdf_walk", "load_config",
    "no_hit_prob", "no_hit_prob_double", "no_hit_prob_single",
    "ordered_uniforms", "price_knock_in", "price_mc", "price_smc",
    "quadrature_price", "resample_rejected", "run_experiment", "step_gbm",
    "step_truncated_chain", "summarize", "survival_prob_phi", "terminal_payoff",
    "vanilla_bs",
]
