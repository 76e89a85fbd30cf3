"""Bayesian inference for sample- and population-level causal estimands.

The model is a bivariate normal for the potential-outcome pair given a
scalar confounder.  A Metropolis-in-Gibbs sampler draws parameters and
missing counterfactuals jointly; estimand extractors then read off the
individual and sample average effects (from the counterfactuals) or the
conditional and population average effects (from the parameters alone).
"""

from .dgp import (
    CompleteData,
    CompleteRecord,
    DgpConfig,
    ObservedData,
    ObservedRecord,
    TruthRecord,
    generate_complete,
    load_observed,
    mask,
    true_estimands,
)
from .dists import RngState
from .model import ParamVector, log_joint_posterior, log_prior
from .sampler import PosteriorDraws, SamplerConfig, run_chain, run_chains
from .estimands import (
    EstimandDraws,
    cate_draws,
    ite_draws,
    pate_bb,
    pate_closed,
    pate_ecdf,
    pate_mc,
    sate_draws,
)
from .diagnostics import Summary, ess, rhat, summarize
from .coverage import CoverageReport, coverage_study

__version__ = "0.1.0"

__all__ = [
    "CompleteData", "CompleteRecord", "DgpConfig", "ObservedData", "ObservedRecord", "TruthRecord",
    "generate_complete", "load_observed", "mask", "true_estimands",
    "RngState", "ParamVector", "log_joint_posterior", "log_prior",
    "PosteriorDraws", "SamplerConfig", "run_chain", "run_chains",
    "EstimandDraws", "cate_draws", "ite_draws", "pate_bb", "pate_closed", "pate_ecdf", "pate_mc", "sate_draws",
    "Summary", "ess", "rhat", "summarize", "CoverageReport", "coverage_study",
]
