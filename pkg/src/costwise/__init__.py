"""costwise: cost-aware sequential screening decisions built from an ensemble
of generative scorers treated as approximate likelihood functions."""

from .core import (
    Action,
    Belief,
    DecisionProblem,
    LikelihoodVector,
    bayes_update,
    binary_interview_threshold,
    entropy,
    expected_cost,
    select_action,
)
from .elicitation import (
    Observation,
    ProviderConfig,
    RawEstimate,
    build_contrastive_prompt,
    elicit,
    parse_score,
    simulate_score,
)
from .ensemble import LikelihoodPanel, aggregate_median, build_panel, disagreement_cv
from .orchestrator import EpisodeTrace, PopulationResult, run_episode, run_population
from .voi import GateDecision, InfoSource, should_gather, voi_approx, voi_exact

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Belief",
    "DecisionProblem",
    "LikelihoodVector",
    "bayes_update",
    "binary_interview_threshold",
    "entropy",
    "expected_cost",
    "select_action",
    "Observation",
    "ProviderConfig",
    "RawEstimate",
    "build_contrastive_prompt",
    "elicit",
    "parse_score",
    "simulate_score",
    "LikelihoodPanel",
    "aggregate_median",
    "build_panel",
    "disagreement_cv",
    "EpisodeTrace",
    "PopulationResult",
    "run_episode",
    "run_population",
    "GateDecision",
    "InfoSource",
    "should_gather",
    "voi_approx",
    "voi_exact",
    "__version__",
]
