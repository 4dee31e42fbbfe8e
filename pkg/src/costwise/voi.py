"""Value-of-information: the binary-informativeness approximation, an exact
enumeration oracle over discrete outcome spaces, and the gather/stop gate.

Both VOI computations minimize over terminal actions only; letting the gather
action compete inside its own value calculation would be circular.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import Belief, DecisionProblem, LikelihoodVector, bayes_update
from .errors import InconsistentModel

OUTCOME_ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InfoSource:
    """An information-gathering option: its cost, informativeness, and (for the
    exact oracle and simulation) a discrete outcome model p(z|s).

    ``outcome_model`` maps outcome labels to per-state emission probabilities,
    i.e. ``outcome_model[z][i] = p(z | state_i)``; rows over outcomes must sum
    to 1 per state.
    """

    name: str
    cost: float
    rho: float
    outcome_model: Mapping[str, tuple[float, ...]] | None = None

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.cost < 0:
            raise ValueError("cost must be non-negative")
        if self.outcome_model is not None:
            matrix = self._emissions()
            rows = matrix.sum(axis=1)
            if np.any(np.abs(rows - 1.0) > OUTCOME_ROW_TOL):
                raise InconsistentModel(f"outcome rows sum to {rows}, expected 1")

    def _emissions(self) -> np.ndarray:
        # (states x outcomes) matrix in outcome insertion order
        return np.column_stack([np.asarray(v, dtype=float) for v in self.outcome_model.values()])


def _current_and_perfect_cost(belief: Belief, problem: DecisionProblem) -> tuple[float, float]:
    terminal_rows = np.array(
        [problem.cost[problem.action_index(a.name)] for a in problem.terminal_actions]
    )
    per_action = terminal_rows @ belief.probs
    current = float(per_action.min())
    perfect = float(np.dot(belief.probs, terminal_rows.min(axis=0)))
    return current, perfect


def voi_approx(belief: Belief, problem: DecisionProblem, source: InfoSource) -> float:
    """rho * (cost of best terminal action now - cost under perfect information).

    The binary informativeness model: with probability rho the evidence fully
    reveals the state, otherwise it reveals nothing.
    """
    current, perfect = _current_and_perfect_cost(belief, problem)
    return source.rho * (current - perfect)


def voi_exact(
    belief: Belief,
    problem: DecisionProblem,
    source: InfoSource,
    likelihood_map: Mapping[str, LikelihoodVector] | None = None,
) -> float:
    """Exact expected reduction in best-terminal-action cost from observing the
    source, by full enumeration of its outcome alphabet.

    ``likelihood_map`` gives the per-outcome likelihood vectors used to update
    beliefs; it defaults to the source's own emission columns (the
    well-specified case). Outcomes with zero predictive probability are
    skipped. The result is non-negative up to rounding whenever the map is
    consistent with the outcome model.
    """
    if source.outcome_model is None:
        raise InconsistentModel(f"source {source.name!r} has no outcome model")
    emissions = source._emissions()  # (states x outcomes)
    outcomes = list(source.outcome_model.keys())
    current, _ = _current_and_perfect_cost(belief, problem)
    expected_after = 0.0
    for j, outcome in enumerate(outcomes):
        p_z = float(np.dot(belief.probs, emissions[:, j]))
        if p_z <= 0.0:
            continue
        if likelihood_map is not None:
            vector = likelihood_map[outcome]
        else:
            vector = LikelihoodVector(emissions[:, j])
        posterior = bayes_update(belief, vector)
        post_current, _ = _current_and_perfect_cost(posterior, problem)
        expected_after += p_z * post_current
    return current - expected_after


@dataclass(frozen=True)
class GateDecision:
    """Outcome of the information-gathering gate, with both gate legs recorded."""

    gather: bool
    max_disagreement: float | None
    voi: float
    source_cost: float
    disagreement_exceeded: bool
    voi_exceeds_cost: bool


def should_gather(
    panel,
    belief: Belief,
    problem: DecisionProblem,
    source: InfoSource,
    tau_d: float,
) -> GateDecision:
    """Gather iff max inter-provider disagreement exceeds tau_d AND the
    approximate VOI exceeds the source's cost."""
    voi = voi_approx(belief, problem, source)
    max_cv = panel.max_disagreement
    disagreement_exceeded = max_cv is not None and max_cv > tau_d
    voi_exceeds = voi > source.cost
    return GateDecision(
        gather=disagreement_exceeded and voi_exceeds,
        max_disagreement=max_cv,
        voi=voi,
        source_cost=source.cost,
        disagreement_exceeded=disagreement_exceeded,
        voi_exceeds_cost=voi_exceeds,
    )
