"""Decision problem model, Bayesian updating, and expected-cost action selection.

All types are immutable value objects; every operation is a pure function, so
instances can be shared freely across threads or workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import (
    DegenerateCosts,
    DimensionMismatch,
    UnknownAction,
    UnknownState,
    ZeroEvidence,
)

PROB_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Action:
    name: str
    terminal: bool = True


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """States, actions, costs, prior, and the per-gather information cost.

    ``cost`` is indexed (action, state). Costs are plain non-negative numbers
    in abstract currency units; correct decisions are normalized to zero cost
    rather than carrying negative "value" entries.
    """

    states: tuple[str, ...]
    actions: tuple[Action, ...]
    cost: np.ndarray
    prior: np.ndarray
    info_cost: float = 0.0
    state_descriptions: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "cost", _frozen_array(self.cost))
        object.__setattr__(self, "prior", _frozen_array(self.prior))
        if not self.states:
            raise ValueError("state list is empty")
        if not self.actions:
            raise ValueError("action list is empty")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state ids")
        names = [a.name for a in self.actions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate action ids")
        if not any(a.terminal for a in self.actions):
            raise ValueError("at least one action must be terminal")
        if self.cost.shape != (len(self.actions), len(self.states)):
            raise DimensionMismatch(
                f"cost matrix shape {self.cost.shape} != "
                f"({len(self.actions)}, {len(self.states)})"
            )
        if not np.isfinite(self.cost).all() or (self.cost < 0).any():
            raise ValueError("costs must be finite and non-negative")
        _check_distribution(self.prior, len(self.states), "prior")
        if self.info_cost < 0:
            raise ValueError("info_cost must be non-negative")
        if self.state_descriptions:
            if len(self.state_descriptions) != len(self.states):
                raise DimensionMismatch("state_descriptions length != states length")
        else:
            object.__setattr__(self, "state_descriptions", self.states)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(state) from None

    def action_index(self, action: str) -> int:
        for i, a in enumerate(self.actions):
            if a.name == action:
                return i
        raise UnknownAction(action)

    @property
    def terminal_actions(self) -> tuple[Action, ...]:
        return tuple(a for a in self.actions if a.terminal)

    def describe(self, state: str) -> str:
        return self.state_descriptions[self.state_index(state)]


def _check_distribution(probs: np.ndarray, n: int, label: str) -> None:
    if probs.shape != (n,):
        raise DimensionMismatch(f"{label} has shape {probs.shape}, expected ({n},)")
    if (probs < 0).any() or (probs > 1 + PROB_TOL).any():
        raise ValueError(f"{label} entries must lie in [0, 1]")
    if abs(float(probs.sum()) - 1.0) > PROB_TOL:
        raise ValueError(f"{label} sums to {probs.sum()!r}, expected 1 within {PROB_TOL}")


@dataclass(frozen=True, eq=False)
class Belief:
    """Normalized distribution over states, aligned with DecisionProblem.states."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen_array(self.probs))
        if self.probs.ndim != 1 or len(self.probs) == 0:
            raise DimensionMismatch("belief must be a non-empty 1-D vector")
        _check_distribution(self.probs, len(self.probs), "belief")

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True, eq=False)
class LikelihoodVector:
    """Per-state likelihood estimates in [0, 1].

    Not a distribution: entries need not sum to 1, and only ratios matter for
    belief updates.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.values.ndim != 1 or len(self.values) == 0:
            raise DimensionMismatch("likelihood vector must be 1-D and non-empty")
        if (self.values < 0).any() or (self.values > 1 + PROB_TOL).any():
            raise ValueError("likelihood entries must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.values)


def bayes_update(belief: Belief, likelihoods: LikelihoodVector) -> Belief:
    """Condition a belief on evidence with the given per-state likelihoods.

    Raises ZeroEvidence when the likelihoods vanish everywhere the belief has
    mass: that signals contradictory evidence and is surfaced rather than
    silently reset to uniform.
    """
    if len(likelihoods) != len(belief):
        raise DimensionMismatch(
            f"likelihood length {len(likelihoods)} != belief length {len(belief)}"
        )
    unnorm = belief.probs * likelihoods.values
    z = float(unnorm.sum())
    if z <= 0.0:
        raise ZeroEvidence("all likelihoods vanish on the belief's support")
    return Belief(unnorm / z)


def expected_cost(belief: Belief, problem: DecisionProblem, action: str) -> float:
    """Expected cost of taking ``action`` under ``belief``: sum_s b(s) C(a, s)."""
    if len(belief) != len(problem.states):
        raise DimensionMismatch("belief length != number of states")
    row = problem.cost[problem.action_index(action)]
    return float(np.dot(belief.probs, row))


def select_action(belief: Belief, problem: DecisionProblem) -> tuple[str, float]:
    """Pick the terminal action minimizing expected cost.

    Ties break by lowest action index so runs are reproducible.
    """
    best_name = None
    best_cost = math.inf
    for a in problem.actions:
        if not a.terminal:
            continue
        c = expected_cost(belief, problem, a.name)
        if c < best_cost:
            best_name = a.name
            best_cost = c
    return best_name, best_cost


def binary_interview_threshold(problem: DecisionProblem) -> float:
    """Closed-form indifference probability for 2-state, 2-terminal-action problems.

    Returns the probability of the second state above which the second terminal
    action has lower expected cost than the first. Depends on all four cost
    entries.
    """
    if len(problem.states) != 2:
        raise DimensionMismatch("threshold is defined for exactly 2 states")
    terminals = problem.terminal_actions
    if len(terminals) != 2:
        raise DimensionMismatch("threshold is defined for exactly 2 terminal actions")
    i1 = problem.action_index(terminals[0].name)
    i2 = problem.action_index(terminals[1].name)
    c = problem.cost
    numer = c[i2, 0] - c[i1, 0]
    denom = (c[i1, 1] - c[i2, 1]) + (c[i2, 0] - c[i1, 0])
    if denom == 0:
        raise DegenerateCosts("cost matrix makes both actions identical")
    return float(numer / denom)


def entropy(belief: Belief) -> float:
    """Shannon entropy of a belief, in bits; 0*log(0) counts as 0."""
    p = belief.probs
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())
