"""End-to-end episode driver: elicit -> aggregate -> update -> gate ->
(optionally) screen -> terminal action, with a full audit trace per candidate.

Episodes are pure functions of (candidate, problem, providers, source, gate):
all randomness is either pre-sampled into the candidate or derived from
per-provider seeds, so batches are schedule-independent at any parallelism.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import Belief, DecisionProblem, LikelihoodVector, bayes_update, entropy, select_action
from .datagen import Candidate, resume_observation, screen_observation
from .elicitation import Observation, ProviderConfig, elicit
from .ensemble import LikelihoodPanel, build_panel
from .errors import InsufficientProviders, ZeroEvidence
from .voi import GateDecision, InfoSource, should_gather, voi_approx

GATE_POLICIES = ("default", "voi_only", "always", "never")


@dataclass(frozen=True)
class EpisodeTrace:
    candidate_id: str
    true_state: str
    gender: str
    ethnicity: str
    observations: tuple[dict, ...]
    panels: tuple[dict, ...]
    beliefs: tuple[tuple[float, ...], ...]
    entropies: tuple[float, ...]
    voi_checks: tuple[dict, ...]
    screens_taken: int
    terminal_action: str
    terminal_expected_cost: float
    realized_cost: float
    fallback_count: int
    notes: tuple[str, ...] = ()

    @property
    def final_belief(self) -> tuple[float, ...]:
        return self.beliefs[-1]

    def to_record(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "true_state": self.true_state,
            "gender": self.gender,
            "ethnicity": self.ethnicity,
            "observations": list(self.observations),
            "panels": list(self.panels),
            "beliefs": [list(b) for b in self.beliefs],
            "entropies": list(self.entropies),
            "voi_checks": list(self.voi_checks),
            "screens_taken": self.screens_taken,
            "terminal_action": self.terminal_action,
            "terminal_expected_cost": self.terminal_expected_cost,
            "realized_cost": self.realized_cost,
            "fallback_count": self.fallback_count,
            "notes": list(self.notes),
        }

    @classmethod
    def from_record(cls, record: dict) -> "EpisodeTrace":
        return cls(
            candidate_id=record["candidate_id"],
            true_state=record["true_state"],
            gender=record["gender"],
            ethnicity=record["ethnicity"],
            observations=tuple(record["observations"]),
            panels=tuple(record["panels"]),
            beliefs=tuple(tuple(b) for b in record["beliefs"]),
            entropies=tuple(record["entropies"]),
            voi_checks=tuple(record["voi_checks"]),
            screens_taken=record["screens_taken"],
            terminal_action=record["terminal_action"],
            terminal_expected_cost=record["terminal_expected_cost"],
            realized_cost=record["realized_cost"],
            fallback_count=record["fallback_count"],
            notes=tuple(record.get("notes", ())),
        )


@dataclass(frozen=True)
class PopulationResult:
    traces: tuple[EpisodeTrace, ...]
    failures: tuple[tuple[str, str], ...] = ()


def _observation_summary(obs: Observation) -> dict:
    digest = hashlib.sha256(obs.text.encode()).hexdigest()[:12]
    return {"kind": obs.kind, "candidate_id": obs.candidate_id, "text_sha256": digest}


def _panel_summary(panel: LikelihoodPanel) -> dict:
    return {
        "providers": list(panel.providers),
        "per_provider": panel.per_provider.tolist(),
        "aggregated": panel.aggregated.values.tolist(),
        "disagreement": None if panel.disagreement is None else panel.disagreement.tolist(),
        "max_disagreement": panel.max_disagreement,
    }


def _gate_summary(gate: GateDecision, policy: str) -> dict:
    return {
        "policy": policy,
        "gather": gate.gather,
        "max_disagreement": gate.max_disagreement,
        "voi": gate.voi,
        "source_cost": gate.source_cost,
        "disagreement_exceeded": gate.disagreement_exceeded,
        "voi_exceeds_cost": gate.voi_exceeds_cost,
    }


def elicit_panel(
    obs: Observation,
    problem: DecisionProblem,
    providers: Sequence[ProviderConfig],
) -> tuple[LikelihoodPanel, int]:
    """Elicit all providers for one observation; returns the aggregated panel
    and the number of fallback estimates used."""
    rows = []
    fallbacks = 0
    for provider in providers:
        estimates = elicit(obs, problem, provider)
        rows.append([e.normalized for e in estimates])
        fallbacks += sum(e.fallback_used for e in estimates)
    panel = build_panel(rows, providers=tuple(p.name for p in providers))
    return panel, fallbacks


def evaluate_gate(
    policy: str,
    panel: LikelihoodPanel,
    belief: Belief,
    problem: DecisionProblem,
    source: InfoSource | None,
    tau_d: float,
) -> GateDecision:
    """Apply one of the gathering policies; VOI is evaluated and recorded even
    when the policy ignores it."""
    if source is None:
        return GateDecision(False, panel.max_disagreement, 0.0, 0.0, False, False)
    if policy == "default":
        if panel.max_disagreement is None:
            raise InsufficientProviders(
                "disagreement-gated policy needs at least 2 providers"
            )
        return should_gather(panel, belief, problem, source, tau_d)
    voi = voi_approx(belief, problem, source)
    if policy == "voi_only":
        gather = voi > source.cost
        return GateDecision(gather, panel.max_disagreement, voi, source.cost, False, gather)
    if policy == "always":
        return GateDecision(True, panel.max_disagreement, voi, source.cost, True, True)
    if policy == "never":
        return GateDecision(False, panel.max_disagreement, voi, source.cost, False, False)
    raise ValueError(f"unknown gate policy: {policy!r}")


def run_episode(
    candidate: Candidate,
    problem: DecisionProblem,
    providers: Sequence[ProviderConfig],
    source: InfoSource | None,
    tau_d: float,
    *,
    gate: str = "default",
    update_mode: str = "sequential",
) -> EpisodeTrace:
    """Run one candidate through the full decision loop.

    ``gate`` selects the information-gathering policy; ``update_mode`` is
    "sequential" (one Bayes update per observation) or "batch" (all evidence
    panels averaged into a single update from the prior, for the
    batch-inference ablation). At most one screen is gathered.
    """
    if not providers:
        raise ValueError("at least one provider is required")
    if gate not in GATE_POLICIES:
        raise ValueError(f"unknown gate policy: {gate!r}")
    if update_mode not in ("sequential", "batch"):
        raise ValueError(f"unknown update mode: {update_mode!r}")

    notes: list[str] = []
    observations = []
    panel_summaries = []
    beliefs = []
    entropies = []
    voi_checks = []
    fallbacks = 0

    belief = Belief(problem.prior)
    obs = resume_observation(candidate, problem)
    resume_panel, n_fb = elicit_panel(obs, problem, providers)
    fallbacks += n_fb
    observations.append(_observation_summary(obs))
    panel_summaries.append(_panel_summary(resume_panel))
    try:
        belief = bayes_update(belief, resume_panel.aggregated)
    except ZeroEvidence:
        notes.append("zero-evidence resume panel; belief kept at prior")
    beliefs.append(tuple(belief.probs.tolist()))
    entropies.append(entropy(belief))

    decision = evaluate_gate(gate, resume_panel, belief, problem, source, tau_d)
    voi_checks.append(_gate_summary(decision, gate))

    screens = 0
    if decision.gather:
        screen_obs = screen_observation(candidate, problem)
        screen_panel, n_fb = elicit_panel(screen_obs, problem, providers)
        fallbacks += n_fb
        screens = 1
        observations.append(_observation_summary(screen_obs))
        panel_summaries.append(_panel_summary(screen_panel))
        try:
            if update_mode == "sequential":
                belief = bayes_update(belief, screen_panel.aggregated)
            else:
                combined = (resume_panel.aggregated.values + screen_panel.aggregated.values) / 2.0
                belief = bayes_update(Belief(problem.prior), LikelihoodVector(combined))
        except ZeroEvidence:
            notes.append("zero-evidence screen panel; belief kept from resume")
        beliefs.append(tuple(belief.probs.tolist()))
        entropies.append(entropy(belief))

    action, exp_cost = select_action(belief, problem)
    true_idx = problem.state_index(candidate.true_state)
    realized = (
        float(problem.cost[problem.action_index(action), true_idx])
        + screens * problem.info_cost
    )
    return EpisodeTrace(
        candidate_id=candidate.id,
        true_state=candidate.true_state,
        gender=candidate.gender,
        ethnicity=candidate.ethnicity,
        observations=tuple(observations),
        panels=tuple(panel_summaries),
        beliefs=tuple(beliefs),
        entropies=tuple(entropies),
        voi_checks=tuple(voi_checks),
        screens_taken=screens,
        terminal_action=action,
        terminal_expected_cost=exp_cost,
        realized_cost=realized,
        fallback_count=fallbacks,
        notes=tuple(notes),
    )


def run_population(
    candidates: Sequence[Candidate],
    problem: DecisionProblem,
    providers: Sequence[ProviderConfig],
    source: InfoSource | None,
    tau_d: float,
    *,
    gate: str = "default",
    update_mode: str = "sequential",
    parallelism: int = 1,
) -> PopulationResult:
    """Run every candidate; traces come back in candidate order regardless of
    the worker count. Per-episode failures are collected, not raised."""

    def one(candidate: Candidate):
        return run_episode(
            candidate, problem, providers, source, tau_d, gate=gate, update_mode=update_mode
        )

    results: list[EpisodeTrace | None] = [None] * len(candidates)
    failures: list[tuple[str, str]] = []
    if parallelism <= 1:
        for i, cand in enumerate(candidates):
            try:
                results[i] = one(cand)
            except Exception as exc:  # noqa: BLE001 - failures are aggregated
                failures.append((cand.id, f"{type(exc).__name__}: {exc}"))
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(one, cand) for cand in candidates]
            for i, (cand, fut) in enumerate(zip(candidates, futures)):
                try:
                    results[i] = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures.append((cand.id, f"{type(exc).__name__}: {exc}"))
    traces = tuple(t for t in results if t is not None)
    return PopulationResult(traces=traces, failures=tuple(failures))


def write_traces(path, traces: Iterable[EpisodeTrace]) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for trace in traces:
            fh.write(json.dumps(trace.to_record(), sort_keys=True) + "\n")


def read_traces(path) -> list[EpisodeTrace]:
    path = Path(path)
    traces = []
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                traces.append(EpisodeTrace.from_record(json.loads(line)))
    return traces
