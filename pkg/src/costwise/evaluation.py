"""Evaluation metrics, baseline and ablation runners, statistical tests, and
sensitivity sweeps over experiment traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import DecisionProblem
from .datagen import Candidate, resume_observation, sample_population
from .elicitation import ProviderConfig, call_rng, discriminative_score
from .errors import LengthMismatch, NoEligibleGroups
from .orchestrator import EpisodeTrace, run_population
from .voi import InfoSource

MIN_GROUP_SIZE = 30

BASELINE_KINDS = ("fixed_threshold", "calibrated_threshold", "ensemble_vote", "ensemble_average")
ABLATION_KINDS = (
    "single_provider",
    "batch_inference",
    "always_screen",
    "never_screen",
    "no_disagreement",
    "uniform_prior",
)


@dataclass(frozen=True)
class MetricsReport:
    total_cost: float
    accuracy: float
    screens: int
    parity_gap_gender: float | None
    parity_gap_ethnicity: float | None
    parity_gap_overall: float | None
    intersectional_gaps: Mapping[str, float]
    ece: float | None
    calibration_bins: tuple[dict, ...]
    cost_ci: tuple[float, float]
    per_group_selection_rates: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "total_cost": self.total_cost,
            "accuracy": self.accuracy,
            "screens": self.screens,
            "parity_gap_gender": self.parity_gap_gender,
            "parity_gap_ethnicity": self.parity_gap_ethnicity,
            "parity_gap_overall": self.parity_gap_overall,
            "intersectional_gaps": dict(self.intersectional_gaps),
            "ece": self.ece,
            "calibration_bins": list(self.calibration_bins),
            "cost_ci": list(self.cost_ci),
            "per_group_selection_rates": dict(self.per_group_selection_rates),
        }


# ---------------------------------------------------------------------------
# Core metrics
# ---------------------------------------------------------------------------


def realized_costs(traces: Sequence[EpisodeTrace], problem: DecisionProblem) -> np.ndarray:
    """Per-episode cost recomputed from the cost matrix and screen count."""
    costs = np.empty(len(traces))
    for i, t in enumerate(traces):
        a = problem.action_index(t.terminal_action)
        s = problem.state_index(t.true_state)
        costs[i] = problem.cost[a, s] + t.screens_taken * problem.info_cost
    return costs


def total_cost(traces: Sequence[EpisodeTrace], problem: DecisionProblem) -> float:
    return float(realized_costs(traces, problem).sum())


def decision_accuracy(
    traces: Sequence[EpisodeTrace], optimal: Mapping[str, str]
) -> float:
    """Fraction of episodes matching the per-state reference disposition.

    ``optimal`` maps each true state to a terminal action name or the literal
    "screen", which counts as matched when a screen occurred (any terminal
    action afterwards is acceptable).
    """
    if not traces:
        return 0.0
    hits = 0
    for t in traces:
        want = optimal[t.true_state]
        if want == "screen":
            hits += t.screens_taken > 0
        else:
            hits += t.terminal_action == want
    return hits / len(traces)


def selection_rates(
    traces: Sequence[EpisodeTrace],
    attribute,
    select_action_name: str = "interview",
    min_group: int = MIN_GROUP_SIZE,
) -> dict[str, float]:
    """Selection (interview) rate per demographic group, dropping groups below
    the minimum size. ``attribute`` is 'gender', 'ethnicity', or a tuple of
    both for intersectional groups."""
    groups: dict[str, list[int]] = {}
    for t in traces:
        if isinstance(attribute, (tuple, list)):
            label = " ".join(getattr(t, attr) for attr in attribute)
        else:
            label = getattr(t, attribute)
        groups.setdefault(label, []).append(t.terminal_action == select_action_name)
    return {
        label: float(np.mean(picks))
        for label, picks in groups.items()
        if len(picks) >= min_group
    }


def parity_gap(
    traces: Sequence[EpisodeTrace],
    attribute,
    min_group: int = MIN_GROUP_SIZE,
) -> tuple[float, dict[str, float]]:
    """Max pairwise absolute difference in interview rates, in percentage
    points, over groups meeting the minimum size."""
    rates = selection_rates(traces, attribute, min_group=min_group)
    if len(rates) < 2:
        raise NoEligibleGroups(
            f"need >= 2 groups with >= {min_group} members for {attribute!r}"
        )
    values = list(rates.values())
    gap = (max(values) - min(values)) * 100.0
    return gap, rates


def expected_calibration_error(
    traces: Sequence[EpisodeTrace],
    problem: DecisionProblem,
    bins: int = 10,
) -> tuple[float, list[dict]]:
    """ECE over max-posterior confidence in equal-width bins; empty bins
    contribute zero. Requires traces that carry beliefs."""
    confidences = []
    correct = []
    for t in traces:
        if not t.beliefs:
            raise ValueError(f"trace {t.candidate_id} carries no beliefs")
        belief = np.asarray(t.final_belief)
        confidences.append(float(belief.max()))
        predicted = problem.states[int(belief.argmax())]
        correct.append(predicted == t.true_state)
    confidences = np.asarray(confidences)
    correct = np.asarray(correct, dtype=float)
    n = len(traces)
    edges = np.linspace(0.0, 1.0, bins + 1)
    ece = 0.0
    bin_rows = []
    for j in range(bins):
        lo, hi = edges[j], edges[j + 1]
        mask = (confidences >= lo) & ((confidences < hi) if j < bins - 1 else (confidences <= hi))
        count = int(mask.sum())
        if count == 0:
            bin_rows.append({"bin": [float(lo), float(hi)], "confidence": None, "accuracy": None, "count": 0})
            continue
        avg_conf = float(confidences[mask].mean())
        acc = float(correct[mask].mean())
        ece += count / n * abs(avg_conf - acc)
        bin_rows.append(
            {"bin": [float(lo), float(hi)], "confidence": avg_conf, "accuracy": acc, "count": count}
        )
    return float(ece), bin_rows


def bootstrap_cost_ci(
    traces: Sequence[EpisodeTrace],
    problem: DecisionProblem,
    iterations: int = 10_000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for the population total cost."""
    if not traces:
        raise ValueError("bootstrap needs at least one trace")
    costs = realized_costs(traces, problem)
    rng = np.random.default_rng(seed)
    n = len(costs)
    totals = np.empty(iterations)
    chunk = 2000
    done = 0
    while done < iterations:
        size = min(chunk, iterations - done)
        idx = rng.integers(0, n, size=(size, n))
        totals[done : done + size] = costs[idx].sum(axis=1)
        done += size
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(totals, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def paired_permutation_test(
    costs_a: Sequence[float],
    costs_b: Sequence[float],
    iterations: int = 10_000,
    seed: int = 0,
) -> float:
    """Two-sided sign-flip permutation p-value for paired cost differences.

    The identity permutation counts toward the numerator and denominator, so
    p lies in (0, 1]; identical inputs give exactly 1.0.
    """
    a = np.asarray(costs_a, dtype=float)
    b = np.asarray(costs_b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"paired vectors differ in length: {a.shape} vs {b.shape}")
    d = a - b
    observed = abs(float(d.sum()))
    rng = np.random.default_rng(seed)
    n = len(d)
    exceed = 0
    chunk = 2000
    done = 0
    while done < iterations:
        size = min(chunk, iterations - done)
        signs = rng.integers(0, 2, size=(size, n)) * 2 - 1
        stats = np.abs((signs * d).sum(axis=1))
        exceed += int((stats >= observed - 1e-12).sum())
        done += size
    return (1 + exceed) / (iterations + 1)


def metrics_report(
    traces: Sequence[EpisodeTrace],
    problem: DecisionProblem,
    optimal: Mapping[str, str],
    *,
    bins: int = 10,
    bootstrap_iterations: int = 10_000,
    seed: int = 0,
) -> MetricsReport:
    has_beliefs = all(t.beliefs for t in traces)
    ece, bin_rows = (None, []) if not has_beliefs else expected_calibration_error(traces, problem, bins)

    def safe_gap(attribute):
        try:
            return parity_gap(traces, attribute)
        except NoEligibleGroups:
            return None, {}

    gender_gap, gender_rates = safe_gap("gender")
    eth_gap, eth_rates = safe_gap("ethnicity")
    all_rates = {**{f"gender:{k}": v for k, v in gender_rates.items()},
                 **{f"ethnicity:{k}": v for k, v in eth_rates.items()}}
    overall = None
    if all_rates:
        vals = list(all_rates.values())
        overall = (max(vals) - min(vals)) * 100.0
    try:
        _, inter_rates = parity_gap(traces, ("ethnicity", "gender"))
        inter = {
            f"{a} vs {b}": abs(inter_rates[a] - inter_rates[b]) * 100.0
            for i, a in enumerate(sorted(inter_rates))
            for b in sorted(inter_rates)[i + 1 :]
        }
    except NoEligibleGroups:
        inter = {}
    return MetricsReport(
        total_cost=total_cost(traces, problem),
        accuracy=decision_accuracy(traces, optimal),
        screens=int(sum(t.screens_taken for t in traces)),
        parity_gap_gender=gender_gap,
        parity_gap_ethnicity=eth_gap,
        parity_gap_overall=overall,
        intersectional_gaps=inter,
        ece=ece,
        calibration_bins=tuple(bin_rows),
        cost_ci=bootstrap_cost_ci(traces, problem, bootstrap_iterations, seed=seed),
        per_group_selection_rates=all_rates,
    )


# ---------------------------------------------------------------------------
# Baselines (discriminative scoring + thresholds / votes)
# ---------------------------------------------------------------------------


def _quality_scores(
    candidates: Sequence[Candidate],
    providers: Sequence[ProviderConfig],
    problem: DecisionProblem,
) -> np.ndarray:
    """(candidate x provider) matrix of single 0-10 quality scores."""
    scores = np.empty((len(candidates), len(providers)))
    for i, cand in enumerate(candidates):
        obs = resume_observation(cand, problem)
        for j, provider in enumerate(providers):
            rng = call_rng(provider.seed, cand.id, provider.name, "overall", "resume", 0)
            scores[i, j] = discriminative_score(
                obs.features, obs.features["target_state"], provider, rng, states=problem.states
            )
    return scores


def _threshold_traces(
    candidates: Sequence[Candidate],
    decisions: Sequence[bool],
    problem: DecisionProblem,
) -> tuple[EpisodeTrace, ...]:
    traces = []
    for cand, interview in zip(candidates, decisions):
        action = "interview" if interview else "reject"
        s = problem.state_index(cand.true_state)
        traces.append(
            EpisodeTrace(
                candidate_id=cand.id,
                true_state=cand.true_state,
                gender=cand.gender,
                ethnicity=cand.ethnicity,
                observations=({"kind": "resume", "candidate_id": cand.id},),
                panels=(),
                beliefs=(),
                entropies=(),
                voi_checks=(),
                screens_taken=0,
                terminal_action=action,
                terminal_expected_cost=float("nan"),
                realized_cost=float(problem.cost[problem.action_index(action), s]),
                fallback_count=0,
            )
        )
    return tuple(traces)


def _calibrate_threshold(
    providers: Sequence[ProviderConfig],
    problem: DecisionProblem,
    validation_seed: int,
    validation_n: int,
    aggregate: str,
    grid: np.ndarray,
) -> float:
    candidates = sample_population(validation_n, problem, validation_seed)
    scores = _quality_scores(candidates, providers, problem)
    pooled = scores[:, 0] if aggregate == "first" else scores.mean(axis=1)
    best_tau, best_cost = float(grid[0]), math.inf
    for tau in grid:
        traces = _threshold_traces(candidates, pooled >= tau, problem)
        cost = total_cost(traces, problem)
        if cost < best_cost:
            best_cost, best_tau = cost, float(tau)
    return best_tau


def run_baseline(
    kind: str,
    params: Mapping,
    candidates: Sequence[Candidate],
    providers: Sequence[ProviderConfig],
    problem: DecisionProblem,
) -> tuple[EpisodeTrace, ...]:
    """Discriminative-mode baselines: single scores per resume, decisions by
    fixed/calibrated threshold, majority vote, or mean-score threshold."""
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline: {kind!r}")
    params = dict(params or {})
    if kind == "fixed_threshold":
        tau = float(params.get("threshold", 7.0))
        scores = _quality_scores(candidates, providers[:1], problem)
        return _threshold_traces(candidates, scores[:, 0] >= tau, problem)
    if kind == "calibrated_threshold":
        grid = np.round(np.arange(5.0, 8.0001, 0.1), 2)
        tau = _calibrate_threshold(
            providers[:1],
            problem,
            int(params.get("validation_seed", 10_007)),
            int(params.get("validation_n", 200)),
            "first",
            grid,
        )
        scores = _quality_scores(candidates, providers[:1], problem)
        return _threshold_traces(candidates, scores[:, 0] >= tau, problem)
    if kind == "ensemble_vote":
        vote_tau = float(params.get("vote_threshold", 7.0))
        scores = _quality_scores(candidates, providers, problem)
        votes = (scores >= vote_tau).sum(axis=1)
        # strict majority required; ties default to reject (conservative)
        needed = len(providers) // 2 + 1
        return _threshold_traces(candidates, votes >= needed, problem)
    # ensemble_average
    tau = float(params.get("threshold", 6.5))
    scores = _quality_scores(candidates, providers, problem)
    return _threshold_traces(candidates, scores.mean(axis=1) >= tau, problem)


# ---------------------------------------------------------------------------
# Ablations (full pipeline with exactly one component replaced)
# ---------------------------------------------------------------------------


def run_ablation(
    kind: str,
    candidates: Sequence[Candidate],
    providers: Sequence[ProviderConfig],
    problem: DecisionProblem,
    source: InfoSource,
    tau_d: float,
    *,
    parallelism: int = 1,
) -> tuple[EpisodeTrace, ...]:
    if kind not in ABLATION_KINDS:
        raise ValueError(f"unknown ablation: {kind!r}")
    gate = "default"
    update_mode = "sequential"
    use_providers = providers
    use_problem = problem
    if kind == "single_provider":
        use_providers = providers[:1]
        gate = "voi_only"  # a one-model panel has no disagreement signal
    elif kind == "batch_inference":
        update_mode = "batch"
    elif kind == "always_screen":
        gate = "always"
    elif kind == "never_screen":
        gate = "never"
    elif kind == "no_disagreement":
        gate = "voi_only"
    elif kind == "uniform_prior":
        k = len(problem.states)
        use_problem = DecisionProblem(
            states=problem.states,
            actions=problem.actions,
            cost=problem.cost,
            prior=np.full(k, 1.0 / k),
            info_cost=problem.info_cost,
            state_descriptions=problem.state_descriptions,
        )
    result = run_population(
        candidates,
        use_problem,
        use_providers,
        source,
        tau_d,
        gate=gate,
        update_mode=update_mode,
        parallelism=parallelism,
    )
    return result.traces


# ---------------------------------------------------------------------------
# Sensitivity sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("cost_scale", "tau_d", "rho", "prior")


def sensitivity_sweep(
    parameter: str,
    candidates: Sequence[Candidate],
    providers: Sequence[ProviderConfig],
    problem: DecisionProblem,
    source: InfoSource,
    tau_d: float,
    *,
    cost_scale_delta: float = 0.2,
    cost_scale_draws: int = 10,
    tau_d_grid: Sequence[float] = (0.10, 0.15, 0.20),
    rho_grid: Sequence[float] = (0.5, 0.7, 0.9),
    prior_draws: int = 10,
    prior_concentration: float = 1.0,
    seed: int = 0,
    parallelism: int = 1,
) -> list[dict]:
    """Re-evaluate decisions under perturbed settings. Elicited likelihoods are
    deterministic given provider seeds, so reruns hold them fixed; only gates,
    costs, and priors move. Each row reports the setting, total cost, and the
    fraction of candidates whose terminal action flipped versus the unperturbed
    run."""
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter: {parameter!r}")

    def run(problem_, source_, tau_d_):
        res = run_population(
            candidates, problem_, providers, source_, tau_d_, parallelism=parallelism
        )
        return res.traces

    base = run(problem, source, tau_d)
    base_actions = [t.terminal_action for t in base]

    def row(setting, traces):
        flips = float(
            np.mean([a != t.terminal_action for a, t in zip(base_actions, traces)])
        )
        return {
            "parameter": parameter,
            "setting": setting,
            "total_cost": total_cost(traces, problem),
            "flip_fraction": flips,
        }

    rows = []
    rng = np.random.default_rng(seed)
    if parameter == "cost_scale":
        for k in range(cost_scale_draws):
            factors = rng.uniform(1.0 - cost_scale_delta, 1.0 + cost_scale_delta, size=problem.cost.shape)
            perturbed = DecisionProblem(
                states=problem.states,
                actions=problem.actions,
                cost=problem.cost * factors,
                prior=problem.prior,
                info_cost=problem.info_cost,
                state_descriptions=problem.state_descriptions,
            )
            rows.append(row(f"draw-{k:02d}", run(perturbed, source, tau_d)))
    elif parameter == "tau_d":
        for v in tau_d_grid:
            rows.append(row(f"tau_d={v:g}", run(problem, source, float(v))))
    elif parameter == "rho":
        for v in rho_grid:
            varied = InfoSource(
                name=source.name, cost=source.cost, rho=float(v), outcome_model=source.outcome_model
            )
            rows.append(row(f"rho={v:g}", run(problem, varied, tau_d)))
    else:  # prior
        # Dirichlet concentrated on the configured prior; concentration 1.0
        # matches alpha = 100 * prior (e.g. [65, 25, 8, 2]).
        alpha = np.asarray(problem.prior) * 100.0 * prior_concentration
        for k in range(prior_draws):
            draw = rng.dirichlet(alpha)
            perturbed = DecisionProblem(
                states=problem.states,
                actions=problem.actions,
                cost=problem.cost,
                prior=draw / draw.sum(),
                info_cost=problem.info_cost,
                state_descriptions=problem.state_descriptions,
            )
            rows.append(row(f"draw-{k:02d}", run(perturbed, source, tau_d)))
    return rows
