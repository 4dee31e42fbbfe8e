"""Turning (observation, hypothesized state) pairs into raw likelihood estimates.

Providers answer "assume the candidate is at level S; how typical is this
evidence?" on a 0-10 scale. Two transports exist: a remote chat-completion
style HTTP adapter and a deterministic simulated adapter with injectable
bias/noise models. Per-call RNG streams derive from
(seed, candidate, provider, state, kind, attempt), so the M x K elicitations
for one observation can run concurrently without changing results.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import httpx

from .core import DecisionProblem
from .errors import ProviderUnavailable, Unparseable

# Simulated typicality curve: score at the effective target level, exponential
# decay per unit of level distance, and per-hypothesis floors keeping far
# states non-zero before noise. The floors are graded by hypothesis level: a
# weak resume is still conceivable for a strong candidate (some strong people
# write careless resumes), while a strong resume is implausible for someone
# without the underlying record, so scorers never rate high-level hypotheses
# below a moderate typicality but will rate low-level hypotheses near zero.
# The curve is a stand-in for unmodeled provider behavior; constants tuned so
# clear candidates yield decisive posteriors while borderline ones stay
# ambiguous.
BASE_TYPICALITY = 9.0
TYPICALITY_DECAY = 4.0
TYPICALITY_FLOOR_BOTTOM = 0.10
TYPICALITY_FLOOR_TOP = 0.72
# Same role for phone-screen evidence: cap on how decisively one screen can
# rule a level out.
SCREEN_SCORE_FLOOR = 1.9
# Weight on the candidate's latent level versus the resume's feature-implied
# signal when locating the evidence on the quality axis.
TRUE_LEVEL_WEIGHT = 0.25

# Discriminative mode (baselines): one overall quality score per resume,
# anchored so borderline profiles sit just under the conventional 7.0 bar and
# solidly qualified ones clear it.
QUALITY_INTERCEPT = 4.5
QUALITY_SLOPE = 2.0

FALLBACK_SCORE = 5.0

_NUMERIC_TOKEN = re.compile(r"[0-9]+(?:\.[0-9]+)?")

_RETRY_SUFFIXES = (
    "",
    "\n\nReply with a single number between 0 and 10 and nothing else.",
    "\n\nIMPORTANT: output exactly one number from 0 to 10. No words, no units, no explanation.",
)


@dataclass(frozen=True)
class Observation:
    """One piece of evidence about a candidate.

    ``features`` carries the structured record consumed by simulated providers
    (including the latent target written by the generator); remote providers
    see only ``text``.
    """

    kind: str  # "resume" | "phone_screen"
    text: str
    candidate_id: str
    features: Mapping | None = None

    def __post_init__(self):
        if self.kind not in ("resume", "phone_screen"):
            raise ValueError(f"unknown observation kind: {self.kind!r}")
        if not self.text:
            raise ValueError("observation text must be non-empty")


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    mode: str = "simulated"  # "simulated" | "remote"
    endpoint: str | None = None
    credential_env: str | None = None
    temperature: float = 0.7
    max_tokens: int = 10
    max_retries: int = 3
    timeout_s: float = 30.0
    request_template: Mapping | None = None
    # simulated-only knobs
    bias_profile: Mapping[str, float] = field(default_factory=dict)
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("simulated", "remote"):
            raise ValueError(f"unknown provider mode: {self.mode!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")


@dataclass(frozen=True)
class RawEstimate:
    provider: str
    state: str
    score: float
    normalized: float
    fallback_used: bool = False


def build_contrastive_prompt(obs: Observation, state: str, state_description: str) -> str:
    """Render the state-conditioned typicality prompt for one (evidence, state) pair.

    Block order: role, state conditioning, typicality question, evidence text,
    0-10 rubric, numeric-only output instruction. Deterministic given inputs.
    """
    if not state_description:
        raise ValueError("state_description must be non-empty")
    if obs.kind == "resume":
        evidence_name = "resume"
        question = (
            "Given the assumed quality level above, how TYPICAL or REPRESENTATIVE "
            "is the following resume for someone at that level?"
        )
    else:
        evidence_name = "phone screen notes"
        question = (
            "Given the assumed quality level above, how typical is the following "
            "phone screen performance for someone at that level?"
        )
    return (
        "[ROLE]\n"
        "You are a senior technical recruiter with years of experience screening "
        "software engineering candidates at every seniority level.\n\n"
        "[STATE CONDITIONING]\n"
        f"ASSUME that the candidate's TRUE quality level is: {state} - {state_description}\n\n"
        "[QUESTION]\n"
        f"{question}\n\n"
        f"[{evidence_name.upper()}]\n"
        f"{obs.text}\n\n"
        "[SCORING RUBRIC]\n"
        "Provide a score from 0 to 10 where:\n"
        "10 = Extremely typical (exactly what this level looks like)\n"
        "7-9 = Quite typical (strong match, minor variations)\n"
        "4-6 = Somewhat typical (plausible but imperfect fit)\n"
        "1-3 = Atypical (poor match for this level)\n"
        "0 = Completely atypical (inconsistent with this level)\n\n"
        "[OUTPUT FORMAT]\n"
        "Provide ONLY the numeric score (0-10). No explanation.\n"
        "Score:"
    )


def parse_score(response: str) -> float:
    """Extract the first numeric token from a provider response, clamped to [0, 10]."""
    match = _NUMERIC_TOKEN.search(response)
    if match is None:
        raise Unparseable(f"no numeric token in response: {response[:80]!r}")
    return min(10.0, max(0.0, float(match.group())))


def _stable_seed(*parts) -> int:
    key = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def call_rng(*parts) -> random.Random:
    """Deterministic per-call RNG stream keyed by the given parts."""
    return random.Random(_stable_seed(*parts))


def _level_of(state: str, states: Sequence[str]) -> float:
    return float(list(states).index(state))


def _effective_level(features: Mapping, target_state: str, states: Sequence[str]) -> float:
    target_level = _level_of(target_state, states)
    signal = features.get("signal_level")
    if signal is None:
        return target_level
    return TRUE_LEVEL_WEIGHT * target_level + (1.0 - TRUE_LEVEL_WEIGHT) * float(signal)


def bias_offset(features: Mapping, bias_profile: Mapping[str, float]) -> float:
    """Sum of bias_profile offsets whose 'key:value' selector matches the features."""
    total = 0.0
    for selector, offset in bias_profile.items():
        key, _, value = selector.partition(":")
        if str(features.get(key)) == value:
            total += float(offset)
    return total


def simulate_score(
    features: Mapping,
    target_state: str,
    hypothesized_state: str,
    config: ProviderConfig,
    rng: random.Random,
    *,
    states: Sequence[str],
) -> float:
    """Simulated typicality score for evidence at ``target_state`` judged against
    ``hypothesized_state``.

    Base typicality peaks at the effective target level and decays with level
    distance; additive bias_profile offsets and Gaussian noise follow; the
    result is clamped to [0, 10]. With zero noise and an empty bias profile the
    score is a deterministic function of (features, hypothesized state).
    """
    hyp_level = _level_of(hypothesized_state, states)
    distance = abs(_effective_level(features, target_state, states) - hyp_level)
    top = max(len(states) - 1.0, 1.0)
    floor = TYPICALITY_FLOOR_BOTTOM + (
        (TYPICALITY_FLOOR_TOP - TYPICALITY_FLOOR_BOTTOM) * hyp_level / top
    )
    base = max(floor, BASE_TYPICALITY * math.exp(-TYPICALITY_DECAY * distance))
    score = base + bias_offset(features, config.bias_profile)
    if config.noise_sd > 0:
        score += rng.gauss(0.0, config.noise_sd)
    return min(10.0, max(0.0, score))


def typicality_from_densities(
    densities: Sequence[float],
    hypothesized_state: str,
    config: ProviderConfig,
    rng: random.Random,
    *,
    states: Sequence[str],
    features: Mapping,
) -> float:
    """Typicality score when the observation carries per-state evidence
    densities (phone screens): the hypothesized state's density relative to the
    best-fitting state, on the 0-10 scale, with the usual bias and noise."""
    idx = list(states).index(hypothesized_state)
    peak = max(densities)
    rel = densities[idx] / peak if peak > 0 else 0.0
    score = max(SCREEN_SCORE_FLOOR, 10.0 * rel) + bias_offset(features, config.bias_profile)
    if config.noise_sd > 0:
        score += rng.gauss(0.0, config.noise_sd)
    return min(10.0, max(0.0, score))


def discriminative_score(
    features: Mapping,
    target_state: str,
    config: ProviderConfig,
    rng: random.Random,
    *,
    states: Sequence[str],
) -> float:
    """Single overall 0-10 quality score for baseline methods.

    Shares the simulated adapter's level signal, bias model, and noise so that
    baselines face the same world as the likelihood pipeline.
    """
    level = _effective_level(features, target_state, states)
    score = QUALITY_INTERCEPT + QUALITY_SLOPE * level
    score += bias_offset(features, config.bias_profile)
    if config.noise_sd > 0:
        score += rng.gauss(0.0, config.noise_sd)
    return min(10.0, max(0.0, score))


def _simulated_response(
    obs: Observation, state: str, provider: ProviderConfig, attempt: int, states: Sequence[str]
) -> str:
    if not obs.features or "target_state" not in obs.features:
        raise ValueError(
            "simulated provider needs observation features with a 'target_state' entry"
        )
    rng = call_rng(provider.seed, obs.candidate_id, provider.name, state, obs.kind, attempt)
    densities = obs.features.get("state_densities")
    if densities is not None:
        score = typicality_from_densities(
            densities, state, provider, rng, states=states, features=obs.features
        )
    else:
        score = simulate_score(
            obs.features, obs.features["target_state"], state, provider, rng, states=states
        )
    return f"{score:.4f}"


def _render_template(template, prompt: str, provider: ProviderConfig):
    if isinstance(template, Mapping):
        return {k: _render_template(v, prompt, provider) for k, v in template.items()}
    if isinstance(template, (list, tuple)):
        return [_render_template(v, prompt, provider) for v in template]
    if template == "$PROMPT":
        return prompt
    if template == "$TEMPERATURE":
        return provider.temperature
    if template == "$MAX_TOKENS":
        return provider.max_tokens
    return template


def _remote_response(
    prompt: str, provider: ProviderConfig, transport: httpx.BaseTransport | None
) -> str:
    if not provider.endpoint:
        raise ProviderUnavailable(f"provider {provider.name!r} has no endpoint configured")
    headers = {}
    if provider.credential_env:
        key = os.environ.get(provider.credential_env, "")
        if not key:
            raise ProviderUnavailable(
                f"credential env var {provider.credential_env!r} is empty or unset"
            )
        headers["Authorization"] = f"Bearer {key}"
    if provider.request_template is not None:
        body = _render_template(provider.request_template, prompt, provider)
    else:
        body = {
            "model": provider.name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": provider.temperature,
            "max_tokens": provider.max_tokens,
        }
    try:
        with httpx.Client(transport=transport, timeout=provider.timeout_s) as client:
            resp = client.post(provider.endpoint, json=body, headers=headers)
    except httpx.HTTPError as exc:
        raise ProviderUnavailable(f"transport failure for {provider.name!r}: {exc}") from exc
    if resp.status_code in (401, 403):
        raise ProviderUnavailable(
            f"provider {provider.name!r} rejected credentials ({resp.status_code})"
        )
    # Any other response body is treated as opaque text for the parser; parse
    # failures are retried, not raised as availability errors.
    return resp.text


def elicit(
    obs: Observation,
    problem: DecisionProblem,
    provider: ProviderConfig,
    transport: httpx.BaseTransport | None = None,
) -> list[RawEstimate]:
    """Elicit one typicality estimate per state from a provider.

    Retries failed parses up to ``max_retries`` times with progressively more
    explicit numeric-only suffixes, then falls back to score 5.0 (normalized
    0.5) with ``fallback_used`` set. Always returns exactly |states| estimates.
    """
    estimates = []
    for state in problem.states:
        prompt = build_contrastive_prompt(obs, state, problem.describe(state))
        score = None
        fallback = False
        for attempt in range(provider.max_retries + 1):
            suffix = _RETRY_SUFFIXES[min(attempt, len(_RETRY_SUFFIXES) - 1)]
            if provider.mode == "simulated":
                response = _simulated_response(obs, state, provider, attempt, problem.states)
            else:
                response = _remote_response(prompt + suffix, provider, transport)
            try:
                score = parse_score(response)
                break
            except Unparseable:
                continue
        if score is None:
            score = FALLBACK_SCORE
            fallback = True
        estimates.append(
            RawEstimate(
                provider=provider.name,
                state=state,
                score=score,
                normalized=score / 10.0,
                fallback_used=fallback,
            )
        )
    return estimates
