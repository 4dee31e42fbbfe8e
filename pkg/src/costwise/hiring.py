"""Default instantiation for software-engineering resume screening: the
four-level quality ladder, its asymmetric cost matrix, funnel prior, the
five-member simulated provider roster with measured per-group score offsets,
and the phone-screen information source.
"""

from __future__ import annotations

import numpy as np

from .core import Action, DecisionProblem
from .elicitation import ProviderConfig
from .voi import InfoSource

STATES = ("unqualified", "borderline", "qualified", "exceptional")

STATE_DESCRIPTIONS = (
    "Clearly below the bar: missing a relevant degree or under a year of real "
    "programming work, no substantive projects, or serious red flags such as "
    "unexplained multi-year gaps.",
    "Possibly workable but unproven: non-traditional background (bootcamp, "
    "self-taught, career switcher), thin formal credentials with some promising "
    "work, or claims that need verification before investing interview time.",
    "Meets the standard bar: relevant CS degree or equivalent, two to five years "
    "of industry experience, demonstrated delivery on the required stack, no "
    "significant red flags.",
    "Well above the bar: elite training and/or senior experience at strong "
    "companies, rare specialized skills, significant open-source or published "
    "work, signs of leadership.",
)

ACTIONS = (
    Action("reject", terminal=True),
    Action("phone_screen", terminal=False),
    Action("interview", terminal=True),
)

# Rows follow ACTIONS, columns follow STATES. Correct dispositions are
# normalized to zero cost; wrong ones carry the opportunity/waste cost.
COST_MATRIX = (
    (0.0, 5_000.0, 20_000.0, 40_000.0),
    (150.0, 150.0, 150.0, 150.0),
    (2_500.0, 2_500.0, 0.0, 0.0),
)

PRIOR = (0.65, 0.25, 0.08, 0.02)
INFO_COST = 150.0

TAU_D = 0.15
RHO = 0.7

# Reference disposition per true state, for the accuracy metric. "screen" means
# a phone screen should occur before any terminal action.
OPTIMAL_DISPOSITIONS = {
    "unqualified": "reject",
    "borderline": "screen",
    "qualified": "interview",
    "exceptional": "interview",
}

# Per-group additive score offsets measured on matched resume pairs (identical
# credentials, different demographic cues), one profile per roster member.
# Offsets are relative to the male / White reference groups.
PROVIDER_BIASES = {
    "alpha": {
        "gender:female": -0.62,
        "gender:non-binary": -1.13,
        "ethnicity:Black": -1.82,
        "ethnicity:Hispanic": -1.45,
        "ethnicity:Asian": +0.23,
    },
    "bravo": {
        "gender:female": -0.58,
        "gender:non-binary": -0.71,
        "ethnicity:Black": -0.44,
        "ethnicity:Hispanic": -0.52,
        "ethnicity:Asian": +0.15,
    },
    "charlie": {
        "gender:female": +0.41,
        "gender:non-binary": +0.18,
        "ethnicity:Black": -0.18,
        "ethnicity:Hispanic": -0.23,
        "ethnicity:Asian": +0.33,
    },
    "delta": {
        "gender:female": -0.22,
        "gender:non-binary": -0.51,
        "ethnicity:Black": +0.31,
        "ethnicity:Hispanic": +0.14,
        "ethnicity:Asian": +0.09,
    },
    "echo": {
        "gender:female": -0.09,
        "gender:non-binary": -0.15,
        "ethnicity:Black": -0.08,
        "ethnicity:Hispanic": -0.11,
        "ethnicity:Asian": +0.52,
    },
}

DEFAULT_NOISE_SD = 0.9

# Discrete phone-screen outcome model p(band | state) for the exact VOI oracle;
# bands are score <= 4, 4 < score < 7, and score >= 7.
SCREEN_OUTCOME_MODEL = {
    "low": (0.90, 0.30, 0.10, 0.05),
    "mid": (0.05, 0.50, 0.30, 0.00),
    "high": (0.05, 0.20, 0.60, 0.95),
}


def default_problem() -> DecisionProblem:
    return DecisionProblem(
        states=STATES,
        actions=ACTIONS,
        cost=np.asarray(COST_MATRIX),
        prior=np.asarray(PRIOR),
        info_cost=INFO_COST,
        state_descriptions=STATE_DESCRIPTIONS,
    )


def default_providers(noise_sd: float = DEFAULT_NOISE_SD, seed: int = 7) -> list[ProviderConfig]:
    return [
        ProviderConfig(
            name=name,
            mode="simulated",
            bias_profile=profile,
            noise_sd=noise_sd,
            seed=seed + i,
        )
        for i, (name, profile) in enumerate(PROVIDER_BIASES.items())
    ]


def unbiased_providers(noise_sd: float = DEFAULT_NOISE_SD, seed: int = 7, count: int = 5) -> list[ProviderConfig]:
    """Roster without demographic offsets, for experiments isolating bias effects."""
    names = list(PROVIDER_BIASES.keys())[:count]
    return [
        ProviderConfig(name=name, mode="simulated", noise_sd=noise_sd, seed=seed + i)
        for i, name in enumerate(names)
    ]


def default_source(rho: float = RHO, cost: float = INFO_COST) -> InfoSource:
    return InfoSource(
        name="phone_screen",
        cost=cost,
        rho=rho,
        outcome_model=SCREEN_OUTCOME_MODEL,
    )


def binary_problem() -> DecisionProblem:
    """Two-state reject/interview problem with the classic 40K/2.5K asymmetry,
    for thresholds and worked examples."""
    return DecisionProblem(
        states=("unqualified", "qualified"),
        actions=(Action("reject"), Action("interview")),
        cost=np.asarray(((0.0, 40_000.0), (2_500.0, 0.0))),
        prior=np.asarray((0.9, 0.1)),
    )
