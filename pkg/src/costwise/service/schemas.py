"""Request/response models for the decision service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class ProblemResponse(BaseModel):
    states: list[str]
    state_descriptions: list[str]
    actions: list[dict]
    cost: list[list[float]]
    prior: list[float]
    info_cost: float
    tau_d: float
    rho: float
    providers: list[str]


class BeliefUpdateRequest(BaseModel):
    likelihoods: list[float]
    belief: list[float] | None = None  # defaults to the configured prior


class BeliefResponse(BaseModel):
    belief: list[float]
    entropy_bits: float


class SelectActionRequest(BaseModel):
    belief: list[float]


class SelectActionResponse(BaseModel):
    action: str
    expected_cost: float
    per_action: dict[str, float]


class VoiRequest(BaseModel):
    belief: list[float]
    rho: float | None = None  # overrides the configured source informativeness


class VoiResponse(BaseModel):
    voi: float
    source_cost: float
    worth_gathering: bool


class ObservationPayload(BaseModel):
    kind: str
    text: str
    candidate_id: str
    features: dict | None = None


class AssessRequest(BaseModel):
    observation: ObservationPayload
    belief: list[float] | None = None  # defaults to the configured prior


class GatePayload(BaseModel):
    gather: bool
    max_disagreement: float | None
    voi: float
    source_cost: float
    disagreement_exceeded: bool
    voi_exceeds_cost: bool


class AssessResponse(BaseModel):
    per_provider: list[list[float]]
    providers: list[str]
    aggregated: list[float]
    disagreement: list[float] | None
    max_disagreement: float | None
    belief: list[float]
    entropy_bits: float
    gate: GatePayload
    fallbacks: int


class CandidatePayload(BaseModel):
    id: str
    true_state: str
    features: dict
    gender: str
    ethnicity: str
    name: str
    resume_text: str
    screen_performance: float = Field(ge=0.0, le=10.0)
    signal_level: float


class EpisodeResponse(BaseModel):
    trace: dict
