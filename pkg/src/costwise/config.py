"""Experiment configuration: strict schema, YAML/JSON loading, and builders
for the domain objects each run needs. Unknown keys are rejected so typos fail
at load time instead of silently running defaults.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import hiring
from .core import Action, DecisionProblem
from .elicitation import ProviderConfig
from .errors import ConfigError
from .evaluation import ABLATION_KINDS, BASELINE_KINDS
from .voi import InfoSource

METHOD_NAMES = ("framework",) + BASELINE_KINDS + ABLATION_KINDS


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class StateSpec(_Strict):
    name: str
    description: str = ""


class ActionSpec(_Strict):
    name: str
    terminal: bool = True


class ProblemSpec(_Strict):
    states: list[StateSpec]
    actions: list[ActionSpec]
    costs: dict[str, list[float]]
    prior: list[float]
    info_cost: float = 0.0


class ProviderSpec(_Strict):
    name: str
    mode: str = "simulated"
    endpoint: str | None = None
    credential_env: str | None = None
    temperature: float = 0.7
    max_tokens: int = 10
    max_retries: int = 3
    timeout_s: float = 30.0
    request_template: dict | None = None
    bias_profile: dict[str, float] = Field(default_factory=dict)
    noise_sd: float = 0.0
    seed: int = 0


class SourceSpec(_Strict):
    name: str = "phone_screen"
    cost: float = 150.0
    rho: float = 0.7
    outcome_model: dict[str, list[float]] | None = None


class PopulationSpec(_Strict):
    n: int = 1000
    seed: int = 42

    @field_validator("n")
    @classmethod
    def _positive(cls, v):
        if v < 1:
            raise ValueError("population size must be >= 1")
        return v


class SweepSpec(_Strict):
    cost_scale_delta: float = 0.2
    cost_scale_draws: int = 10
    tau_d_grid: list[float] = Field(default_factory=lambda: [0.10, 0.15, 0.20])
    rho_grid: list[float] = Field(default_factory=lambda: [0.5, 0.7, 0.9])
    prior_draws: int = 10
    prior_concentration: float = 1.0
    seed: int = 0


class ExperimentConfig(_Strict):
    problem: ProblemSpec
    providers: list[ProviderSpec]
    source: SourceSpec = SourceSpec()
    tau_d: float = hiring.TAU_D
    population: PopulationSpec = PopulationSpec()
    methods: list[str] = Field(default_factory=lambda: ["framework"])
    sweeps: SweepSpec = SweepSpec()
    optimal_dispositions: dict[str, str] = Field(default_factory=dict)
    output_dir: str = "out"
    workers: int = 1

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, methods):
        unknown = [m for m in methods if m not in METHOD_NAMES]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; valid: {list(METHOD_NAMES)}")
        return methods

    def build_problem(self) -> DecisionProblem:
        spec = self.problem
        actions = tuple(Action(a.name, a.terminal) for a in spec.actions)
        try:
            cost = np.asarray([spec.costs[a.name] for a in actions])
        except KeyError as exc:
            raise ConfigError(f"costs missing a row for action {exc}") from exc
        try:
            return DecisionProblem(
                states=tuple(s.name for s in spec.states),
                actions=actions,
                cost=cost,
                prior=np.asarray(spec.prior),
                info_cost=spec.info_cost,
                state_descriptions=tuple(s.description or s.name for s in spec.states),
            )
        except Exception as exc:
            raise ConfigError(f"invalid problem definition: {exc}") from exc

    def build_providers(self) -> list[ProviderConfig]:
        try:
            return [
                ProviderConfig(
                    name=p.name,
                    mode=p.mode,
                    endpoint=p.endpoint,
                    credential_env=p.credential_env,
                    temperature=p.temperature,
                    max_tokens=p.max_tokens,
                    max_retries=p.max_retries,
                    timeout_s=p.timeout_s,
                    request_template=p.request_template,
                    bias_profile=p.bias_profile,
                    noise_sd=p.noise_sd,
                    seed=p.seed,
                )
                for p in self.providers
            ]
        except Exception as exc:
            raise ConfigError(f"invalid provider definition: {exc}") from exc

    def build_source(self) -> InfoSource:
        s = self.source
        try:
            return InfoSource(
                name=s.name,
                cost=s.cost,
                rho=s.rho,
                outcome_model={k: tuple(v) for k, v in s.outcome_model.items()}
                if s.outcome_model
                else None,
            )
        except Exception as exc:
            raise ConfigError(f"invalid source definition: {exc}") from exc

    def dispositions(self) -> dict[str, str]:
        if self.optimal_dispositions:
            return dict(self.optimal_dispositions)
        return dict(hiring.OPTIMAL_DISPOSITIONS)


def default_config() -> ExperimentConfig:
    return ExperimentConfig(
        problem=ProblemSpec(
            states=[
                StateSpec(name=n, description=d)
                for n, d in zip(hiring.STATES, hiring.STATE_DESCRIPTIONS)
            ],
            actions=[ActionSpec(name=a.name, terminal=a.terminal) for a in hiring.ACTIONS],
            costs={a.name: list(row) for a, row in zip(hiring.ACTIONS, hiring.COST_MATRIX)},
            prior=list(hiring.PRIOR),
            info_cost=hiring.INFO_COST,
        ),
        providers=[
            ProviderSpec(
                name=p.name,
                bias_profile=dict(p.bias_profile),
                noise_sd=p.noise_sd,
                seed=p.seed,
            )
            for p in hiring.default_providers()
        ],
        source=SourceSpec(
            name="phone_screen",
            cost=hiring.INFO_COST,
            rho=hiring.RHO,
            outcome_model={k: list(v) for k, v in hiring.SCREEN_OUTCOME_MODEL.items()},
        ),
        tau_d=hiring.TAU_D,
        optimal_dispositions=dict(hiring.OPTIMAL_DISPOSITIONS),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is None:
        return default_config()
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    try:
        config = ExperimentConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"config {path} failed validation:\n{exc}") from exc
    # force domain-level validation (prior normalization, cost shape, outcome
    # rows, provider modes) at load time rather than first use
    config.build_problem()
    config.build_providers()
    config.build_source()
    return config


def dump_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config.model_dump(), sort_keys=False))
