"""FastAPI service wrapping the decision engine: per-request belief updates,
action selection, VOI queries, single-observation assessment, and full
simulated episodes. Experiment batch jobs live in the CLI, not here.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from ..config import ExperimentConfig, default_config
from ..core import Belief, LikelihoodVector, bayes_update, entropy, expected_cost, select_action
from ..datagen import Candidate
from ..elicitation import Observation
from ..errors import CostwiseError
from ..orchestrator import elicit_panel, evaluate_gate, run_episode
from ..voi import voi_approx, InfoSource
from . import schemas


def create_app(config: ExperimentConfig | None = None) -> FastAPI:
    config = config or default_config()
    problem = config.build_problem()
    providers = config.build_providers()
    source = config.build_source()

    app = FastAPI(title="costwise decision service", version="0.1.0")

    def belief_from(values: list[float] | None) -> Belief:
        if values is None:
            return Belief(problem.prior)
        return Belief(np.asarray(values, dtype=float))

    @app.exception_handler(CostwiseError)
    async def _domain_error(_, exc: CostwiseError):
        return JSONResponse(
            status_code=422, content={"detail": f"{type(exc).__name__}: {exc}"}
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse()

    @app.get("/problem", response_model=schemas.ProblemResponse)
    def problem_spec():
        return schemas.ProblemResponse(
            states=list(problem.states),
            state_descriptions=list(problem.state_descriptions),
            actions=[{"name": a.name, "terminal": a.terminal} for a in problem.actions],
            cost=problem.cost.tolist(),
            prior=problem.prior.tolist(),
            info_cost=problem.info_cost,
            tau_d=config.tau_d,
            rho=source.rho,
            providers=[p.name for p in providers],
        )

    @app.post("/belief/update", response_model=schemas.BeliefResponse)
    def update_belief(req: schemas.BeliefUpdateRequest):
        try:
            posterior = bayes_update(
                belief_from(req.belief), LikelihoodVector(np.asarray(req.likelihoods))
            )
        except (CostwiseError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.BeliefResponse(
            belief=posterior.probs.tolist(), entropy_bits=entropy(posterior)
        )

    @app.post("/actions/select", response_model=schemas.SelectActionResponse)
    def select(req: schemas.SelectActionRequest):
        try:
            belief = belief_from(req.belief)
            action, cost = select_action(belief, problem)
            per_action = {
                a.name: expected_cost(belief, problem, a.name) for a in problem.actions
            }
        except (CostwiseError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.SelectActionResponse(
            action=action, expected_cost=cost, per_action=per_action
        )

    @app.post("/voi", response_model=schemas.VoiResponse)
    def voi(req: schemas.VoiRequest):
        try:
            belief = belief_from(req.belief)
            use_source = source
            if req.rho is not None:
                use_source = InfoSource(
                    name=source.name,
                    cost=source.cost,
                    rho=req.rho,
                    outcome_model=source.outcome_model,
                )
            value = voi_approx(belief, problem, use_source)
        except (CostwiseError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.VoiResponse(
            voi=value, source_cost=use_source.cost, worth_gathering=value > use_source.cost
        )

    @app.post("/assess", response_model=schemas.AssessResponse)
    def assess(req: schemas.AssessRequest):
        try:
            obs = Observation(
                kind=req.observation.kind,
                text=req.observation.text,
                candidate_id=req.observation.candidate_id,
                features=req.observation.features,
            )
            prior = belief_from(req.belief)
            panel, fallbacks = elicit_panel(obs, problem, providers)
            belief = bayes_update(prior, panel.aggregated)
            gate = evaluate_gate("default", panel, belief, problem, source, config.tau_d)
        except (CostwiseError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.AssessResponse(
            per_provider=panel.per_provider.tolist(),
            providers=list(panel.providers),
            aggregated=panel.aggregated.values.tolist(),
            disagreement=None if panel.disagreement is None else panel.disagreement.tolist(),
            max_disagreement=panel.max_disagreement,
            belief=belief.probs.tolist(),
            entropy_bits=entropy(belief),
            gate=schemas.GatePayload(
                gather=gate.gather,
                max_disagreement=gate.max_disagreement,
                voi=gate.voi,
                source_cost=gate.source_cost,
                disagreement_exceeded=gate.disagreement_exceeded,
                voi_exceeds_cost=gate.voi_exceeds_cost,
            ),
            fallbacks=fallbacks,
        )

    @app.post("/episodes", response_model=schemas.EpisodeResponse)
    def episode(req: schemas.CandidatePayload):
        try:
            candidate = Candidate(
                id=req.id,
                true_state=req.true_state,
                features=req.features,
                gender=req.gender,
                ethnicity=req.ethnicity,
                name=req.name,
                resume_text=req.resume_text,
                screen_performance=req.screen_performance,
                signal_level=req.signal_level,
            )
            trace = run_episode(candidate, problem, providers, source, config.tau_d)
        except (CostwiseError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.EpisodeResponse(trace=trace.to_record())

    return app


app = create_app()
