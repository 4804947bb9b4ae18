"""HTTP service for live campaigns. JSON in, JSON out; one writer per campaign."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .state import (
    CampaignConfig,
    CampaignError,
    CampaignState,
    CampaignStore,
    campaign_metrics,
    propose_batch,
    record_measurements,
    state_to_json,
    summarize,
)


class ConfigBody(BaseModel):
    batch_size: int = 16
    rounds: int = 3
    alpha_schedule: list[float] = Field(default_factory=lambda: [6.0, 100.0])
    per_locus_cap: int | None = 3
    seed: int = 0
    ensemble_size: int = 5
    ucb_beta: float = 1.0
    expansion_parents: int = 4
    max_warm_pairs: int = 40000
    warm_start: bool = True


class CreateCampaignBody(BaseModel):
    campaign_id: str
    reference: str
    embeddings_path: str
    logprobs_path: str
    dataset_path: str | None = None
    config: ConfigBody = Field(default_factory=ConfigBody)


class ProposeBody(BaseModel):
    alpha: float | None = None


class MeasurementEntry(BaseModel):
    variant: str
    activity: float | None = None
    failed: bool = False


class MeasurementsBody(BaseModel):
    measurements: list[MeasurementEntry]


def create_app(data_dir) -> FastAPI:
    app = FastAPI(title="folde campaign service")
    store = CampaignStore(data_dir)

    def get_state(campaign_id: str) -> CampaignState:
        try:
            return store.load(campaign_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no campaign {campaign_id!r}")

    @app.get("/campaigns")
    def list_campaigns():
        return [summarize(store.load(cid)) for cid in store.list_ids()]

    @app.post("/campaigns", status_code=201)
    def create_campaign(body: CreateCampaignBody):
        try:
            state = CampaignState(
                campaign_id=body.campaign_id,
                reference=body.reference,
                embeddings_path=body.embeddings_path,
                logprobs_path=body.logprobs_path,
                dataset_path=body.dataset_path,
                config=CampaignConfig(**body.config.model_dump()),
            )
            store.create(state)
        except (CampaignError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return summarize(state)

    @app.get("/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        return state_to_json(get_state(campaign_id))

    @app.post("/campaigns/{campaign_id}/propose")
    def propose(campaign_id: str, body: ProposeBody | None = None):
        get_state(campaign_id)
        alpha = body.alpha if body is not None else None
        try:
            state = propose_batch(store, campaign_id, alpha=alpha)
        except CampaignError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        rnd = state.rounds[-1]
        return {
            "campaign_id": campaign_id,
            "round": rnd.index,
            "status": state.status,
            "batch": [
                {"variant": text, **rnd.scores.get(text, {})} for text in rnd.proposed
            ],
        }

    @app.post("/campaigns/{campaign_id}/measurements")
    def record(campaign_id: str, body: MeasurementsBody):
        get_state(campaign_id)
        pairs = []
        for entry in body.measurements:
            if entry.failed:
                continue
            if entry.activity is None:
                raise HTTPException(
                    status_code=400,
                    detail=f"entry for {entry.variant!r} has neither activity nor failed flag",
                )
            pairs.append((entry.variant, entry.activity))
        try:
            state = record_measurements(store, campaign_id, pairs)
        except (CampaignError, ValueError) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return summarize(state)

    @app.get("/campaigns/{campaign_id}/metrics")
    def metrics(campaign_id: str):
        state = get_state(campaign_id)
        try:
            return campaign_metrics(state)
        except CampaignError as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    return app
