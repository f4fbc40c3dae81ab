"""FastAPI application exposing the sweep engine."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .. import __version__
from ..config import ConfigError
from ..harness import FIGURE_PRESETS, emit_csv, figure_configs, run_sweep
from .jobs import JobStore
from .schemas import (
    FigureJobOut,
    HealthOut,
    JobCreated,
    JobOut,
    RowOut,
    SimulateRequest,
    SimulateResponse,
    csv_columns,
    rows_out,
)


def create_app() -> FastAPI:
    app = FastAPI(title="rsma-sim", version=__version__)
    store = JobStore()
    app.state.jobs = store

    @app.get("/health", response_model=HealthOut)
    def health() -> HealthOut:
        return HealthOut(status="ok", version=__version__)

    def _build_config(req: SimulateRequest):
        try:
            return req.to_config()
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        cfg = _build_config(req)
        report = run_sweep(cfg)
        return SimulateResponse(
            columns=csv_columns(), rows=rows_out(report), csv=emit_csv(report)
        )

    @app.post("/jobs", response_model=JobCreated, status_code=202)
    def submit_job(req: SimulateRequest) -> JobCreated:
        cfg = _build_config(req)
        job = store.submit(cfg)
        return JobCreated(id=job.id, state=job.state)

    def _get_job(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="no such job")
        return job

    @app.get("/jobs/{job_id}", response_model=JobOut)
    def job_status(job_id: str) -> JobOut:
        job = _get_job(job_id)
        rows: list[RowOut] | None = None
        if job.state == "done" and job.report is not None:
            rows = rows_out(job.report)
        return JobOut(
            id=job.id,
            state=job.state,
            error=job.error,
            created_at=job.created_at,
            finished_at=job.finished_at,
            rows=rows,
        )

    @app.get("/jobs/{job_id}/csv", response_class=PlainTextResponse)
    def job_csv(job_id: str) -> PlainTextResponse:
        job = _get_job(job_id)
        if job.state == "error":
            raise HTTPException(status_code=500, detail=job.error or "job failed")
        if job.state != "done" or job.report is None:
            raise HTTPException(status_code=409, detail=f"job is {job.state}")
        return PlainTextResponse(emit_csv(job.report), media_type="text/csv")

    @app.get("/figures")
    def figures() -> dict:
        return {"figures": sorted(FIGURE_PRESETS)}

    @app.post("/figures/{name}", response_model=FigureJobOut, status_code=202)
    def submit_figure(name: str, req: SimulateRequest | None = None) -> FigureJobOut:
        base = None
        if req is not None:
            base = _build_config(req)
        try:
            pairs = figure_configs(name, base)
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        jobs = []
        tags = []
        for tag, cfg in pairs:
            job = store.submit(cfg)
            jobs.append(JobCreated(id=job.id, state=job.state))
            tags.append(tag)
        return FigureJobOut(figure=name, jobs=jobs, tags=tags)

    return app


app = create_app()
