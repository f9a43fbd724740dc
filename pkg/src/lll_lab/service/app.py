"""FastAPI application wrapping the lab operations."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..errors import GenerationError, RegimeError, ResolutionError, ValidationError
from . import ops
from . import schemas as sc

_CLIENT_ERRORS = (ValidationError, GenerationError, RegimeError, ResolutionError,
                  FileNotFoundError)


def create_app() -> FastAPI:
    app = FastAPI(title="lll-lab",
                  description="Resampling lab for Lovász Local Lemma instances")

    def guarded(fn, req):
        try:
            return fn(req)
        except _CLIENT_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/gen", response_model=sc.GenResponse)
    def gen(req: sc.GenRequest) -> sc.GenResponse:
        return guarded(ops.gen_op, req)

    @app.post("/run", response_model=sc.RunReportModel)
    def run(req: sc.RunRequest) -> sc.RunReportModel:
        return guarded(ops.run_op, req)

    @app.post("/classify", response_model=sc.ClassifyResponse)
    def classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
        return guarded(ops.classify_op, req)

    @app.post("/query", response_model=sc.QueryResponse)
    def query(req: sc.QueryRequest) -> sc.QueryResponse:
        return guarded(ops.query_op, req)

    @app.post("/verify", response_model=sc.VerifyResponse)
    def verify(req: sc.VerifyRequest) -> sc.VerifyResponse:
        return guarded(ops.verify_op, req)

    @app.post("/sweep", response_model=sc.SweepResponse)
    def sweep(req: sc.SweepRequest) -> sc.SweepResponse:
        return guarded(ops.sweep_op, req)

    return app


app = create_app()
