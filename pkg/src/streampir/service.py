"""FastAPI service wrapping the experiment drivers.

Endpoints take the pydantic request models and return the report envelope;
semantic config problems map to 400 with kind "config", guard hits to 400
with kind "budget".  Verification outcomes (search exhausted, failed flags,
decoder counterexamples) are data, not transport errors: they come back in
a 200 report and clients decide what to do with them.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import BudgetExceededError, ConfigError
from .experiments import (run_code_search, run_code_verify, run_enumeration,
                          run_privacy_audit, run_simulation)
from .models import (CodeSearchRequest, CodeVerifyRequest, EnumerateRequest,
                     PrivacyAuditRequest, Report, SimulateRequest)

app = FastAPI(
    title="streampir",
    version=__version__,
    description="Streaming private retrieval over convolutionally coded "
                "storage: code search and verification, protocol simulation, "
                "erasure-pattern enumeration, privacy audits.",
)


@app.exception_handler(ConfigError)
async def _config_error(request: Request, exc: ConfigError):
    return JSONResponse(status_code=400,
                        content={"detail": {"kind": "config", "message": str(exc)}})


@app.exception_handler(BudgetExceededError)
async def _budget_error(request: Request, exc: BudgetExceededError):
    return JSONResponse(status_code=400,
                        content={"detail": {"kind": "budget", "message": str(exc)}})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/code/search", response_model=Report)
def code_search(req: CodeSearchRequest) -> dict:
    return run_code_search(req.model_dump(exclude_none=True))


@app.post("/code/verify", response_model=Report)
def code_verify(req: CodeVerifyRequest) -> dict:
    return run_code_verify(req.model_dump(exclude_none=True))


@app.post("/simulate", response_model=Report)
def simulate(req: SimulateRequest) -> dict:
    return run_simulation(req.model_dump(exclude_none=True))


@app.post("/enumerate", response_model=Report)
def enumerate_patterns(req: EnumerateRequest) -> dict:
    return run_enumeration(req.model_dump(exclude_none=True))


@app.post("/privacy-audit", response_model=Report)
def privacy(req: PrivacyAuditRequest) -> dict:
    return run_privacy_audit(req.model_dump(exclude_none=True))
