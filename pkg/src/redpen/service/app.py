"""HTTP surface over the grading service (FastAPI).

Thin by design: routes parse/serialize and delegate to GradingService;
domain errors map to status codes (ServiceError carries its own,
validation/parse problems are 400, provider-chain failures 502).
"""

from __future__ import annotations

from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from .._native import BACKEND_NAME
from ..domain import Condition, load_assignment
from ..errors import (
    AnchorError,
    ParseError,
    PipelineError,
    ProviderError,
    ServiceError,
    ValidationError,
)
from ..pipeline import prompt_version
from .core import GradingService


def create_app(service: GradingService) -> FastAPI:
    app = FastAPI(title="redpen grading service")

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc)})

    @app.exception_handler(ValidationError)
    async def _validation_error(_: Request, exc: ValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ParseError)
    async def _parse_error(_: Request, exc: ParseError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(AnchorError)
    async def _anchor_error(_: Request, exc: AnchorError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(PipelineError)
    async def _pipeline_error(_: Request, exc: PipelineError) -> JSONResponse:
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.exception_handler(ProviderError)
    async def _provider_error(_: Request, exc: ProviderError) -> JSONResponse:
        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "lcs_backend": BACKEND_NAME,
            "prompt_version": prompt_version(),
        }

    # -- corpus ----------------------------------------------------------

    @app.post("/assignments")
    def add_assignment(body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        assignment = load_assignment(body)
        service.store.add_assignment(assignment)
        return {"assignment_id": assignment.id}

    @app.get("/assignments/{assignment_id}")
    def get_assignment(assignment_id: str) -> dict[str, Any]:
        return service.store.assignment(assignment_id).to_dict()

    @app.get("/assignments/{assignment_id}/reference")
    def reference(assignment_id: str) -> dict[str, Any]:
        return service.reference_sheet(assignment_id)

    @app.post("/drafts/import")
    def import_drafts(body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        records = body.get("records")
        if not isinstance(records, list):
            raise ServiceError("body must carry a 'records' list", status_code=400)
        return service.import_drafts(records)

    @app.post("/roster")
    def set_roster(body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        entries = body.get("entries")
        if not isinstance(entries, list):
            raise ServiceError("body must carry an 'entries' list", status_code=400)
        for entry in entries:
            service.store.set_condition(
                str(entry["student_id"]),
                str(entry["assignment_id"]),
                Condition(entry["condition"]),
            )
        return {"entries": len(entries)}

    # -- sessions ---------------------------------------------------------

    @app.post("/sessions/{essay_id}/open")
    def open_session(essay_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        return service.open_session(essay_id, _grader(body))

    @app.get("/sessions/{essay_id}")
    def get_session(essay_id: str) -> dict[str, Any]:
        return service.session_view(essay_id)

    @app.post("/sessions/{essay_id}/actions")
    def apply_action(essay_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        action = body.get("action")
        if not isinstance(action, str):
            raise ServiceError("body must carry an 'action' string", status_code=400)
        params = body.get("params") or {}
        if not isinstance(params, dict):
            raise ServiceError("'params' must be an object", status_code=400)
        return service.apply_action(essay_id, _grader(body), action, params)

    @app.post("/sessions/{essay_id}/close")
    def close_session(essay_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        return service.close_session(essay_id, _grader(body))

    @app.post("/sessions/{essay_id}/finalize")
    def finalize(essay_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        export, warnings = service.finalize_and_export(essay_id, _grader(body))
        return {"export": export.to_dict(), "warnings": warnings}

    # -- context & analytics ------------------------------------------------

    @app.get("/essays/{essay_id}/final-context")
    def final_context(essay_id: str) -> dict[str, Any]:
        return service.final_draft_context(essay_id)

    @app.get("/essays/{essay_id}/score-suggestion")
    def score_suggestion(essay_id: str) -> dict[str, Any]:
        return service.suggest_score(essay_id)

    @app.get("/assignments/{assignment_id}/analytics/usage")
    def usage(assignment_id: str) -> dict[str, Any]:
        return service.usage_report(assignment_id)

    @app.get("/assignments/{assignment_id}/analytics/adoption")
    def adoption(assignment_id: str) -> dict[str, Any]:
        return service.adoption_report(assignment_id)

    @app.get("/exports/{essay_id}")
    def get_export(essay_id: str) -> dict[str, Any]:
        export = service.store.export(essay_id)
        if export is None:
            raise ServiceError(f"no export for essay {essay_id!r}", status_code=404)
        return export

    return app


def _grader(body: dict[str, Any]) -> str:
    grader_id = body.get("grader_id")
    if not isinstance(grader_id, str) or not grader_id:
        raise ServiceError("body must carry a 'grader_id'", status_code=400)
    return grader_id
