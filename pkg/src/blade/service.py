"""HTTP facade over the decision pipeline.

Endpoints (all JSON unless noted):

    GET  /health        liveness plus current KB version
    GET  /kb            the full knowledge base snapshot
    POST /evaluate      RequirementSet document -> ranking
    POST /whatif        {requirements, criterion, grid} -> sensitivity sweep
    POST /simulate      {params, workload, duration} -> simulation result
    POST /bpmn/profile  BPMN XML body (application/xml), ?rate= -> profile
    POST /kb/refine     {profile_id, params, workload} -> {kb_version}

Request handling is stateless over an immutable KB snapshot; only
``POST /kb/refine`` replaces the snapshot, atomically. Error responses share
one shape: {"status", "code", "message", "findings"}.
"""

from __future__ import annotations

import functools
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .bpmn import build_profile, parse_bpmn, profile_to_dict
from .errors import (
    BpmnError,
    KBError,
    MatrixError,
    RequirementsError,
    SimulationError,
    UnknownProfileError,
    ValidationFailure,
)
from .jsonutil import canonical_json
from .kb import KnowledgeBase, knowledge_base_to_dict, load_knowledge_base
from .mcdm import evaluate, ranking_to_dict, sensitivity, sensitivity_to_dict
from .perfsim import (
    chain_params_from_dict,
    refine_intervals,
    sim_result_to_dict,
    simulate,
    workload_from_dict,
)
from .requirements import requirements_from_dict


class _BadRequest(ValueError):
    """Request body or query parameters do not match the endpoint contract."""


class _KbSnapshot:
    """Current KB; reads are lock-free, replacement is serialized."""

    def __init__(self, kb: KnowledgeBase):
        self._kb = kb
        self._lock = threading.Lock()

    def get(self) -> KnowledgeBase:
        return self._kb

    def swap(self, refine):
        with self._lock:
            self._kb = refine(self._kb)
            return self._kb


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status,
        media_type="application/json",
    )


def _error(status: int, code: str, message: str, findings=None) -> Response:
    return _json_response(
        {
            "status": status,
            "code": code,
            "message": message,
            "findings": [
                {"severity": f.severity, "message": f.message, "where": f.where}
                for f in (findings or [])
            ],
        },
        status=status,
    )


_ERROR_CODES = (
    (KBError, "invalid-kb"),
    (RequirementsError, "invalid-requirements"),
    (BpmnError, "invalid-bpmn"),
    (SimulationError, "invalid-simulation"),
    (MatrixError, "invalid-matrix"),
    (_BadRequest, "bad-request"),
)


def _api(handler):
    """Wrap an endpoint: payload in, canonical JSON out, errors mapped."""

    @functools.wraps(handler)
    async def wrapped(request: Request) -> Response:
        try:
            return _json_response(await handler(request))
        except ValidationFailure as exc:
            return _error(422, "validation-failed", str(exc), exc.findings)
        except UnknownProfileError as exc:
            return _error(404, "unknown-profile", str(exc))
        except json.JSONDecodeError as exc:
            return _error(400, "malformed-json", f"request body is not valid JSON: {exc}")
        except Exception as exc:
            for exc_type, code in _ERROR_CODES:
                if isinstance(exc, exc_type):
                    return _error(400, code, str(exc))
            return _error(500, "internal-error", f"unexpected failure: {exc!r}")

    return wrapped


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    document = json.loads(raw.decode("utf-8"))
    if not isinstance(document, dict):
        raise _BadRequest("request body must be a JSON object")
    return document


def _require_keys(document: dict, keys: tuple) -> None:
    missing = [k for k in keys if k not in document]
    if missing:
        raise _BadRequest(f"request body missing key(s): {missing}")


def create_app(kb: KnowledgeBase, ui_dir: str | Path | None = None) -> FastAPI:
    """Assemble the service around an already-loaded knowledge base."""
    snapshot = _KbSnapshot(kb)
    app = FastAPI(title="blade", docs_url=None, redoc_url=None)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException) -> Response:
        # keep the documented status set: anything exotic folds into 400/500
        status = exc.status_code if exc.status_code in {400, 404, 422, 500} \
            else (400 if exc.status_code < 500 else 500)
        code = {404: "not-found", 405: "method-not-allowed"}.get(
            exc.status_code, "bad-request" if status < 500 else "internal-error"
        )
        return _error(status, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception) -> Response:
        return _error(500, "internal-error", f"unexpected failure: {exc!r}")

    @app.get("/health")
    @_api
    async def health(request: Request):
        return {"status": "ok", "kb_version": snapshot.get().kb_version}

    @app.get("/kb")
    @_api
    async def get_kb(request: Request):
        return knowledge_base_to_dict(snapshot.get())

    @app.post("/evaluate")
    @_api
    async def post_evaluate(request: Request):
        reqs = requirements_from_dict(await _json_body(request))
        return ranking_to_dict(evaluate(snapshot.get(), reqs))

    @app.post("/whatif")
    @_api
    async def post_whatif(request: Request):
        document = await _json_body(request)
        _require_keys(document, ("requirements", "criterion", "grid"))
        reqs = requirements_from_dict(document["requirements"])
        grid = document["grid"]
        if not isinstance(grid, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool) for w in grid
        ):
            raise _BadRequest("grid must be a list of numbers")
        points = sensitivity(snapshot.get(), reqs, str(document["criterion"]), [float(w) for w in grid])
        return sensitivity_to_dict(points)

    @app.post("/simulate")
    @_api
    async def post_simulate(request: Request):
        document = await _json_body(request)
        _require_keys(document, ("params", "workload", "duration"))
        duration = document["duration"]
        if isinstance(duration, bool) or not isinstance(duration, (int, float)):
            raise _BadRequest("duration must be a number of seconds")
        result = simulate(
            chain_params_from_dict(document["params"]),
            workload_from_dict(document["workload"]),
            float(duration),
        )
        return sim_result_to_dict(result)

    @app.post("/bpmn/profile")
    @_api
    async def post_bpmn_profile(request: Request):
        raw = await request.body()
        try:
            document = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BpmnError(f"BPMN body is not valid UTF-8: {exc}") from None
        rate_raw = request.query_params.get("rate", "1.0")
        try:
            rate = float(rate_raw)
        except ValueError:
            raise _BadRequest(f"rate query parameter must be a number, got {rate_raw!r}") from None
        return profile_to_dict(build_profile(parse_bpmn(document), rate))

    @app.post("/kb/refine")
    @_api
    async def post_kb_refine(request: Request):
        document = await _json_body(request)
        _require_keys(document, ("profile_id", "params", "workload"))
        profile_id = str(document["profile_id"])
        params = chain_params_from_dict(document["params"])
        workload = workload_from_dict(document["workload"])
        refined = snapshot.swap(
            lambda kb: refine_intervals(kb, profile_id, {profile_id: params}, workload)
        )
        return {"kb_version": refined.kb_version}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    kb_path: str | Path,
    host: str = "127.0.0.1",
    port: int = 8000,
    ui_dir: str | Path | None = None,
):
    """Load the KB from disk and run the service (blocks until shutdown)."""
    import uvicorn

    kb = load_knowledge_base(Path(kb_path).read_text(encoding="utf-8"))
    uvicorn.run(create_app(kb, ui_dir=ui_dir), host=host, port=port)
