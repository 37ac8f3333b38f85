"""HTTP/JSON control surface over a running system.

Thin by design: every handler delegates to GridSliceSystem, so the API adds
no business rules of its own. The operator console and the test suite drive
exactly these endpoints.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse

from .errors import (
    GridSliceError,
    UnboundSource,
    UnknownId,
    UnknownInstance,
    UnknownLink,
    VersionMismatch,
)
from .runtime import GridSliceSystem

NOT_FOUND = (UnknownId, UnknownLink, UnknownInstance, UnboundSource)


def _http_error(exc: GridSliceError) -> HTTPException:
    status = 404 if isinstance(exc, NOT_FOUND) else 400
    return HTTPException(
        status_code=status,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


def create_app(system: GridSliceSystem, console_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="gridslice", version="0.1.0")

    @app.exception_handler(GridSliceError)
    async def on_domain_error(_request: Request, exc: GridSliceError):
        err = _http_error(exc)
        return JSONResponse(status_code=err.status_code, content=err.detail)

    @app.post("/intents")
    def submit_intent(body: dict):
        stakeholder = body.get("stakeholder", "DSO")
        text = body.get("text", "")
        dry_run = bool(body.get("dry_run", False))
        return system.submit_intent(stakeholder, text, dry_run=dry_run)

    @app.get("/intents")
    def list_intents():
        return system.list_intents()

    @app.get("/slices")
    def list_slices():
        return system.list_slices()

    @app.get("/slices/{nsi_id}")
    def get_slice(nsi_id: str):
        return system.get_slice(nsi_id)

    @app.get("/slices/{nsi_id}/kpi")
    def get_kpi(nsi_id: str, start: float | None = None, end: float | None = None):
        return system.get_kpi(nsi_id, start, end)

    @app.get("/profiles")
    def list_profiles():
        return system.list_profiles()

    @app.get("/profiles/{intent_id}/{seq}/model")
    def get_service_model(intent_id: str, seq: str):
        return system.get_service_model(f"{intent_id}/{seq}")

    @app.post("/faults")
    def inject_fault(body: dict):
        return system.execute("inject_fault", body)

    @app.post("/slas")
    def register_sla(body: dict):
        return system.execute("register_sla", {"sla": body})

    @app.delete("/slas/{sla_id}")
    def invalidate_sla(sla_id: str):
        return system.execute("invalidate_sla", {"sla_id": sla_id})

    @app.get("/slas")
    def list_slas():
        return system.sla_registry.to_state()

    @app.get("/events")
    def list_events(after: int = 0, limit: int | None = None, wait: float = 0.0):
        deadline = time.monotonic() + min(wait, 25.0)
        records = system.events_after(after, limit)
        while not records and time.monotonic() < deadline:
            time.sleep(0.05)
            records = system.events_after(after, limit)
        body = "\n".join(r.to_line() for r in records)
        return PlainTextResponse(
            content=body + ("\n" if body else ""),
            media_type="application/x-ndjson",
        )

    @app.post("/snapshot")
    def snapshot():
        return JSONResponse(content=system.snapshot_doc())

    @app.post("/restore")
    def restore(body: dict):
        snapshot_doc = body.get("snapshot")
        if not isinstance(snapshot_doc, dict):
            raise _http_error(VersionMismatch("restore body must carry a snapshot document"))
        version = system.restore(snapshot_doc)
        return {"version": version}

    @app.get("/topology")
    def topology():
        return system.vim.to_state()

    @app.get("/clock")
    def clock():
        return {"sim_time": system.sim.clock, "scenario": getattr(system.scenario, "name", None)}

    if console_dir:
        root = Path(console_dir)

        @app.get("/")
        def console_index():
            return FileResponse(root / "index.html")

        @app.get("/static/{name}")
        def console_asset(name: str):
            target = (root / name).resolve()
            if not str(target).startswith(str(root.resolve())) or not target.exists():
                raise HTTPException(status_code=404, detail="not found")
            return FileResponse(target)

    return app
