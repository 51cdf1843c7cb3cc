"""Optional HTTP binding for the session protocol.

The core protocol is transport-agnostic; this module maps it onto a
small REST surface for deployments that want a real server instead of
an in-process bridge. FastAPI is an optional dependency: install the
``server`` extra to use it.

Note: route signatures here must keep runtime-evaluated annotations
(no postponed annotations in this module) or the framework cannot see
the request parameter types.
"""
from .errors import CorefError, IncompleteStateError
from .session import SessionService, error_code, view_delta


def create_app(service: SessionService | None = None):
    try:
        from fastapi import FastAPI, HTTPException, Request
        from fastapi.responses import PlainTextResponse
    except ImportError as exc:  # pragma: no cover - exercised only without extras
        raise ImportError(
            "the HTTP binding needs the 'server' extra "
            "(pip install corefkit[server])") from exc

    svc = service or SessionService()
    app = FastAPI(title="coreference annotation sessions")

    def fail(exc: CorefError) -> HTTPException:
        status = 409 if isinstance(exc, IncompleteStateError) else 400
        return HTTPException(status_code=status,
                             detail={"code": error_code(exc), "message": str(exc)})

    @app.post("/sessions")
    async def open_session(request: Request):
        config = await request.json()
        try:
            session = svc.open(config)
        except CorefError as exc:
            raise fail(exc)
        return {"session_id": session.session_id,
                "view_delta": view_delta(None, session.view())}

    @app.post("/sessions/{session_id}/messages")
    async def handle_message(session_id: str, request: Request):
        body = await request.json()
        message = {"session_id": session_id, **body}
        try:
            return svc.handle(message)
        except CorefError as exc:
            raise fail(exc)

    @app.get("/sessions/{session_id}/view")
    async def view(session_id: str):
        try:
            return svc.get(session_id).view()
        except CorefError as exc:
            raise fail(exc)

    @app.get("/sessions/{session_id}/snapshot")
    async def snapshot(session_id: str):
        try:
            text = svc.snapshot(session_id)
        except CorefError as exc:
            raise fail(exc)
        # canonical text, not re-serialized JSON: byte equality matters here
        return PlainTextResponse(text, media_type="application/json")

    @app.post("/sessions/restore")
    async def restore(request: Request):
        data = await request.json()
        try:
            session = svc.restore(data)
        except CorefError as exc:
            raise fail(exc)
        return {"session_id": session.session_id,
                "view_delta": view_delta(None, session.view())}

    @app.get("/sessions/{session_id}/export")
    async def export(session_id: str, format: str = "conll"):
        try:
            payload = svc.export(session_id, format)
        except CorefError as exc:
            raise fail(exc)
        media = "application/json" if format == "json" else "text/plain"
        return PlainTextResponse(payload, media_type=media)

    return app
