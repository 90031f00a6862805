"""HTTP service: session lifecycle, synchronous turns, SSE turn streaming,
memory and trace read paths, and backend health."""

from __future__ import annotations

import json
import logging
import queue
import threading

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .errors import (
    AuthError,
    BackendUnavailable,
    ConfigError,
    ContractError,
    DumaError,
    NoScriptMatch,
    SessionNotFound,
    SlowEpisodeFailed,
    TurnInProgress,
    TurnNotFound,
    UnknownBackend,
)
from .memory import step_to_dict
from .orchestrator import Orchestrator, TraceView
from .types import FastOutput, SlowTrace, TurnResult

log = logging.getLogger(__name__)

_STATUS = {
    TurnInProgress: 409,
    SessionNotFound: 404,
    TurnNotFound: 404,
    UnknownBackend: 400,
    ConfigError: 400,
    BackendUnavailable: 502,
    AuthError: 502,
    ContractError: 502,
    NoScriptMatch: 502,
    SlowEpisodeFailed: 502,
}


def _status_for(exc: DumaError) -> int:
    return _STATUS.get(type(exc), 500)


def fast_output_to_dict(output: FastOutput) -> dict:
    return {"invoke": output.invoke, "response": output.response, "raw": output.raw}


def trace_to_dict(trace: SlowTrace) -> dict:
    return {
        "steps": [step_to_dict(s) for s in trace.steps],
        "final_result": trace.final_result,
        "terminated_by": trace.terminated_by,
    }


def turn_result_to_dict(result: TurnResult, turn_index: int, exposed: bool) -> dict:
    return {
        "turn": turn_index,
        "o_f": fast_output_to_dict(result.o_f),
        "o_s": trace_to_dict(result.o_s) if result.o_s is not None and exposed else None,
        "o_b": fast_output_to_dict(result.o_b) if result.o_b is not None else None,
        "user_visible_reply": result.user_visible_reply,
    }


def trace_view_to_dict(view: TraceView) -> dict:
    return {
        "turn": view.turn_index,
        "question": view.question,
        "o_f": fast_output_to_dict(view.o_f) if view.o_f is not None else None,
        "o_s": trace_to_dict(view.o_s) if view.o_s is not None else None,
        "o_b": fast_output_to_dict(view.o_b) if view.o_b is not None else None,
        "user_visible_reply": view.user_visible_reply,
        "failed": view.failed,
        "events": view.events,
    }


class CreateSessionBody(BaseModel):
    config_name: str = "default"


class TurnBody(BaseModel):
    question: str


def _sse_frame(name: str, data: dict) -> str:
    return f"event: {name}\ndata: {json.dumps(data, ensure_ascii=False)}\n\n"


def create_app(orchestrator: Orchestrator) -> FastAPI:
    app = FastAPI(title="duma", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(DumaError)
    async def on_duma_error(request: Request, exc: DumaError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody) -> dict:
        return {"session_id": orchestrator.create_session_named(body.config_name)}

    @app.post("/v1/sessions/{session_id}/turns")
    def run_turn(session_id: str, body: TurnBody, request: Request):
        exposed = orchestrator.expose_o_s(session_id)
        if "text/event-stream" in request.headers.get("accept", ""):
            return _stream_turn(session_id, body.question, exposed)

        events: list[tuple[str, dict]] = []
        result = orchestrator.run_turn(
            session_id, body.question, on_event=lambda name, data: events.append((name, data))
        )
        turn_index = events[0][1]["turn"]
        return turn_result_to_dict(result, turn_index, exposed)

    def _stream_turn(session_id: str, question: str, exposed: bool) -> StreamingResponse:
        frames: queue.Queue[tuple[str, dict] | None] = queue.Queue()
        saw_error = False

        def on_event(name: str, data: dict) -> None:
            nonlocal saw_error
            if name == "error":
                saw_error = True
            if not exposed:
                if name == "slow_step":
                    return
                if name == "slow_done":
                    data = {k: v for k, v in data.items() if k != "final_result"}
            frames.put((name, data))

        def worker() -> None:
            try:
                orchestrator.run_turn(session_id, question, on_event=on_event)
            except Exception as exc:
                if not saw_error:
                    frames.put(("error", {"error": type(exc).__name__, "message": str(exc)}))
            finally:
                frames.put(None)

        threading.Thread(target=worker, daemon=True).start()

        def generate():
            while True:
                item = frames.get()
                if item is None:
                    return
                yield _sse_frame(*item)

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/v1/sessions/{session_id}/memory")
    def get_memory(session_id: str) -> dict:
        return orchestrator.get_memory(session_id)

    @app.get("/v1/sessions/{session_id}/turns/{turn_index}/trace")
    def get_trace(session_id: str, turn_index: int, debug: bool = False) -> dict:
        return trace_view_to_dict(orchestrator.get_trace(session_id, turn_index, debug=debug))

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "backends": {
                name: {"ok": status.ok, "detail": status.detail}
                for name, status in orchestrator.health().items()
            }
        }

    return app
