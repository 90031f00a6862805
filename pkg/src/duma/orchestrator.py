"""The turn engine: routes each user utterance through the fast mind, gates the
slow mind on the invoke flag, and keeps the per-session dialogue memory durable."""

from __future__ import annotations

import logging
import threading
import uuid
from dataclasses import dataclass, field
from typing import Callable

from .backends import HealthStatus, ModelBackend
from .errors import SessionNotFound, TurnInProgress, TurnNotFound, UnknownBackend
from .fast_mind import FastMindConfig, fast_step
from .memory import MemoryRecord, SessionMemory, SessionStore, record_to_dict
from .slow_mind import SlowMindConfig, run_slow_episode
from .toolkit import ToolRegistry
from .types import (
    FastInput,
    FastOutput,
    FastTurn,
    SlowInput,
    SlowStep,
    SlowTrace,
    SlowTraceRecord,
    TurnResult,
    UserTurn,
)

log = logging.getLogger(__name__)

EventCallback = Callable[[str, dict], None]

EVENT_FAST_REPLY = "fast_reply"
EVENT_SLOW_STEP = "slow_step"
EVENT_SLOW_DONE = "slow_done"
EVENT_FINAL_REPLY = "final_reply"
EVENT_ERROR = "error"


@dataclass(frozen=True, slots=True)
class SessionConfig:
    fast_backend: str
    slow_backend: str
    fast_config: FastMindConfig
    slow_config: SlowMindConfig
    expose_o_s: bool = True
    max_slow_invocations_per_turn: int = 1

    def __post_init__(self) -> None:
        if self.max_slow_invocations_per_turn < 1:
            raise ValueError("max_slow_invocations_per_turn must be >= 1")


@dataclass
class _SessionState:
    memory: SessionMemory
    config: SessionConfig
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass(frozen=True)
class TraceView:
    """A turn reconstructed from persisted records; shape mirrors TurnResult."""

    turn_index: int
    question: str | None
    o_f: FastOutput | None
    o_s: SlowTrace | None
    o_b: FastOutput | None
    user_visible_reply: str | None
    failed: bool
    events: list[dict]


def _step_event(turn_index: int, step: SlowStep) -> dict:
    data: dict = {"turn": turn_index, "kind": step.kind, "payload": step.payload}
    if step.tool_name is not None:
        data["tool_name"] = step.tool_name
        data["tool_args"] = step.tool_args
    return data


class Orchestrator:
    def __init__(
        self,
        backends: dict[str, ModelBackend],
        tools: ToolRegistry,
        store: SessionStore,
        session_configs: dict[str, SessionConfig],
    ):
        self.backends = backends
        self.tools = tools
        self.store = store
        self.session_configs = session_configs
        self._sessions: dict[str, _SessionState] = {}
        self._registry_lock = threading.Lock()

    # -- sessions ----------------------------------------------------------------

    def create_session(self, config: SessionConfig) -> str:
        for ref in (config.fast_backend, config.slow_backend):
            if ref not in self.backends:
                raise UnknownBackend(ref)
        session_id = uuid.uuid4().hex
        self.store.create(session_id)
        with self._registry_lock:
            self._sessions[session_id] = _SessionState(
                memory=SessionMemory(session_id), config=config
            )
        return session_id

    def create_session_named(self, config_name: str = "default") -> str:
        if config_name not in self.session_configs:
            raise SessionNotFound(f"no session config named {config_name!r}")
        return self.create_session(self.session_configs[config_name])

    def _state(self, session_id: str) -> _SessionState:
        with self._registry_lock:
            state = self._sessions.get(session_id)
            if state is None:
                if not self.store.exists(session_id):
                    raise SessionNotFound(session_id)
                state = _SessionState(
                    memory=self.store.load(session_id),
                    config=self.session_configs.get("default") or next(iter(self.session_configs.values())),
                )
                self._sessions[session_id] = state
        return state

    # -- the turn ----------------------------------------------------------------

    def _append(self, state: _SessionState, turn_index: int, entry) -> MemoryRecord:
        record = MemoryRecord(turn_index=turn_index, entry=entry, ts=self.store.clock())
        state.memory.validate(record)
        self.store.write(state.memory.session_id, record)
        state.memory.append(record)
        return record

    def run_turn(self, session_id: str, question: str, on_event: EventCallback | None = None) -> TurnResult:
        state = self._state(session_id)
        if not state.lock.acquire(blocking=False):
            raise TurnInProgress(session_id)
        try:
            return self._run_turn_locked(state, question, on_event or (lambda name, data: None))
        finally:
            state.lock.release()

    def _run_turn_locked(self, state: _SessionState, question: str, emit: EventCallback) -> TurnResult:
        cfg = state.config
        fast = self.backends[cfg.fast_backend]
        slow = self.backends[cfg.slow_backend]
        t = state.memory.next_turn_index()
        try:
            self._append(state, t, UserTurn(question))
            o_f = fast_step(state.memory, FastInput.user(question), fast, cfg.fast_config)
            self._append(state, t, FastTurn(o_f))
            emit(EVENT_FAST_REPLY, {"turn": t, "invoke": o_f.invoke, "response": o_f.response})

            o_s: SlowTrace | None = None
            o_b: FastOutput | None = None
            current = o_f
            invocations = 0
            while current.invoke and invocations < cfg.max_slow_invocations_per_turn:
                trace = run_slow_episode(
                    state.memory,
                    question,
                    slow,
                    self.tools,
                    cfg.slow_config,
                    on_step=lambda step: emit(EVENT_SLOW_STEP, _step_event(t, step)),
                )
                invocations += 1
                self._append(state, t, SlowTraceRecord(trace))
                emit(EVENT_SLOW_DONE, {
                    "turn": t,
                    "final_result": trace.final_result,
                    "terminated_by": trace.terminated_by,
                    "steps": len(trace.steps),
                })
                self._append(state, t, SlowInput(trace.final_result))
                current = fast_step(
                    state.memory, FastInput.slow_result(trace.final_result), fast, cfg.fast_config
                )
                self._append(state, t, FastTurn(current))
                emit(EVENT_FINAL_REPLY, {"turn": t, "response": current.response})
                o_s, o_b = trace, current
            if current.invoke:
                log.warning(
                    "turn %d: invoke flag on the final fast output ignored "
                    "(budget of %d slow invocation(s) spent)",
                    t, cfg.max_slow_invocations_per_turn,
                )
        except Exception as exc:
            emit(EVENT_ERROR, {"turn": t, "error": type(exc).__name__, "message": str(exc)})
            raise
        reply = o_b.response if o_b is not None else o_f.response
        return TurnResult(o_f=o_f, o_s=o_s, o_b=o_b, user_visible_reply=reply)

    # -- read paths ---------------------------------------------------------------

    def get_memory(self, session_id: str) -> dict:
        state = self._state(session_id)
        records = state.memory.records
        turns = sorted({r.turn_index for r in records})
        failed = [t for t in turns if self._parse_turn(state, t)[4]]
        return {
            "session_id": session_id,
            "records": [record_to_dict(r) for r in records],
            "failed_turns": failed,
        }

    def _parse_turn(self, state: _SessionState, turn_index: int):
        records = state.memory.turn_records(turn_index)
        if not records:
            raise TurnNotFound(f"turn {turn_index}")
        question = next(
            (r.entry.question for r in records if isinstance(r.entry, UserTurn)), None
        )
        fasts = [r.entry.output for r in records if isinstance(r.entry, FastTurn)]
        traces = [r.entry.trace for r in records if isinstance(r.entry, SlowTraceRecord)]
        o_f = fasts[0] if fasts else None
        o_s = traces[-1] if traces else None
        o_b = fasts[-1] if o_f is not None and o_f.invoke and len(fasts) > 1 else None
        failed = o_f is None or (o_f.invoke and o_b is None)
        return question, o_f, o_s, o_b, failed

    def get_trace(self, session_id: str, turn_index: int, debug: bool = False) -> TraceView:
        """Rebuild a turn purely from persisted records.  `expose_o_s` governs
        whether the slow trace appears; debug=True bypasses it."""
        state = self._state(session_id)
        question, o_f, o_s, o_b, failed = self._parse_turn(state, turn_index)
        exposed = debug or state.config.expose_o_s

        events: list[dict] = []
        if o_f is not None:
            events.append({
                "event": EVENT_FAST_REPLY,
                "data": {"turn": turn_index, "invoke": o_f.invoke, "response": o_f.response},
            })
        if o_s is not None:
            if exposed:
                for step in o_s.steps:
                    events.append({"event": EVENT_SLOW_STEP, "data": _step_event(turn_index, step)})
            done: dict = {"turn": turn_index, "terminated_by": o_s.terminated_by, "steps": len(o_s.steps)}
            if exposed:
                done["final_result"] = o_s.final_result
            events.append({"event": EVENT_SLOW_DONE, "data": done})
        if o_b is not None:
            events.append({
                "event": EVENT_FINAL_REPLY,
                "data": {"turn": turn_index, "response": o_b.response},
            })

        if o_b is not None:
            reply: str | None = o_b.response
        else:
            reply = o_f.response if o_f is not None else None
        return TraceView(
            turn_index=turn_index,
            question=question,
            o_f=o_f,
            o_s=o_s if exposed else None,
            o_b=o_b,
            user_visible_reply=reply,
            failed=failed,
            events=events,
        )

    def expose_o_s(self, session_id: str) -> bool:
        return self._state(session_id).config.expose_o_s

    def health(self) -> dict[str, HealthStatus]:
        return {name: backend.health() for name, backend in self.backends.items()}
