"""Dialogue memory: in-process session records plus the append-only JSONL store."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Callable
from datetime import datetime, timezone
from pathlib import Path

from .errors import InvalidRecord, OutOfOrderTurn, SessionNotFound, StorageFailure
from .types import (
    Entry,
    FastOutput,
    FastTurn,
    MemoryRecord,
    SlowInput,
    SlowStep,
    SlowTrace,
    SlowTraceRecord,
    UserTurn,
)

log = logging.getLogger(__name__)

Clock = Callable[[], str]

KIND_USER = "user"
KIND_FAST = "fast"
KIND_SLOW_INPUT = "slow_input"
KIND_SLOW_TRACE = "slow_trace"


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class SessionMemory:
    """Ordered, append-only record list for one session."""

    def __init__(self, session_id: str, records: list[MemoryRecord] | None = None):
        self.session_id = session_id
        self.records: list[MemoryRecord] = []
        for record in records or []:
            self.append(record)

    def validate(self, record: MemoryRecord) -> None:
        """Raise unless the record may legally be appended next."""
        if self.records and record.turn_index < self.records[-1].turn_index:
            raise OutOfOrderTurn(
                f"turn {record.turn_index} after turn {self.records[-1].turn_index}"
            )
        if isinstance(record.entry, SlowInput):
            same_turn = [r for r in self.records if r.turn_index == record.turn_index]
            if not any(
                isinstance(r.entry, FastTurn) and r.entry.output.invoke for r in same_turn
            ):
                raise InvalidRecord(
                    "slow input requires a preceding invoking fast output in the same turn"
                )

    def append(self, record: MemoryRecord) -> None:
        self.validate(record)
        self.records.append(record)

    def last_turn_index(self) -> int | None:
        return self.records[-1].turn_index if self.records else None

    def next_turn_index(self) -> int:
        last = self.last_turn_index()
        return 0 if last is None else last + 1

    def turn_records(self, turn_index: int) -> list[MemoryRecord]:
        return [r for r in self.records if r.turn_index == turn_index]


# -- JSON codec -------------------------------------------------------------------

def step_to_dict(step: SlowStep) -> dict:
    d: dict = {"kind": step.kind, "payload": step.payload}
    if step.kind == "Act":
        d["tool_name"] = step.tool_name
        d["tool_args"] = step.tool_args
    return d


def step_from_dict(d: dict) -> SlowStep:
    return SlowStep(
        kind=d["kind"],
        payload=d["payload"],
        tool_name=d.get("tool_name"),
        tool_args=d.get("tool_args"),
    )


def record_to_dict(record: MemoryRecord) -> dict:
    entry = record.entry
    if isinstance(entry, UserTurn):
        kind, payload = KIND_USER, {"question": entry.question}
    elif isinstance(entry, FastTurn):
        out = entry.output
        kind, payload = KIND_FAST, {
            "invoke": out.invoke,
            "response": out.response,
            "raw": out.raw,
        }
    elif isinstance(entry, SlowInput):
        kind, payload = KIND_SLOW_INPUT, {"result": entry.result}
    elif isinstance(entry, SlowTraceRecord):
        trace = entry.trace
        kind, payload = KIND_SLOW_TRACE, {
            "steps": [step_to_dict(s) for s in trace.steps],
            "final_result": trace.final_result,
            "terminated_by": trace.terminated_by,
        }
    else:
        raise InvalidRecord(f"unknown entry type: {type(entry).__name__}")
    return {"turn": record.turn_index, "kind": kind, "payload": payload, "ts": record.ts}


def record_from_dict(d: dict) -> MemoryRecord:
    kind = d["kind"]
    payload = d["payload"]
    entry: Entry
    if kind == KIND_USER:
        entry = UserTurn(payload["question"])
    elif kind == KIND_FAST:
        entry = FastTurn(FastOutput(payload["invoke"], payload["response"], payload["raw"]))
    elif kind == KIND_SLOW_INPUT:
        entry = SlowInput(payload["result"])
    elif kind == KIND_SLOW_TRACE:
        entry = SlowTraceRecord(
            SlowTrace(
                steps=tuple(step_from_dict(s) for s in payload["steps"]),
                final_result=payload["final_result"],
                terminated_by=payload["terminated_by"],
            )
        )
    else:
        raise InvalidRecord(f"unknown record kind: {kind!r}")
    return MemoryRecord(turn_index=d["turn"], entry=entry, ts=d["ts"])


def encode_record(record: MemoryRecord) -> str:
    return json.dumps(record_to_dict(record), ensure_ascii=False, separators=(",", ":"))


# -- persistence --------------------------------------------------------------------

class SessionStore:
    """One append-only JSONL file per session under ``<data_dir>/sessions``.

    Appends are flushed and fsynced before returning.  Loading tolerates a
    truncated final line (crash mid-append) by ignoring it.
    """

    def __init__(self, data_dir: Path | str, clock: Clock | None = None):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.clock: Clock = clock or utc_now

    def path_for(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def exists(self, session_id: str) -> bool:
        return self.path_for(session_id).exists()

    def create(self, session_id: str) -> Path:
        path = self.path_for(session_id)
        try:
            self.sessions_dir.mkdir(parents=True, exist_ok=True)
            path.touch()
        except OSError as exc:
            raise StorageFailure(f"cannot create session file: {exc}") from exc
        return path

    def write(self, session_id: str, record: MemoryRecord) -> None:
        """Durably append one record: written, flushed, and fsynced before returning."""
        line = encode_record(record) + "\n"
        try:
            with open(self.path_for(session_id), "a", encoding="utf-8") as f:
                f.write(line)
                f.flush()
                os.fsync(f.fileno())
        except OSError as exc:
            raise StorageFailure(f"append failed: {exc}") from exc

    def append(self, session_id: str, turn_index: int, entry: Entry) -> MemoryRecord:
        """Stamp, persist, and return a new record.  Callers validate ordering
        against their in-memory SessionMemory before calling."""
        record = MemoryRecord(turn_index=turn_index, entry=entry, ts=self.clock())
        self.write(session_id, record)
        return record

    def load(self, session_id: str) -> SessionMemory:
        path = self.path_for(session_id)
        if not path.exists():
            raise SessionNotFound(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageFailure(f"read failed: {exc}") from exc
        memory = SessionMemory(session_id)
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        for i, line in enumerate(lines):
            try:
                memory.append(record_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                if i == len(lines) - 1:
                    log.warning("ignoring truncated final line of %s", path.name)
                    break
                raise InvalidRecord(f"corrupt record at line {i + 1}: {exc}") from exc
        return memory

    def list_sessions(self) -> list[str]:
        if not self.sessions_dir.exists():
            return []
        return sorted(p.stem for p in self.sessions_dir.glob("*.jsonl"))
