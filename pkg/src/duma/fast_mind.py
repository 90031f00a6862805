"""Fast mind: prompt assembly over dialogue memory and single-step generation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import ContextOverflow, MalformedFastOutput
from .grammar import degraded_fast_output, parse_fast_output, serialize_fast_input
from .memory import SessionMemory
from .types import ChatTemplate, FastInput, FastOutput, FastTurn, SlowInput, UserTurn

log = logging.getLogger(__name__)

DROP_OLDEST_ROUNDS = "drop_oldest_rounds"
FAIL = "fail"
TRUNCATION_POLICIES = (DROP_OLDEST_ROUNDS, FAIL)


@dataclass(frozen=True, slots=True)
class FastMindConfig:
    template: ChatTemplate
    max_context_chars: int = 32768
    truncation_policy: str = DROP_OLDEST_ROUNDS

    def __post_init__(self) -> None:
        if self.max_context_chars <= 0:
            raise ValueError("max_context_chars must be positive")
        if self.truncation_policy not in TRUNCATION_POLICIES:
            raise ValueError(f"unknown truncation policy: {self.truncation_policy!r}")


def completed_exchanges(memory: SessionMemory) -> list[tuple[str, str]]:
    """Pair each serialized input with the raw fast output that answered it.

    Inputs without a following fast output (the in-flight current input, or
    inputs stranded by a failed turn) are skipped, as are slow-trace records,
    which never enter the fast context.
    """
    pairs: list[tuple[str, str]] = []
    pending: str | None = None
    for record in memory.records:
        entry = record.entry
        if isinstance(entry, UserTurn):
            pending = serialize_fast_input(FastInput.user(entry.question))
        elif isinstance(entry, SlowInput):
            pending = serialize_fast_input(FastInput.slow_result(entry.result))
        elif isinstance(entry, FastTurn):
            if pending is not None:
                pairs.append((pending, entry.output.raw))
                pending = None
    return pairs


def assemble_context(memory: SessionMemory, current: FastInput, config: FastMindConfig) -> str:
    """Render the full fast-mind prompt: system prompt, each past exchange as
    ``M_b <input> M_e <output>``, then the current input block ``M_b <input> M_e``."""
    t = config.template
    blocks = [f"{t.begin_marker}{i}{t.end_marker}{o}" for i, o in completed_exchanges(memory)]
    current_block = f"{t.begin_marker}{serialize_fast_input(current)}{t.end_marker}"

    def length(kept: list[str]) -> int:
        return len(t.system_prompt) + sum(len(b) for b in kept) + len(current_block)

    if length(blocks) > config.max_context_chars:
        if config.truncation_policy == FAIL:
            raise ContextOverflow(
                f"context needs {length(blocks)} chars, budget is {config.max_context_chars}"
            )
        while blocks and length(blocks) > config.max_context_chars:
            blocks.pop(0)
        if length(blocks) > config.max_context_chars:
            raise ContextOverflow(
                "system prompt and current input alone exceed the context budget"
            )
    return t.system_prompt + "".join(blocks) + current_block


def fast_step(memory: SessionMemory, current: FastInput, backend, config: FastMindConfig) -> FastOutput:
    """One fast-mind generation over the assembled context, with the
    degraded-parse fallback applied to malformed emissions."""
    context = assemble_context(memory, current, config)
    raw = backend.generate(context)
    try:
        return parse_fast_output(raw)
    except MalformedFastOutput as exc:
        log.warning("protocol violation: malformed fast output (%s); degraded parse applied", exc)
        return degraded_fast_output(raw)
