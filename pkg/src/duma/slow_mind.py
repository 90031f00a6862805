"""Slow mind: dialogue review rendering and the reason/act/observe episode loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from .errors import MalformedSlowEmission, SlowEpisodeFailed
from .grammar import parse_slow_emission, render_transcript
from .memory import SessionMemory
from .toolkit import ToolRegistry
from .types import (
    ACT,
    FINISH,
    OBS,
    TERMINATED_FINISH,
    TERMINATED_STEP_BUDGET,
    FastTurn,
    SlowStep,
    SlowTrace,
    UserTurn,
)

log = logging.getLogger(__name__)

CORRECTIVE_LINE = (
    "Your last message could not be parsed. Reply with Reason[...], "
    "Act[tool_name]{args}, or Finish[...] blocks only."
)

TRUNCATION_SUFFIX = "…[truncated]"

StepCallback = Callable[[SlowStep], None]


@dataclass(frozen=True, slots=True)
class SlowMindConfig:
    system_prompt: str = ""
    max_steps: int = 8
    per_tool_timeout_s: float | None = 10.0
    max_obs_chars: int = 2000

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_obs_chars < 1:
            raise ValueError("max_obs_chars must be >= 1")


def render_dialogue_review(memory: SessionMemory, current_question: str) -> str:
    """Render past rounds as `Query i / Answer i` lines, ending with the
    unanswered current question.

    The answer of a round is its last fast output's response (the final reply
    when the slow mind ran).  Rounds that never produced a fast output are
    skipped and the numbering stays dense.
    """
    current_turn = None
    for record in reversed(memory.records):
        if isinstance(record.entry, UserTurn) and record.entry.question == current_question:
            current_turn = record.turn_index
            break

    rounds: dict[int, dict] = {}
    for record in memory.records:
        if current_turn is not None and record.turn_index >= current_turn:
            break
        slot = rounds.setdefault(record.turn_index, {"question": None, "answer": None})
        if isinstance(record.entry, UserTurn) and slot["question"] is None:
            slot["question"] = record.entry.question
        elif isinstance(record.entry, FastTurn):
            slot["answer"] = record.entry.output.response

    lines: list[str] = []
    i = 0
    for turn_index in sorted(rounds):
        slot = rounds[turn_index]
        if slot["question"] is None or slot["answer"] is None:
            continue
        lines.append(f"Query {i}: {slot['question']}")
        lines.append(f"Answer {i}: {slot['answer']}")
        i += 1
    lines.append(f"Query {i}: {current_question}")
    return "\n".join(lines)


def truncate_obs(text: str, max_obs_chars: int) -> str:
    if len(text) > max_obs_chars:
        return text[:max_obs_chars] + TRUNCATION_SUFFIX
    return text


def _build_prompt(system_prompt: str, review: str, steps: list[SlowStep]) -> str:
    parts = [p for p in (system_prompt, review, render_transcript(steps)) if p]
    return "\n".join(parts)


def _generate_steps(backend, prompt: str) -> list[SlowStep]:
    """One emission, with a single corrective re-prompt on a parse failure.
    A second failure becomes a Finish carrying the raw emission."""
    raw = backend.generate(prompt)
    try:
        return parse_slow_emission(raw)
    except MalformedSlowEmission:
        log.warning("protocol violation: unparseable slow emission; re-prompting once")
        raw = backend.generate(prompt + "\n" + CORRECTIVE_LINE)
        try:
            return parse_slow_emission(raw)
        except MalformedSlowEmission:
            log.warning("protocol violation: second unparseable slow emission; treating as Finish")
            return [SlowStep.finish(raw)]


def run_slow_episode(
    memory: SessionMemory,
    current_question: str,
    backend,
    tools: ToolRegistry,
    config: SlowMindConfig,
    on_step: StepCallback | None = None,
) -> SlowTrace:
    """Drive the reasoning loop until Finish or the step budget runs out.

    Each cycle is one model emission; an Act is answered with an Obs holding
    the (truncated) tool result.  Tool failures surface as Obs text and never
    abort the episode.
    """
    system_prompt = config.system_prompt.replace("{tools}", tools.render_listing())
    review = render_dialogue_review(memory, current_question)
    steps: list[SlowStep] = []

    def emit(step: SlowStep) -> None:
        steps.append(step)
        if on_step is not None:
            on_step(step)

    terminated_by = TERMINATED_STEP_BUDGET
    final_result: str | None = None
    for _cycle in range(config.max_steps):
        emitted = _generate_steps(backend, _build_prompt(system_prompt, review, steps))
        for step in emitted:
            emit(step)
        last = emitted[-1]
        if last.kind == FINISH:
            terminated_by = TERMINATED_FINISH
            final_result = last.payload
            break
        if last.kind == ACT:
            obs_text = tools.execute(
                last.tool_name or "", last.tool_args or "", timeout_s=config.per_tool_timeout_s
            )
            emit(SlowStep.obs(truncate_obs(obs_text, config.max_obs_chars)))

    if final_result is None:
        observations = [s for s in steps if s.kind == OBS]
        if not observations:
            raise SlowEpisodeFailed(
                f"step budget of {config.max_steps} exhausted with no observation"
            )
        final_result = observations[-1].payload
    return SlowTrace(steps=tuple(steps), final_result=final_result, terminated_by=terminated_by)
