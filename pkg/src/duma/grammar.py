"""The bracket grammar: serializers and parsers for mind inputs and outputs.

Payloads are never escaped.  The parser compensates with positional rules:
Invoke values end at the first `]` on the same line, Response and Finish
payloads run from their opening marker to the LAST `]` of the message, and
Reason payloads run to the last `]` before the next marker.
"""

from __future__ import annotations

import logging
import re

from .errors import MalformedFastOutput, MalformedSlowEmission
from .types import ACT, FINISH, OBS, REASON, FastInput, FastOutput, SlowStep

log = logging.getLogger(__name__)

_INVOKE_RE = re.compile(r"Invoke\[([^\]\n]*)\]")
_MARKER_RE = re.compile(r"(?:Reason|Act|Obs|Finish)\[")


def serialize_fast_input(current: FastInput) -> str:
    """Render the tagged form, `User[...]` or `SlowMind[...]`."""
    return f"{current.tag}[{current.payload}]"


def serialize_fast_output(output: FastOutput) -> str:
    return output.serialize()


def parse_fast_output(raw: str) -> FastOutput:
    """Parse a fast-mind emission into its invoke flag and response text.

    Raises MalformedFastOutput when either marker is missing or the invoke
    value is not True/False; callers apply the degraded-parse policy.
    """
    m = _INVOKE_RE.search(raw)
    if m is None:
        raise MalformedFastOutput("missing Invoke[...] marker")
    value = m.group(1).strip().lower()
    if value == "true":
        invoke = True
    elif value == "false":
        invoke = False
    else:
        raise MalformedFastOutput(f"Invoke value must be True or False, got {m.group(1)!r}")

    resp_at = raw.find("Response[")
    if resp_at == -1:
        raise MalformedFastOutput("missing Response[...] marker")
    body = raw[resp_at + len("Response["):]
    close = body.rfind("]")
    response = body[:close] if close != -1 else body
    return FastOutput(invoke=invoke, response=response, raw=raw)


def degraded_fast_output(raw: str) -> FastOutput:
    """The degraded-parse fallback: whole emission as the reply, no invocation."""
    return FastOutput(invoke=False, response=raw, raw=raw)


def serialize_slow_step(step: SlowStep) -> str:
    if step.kind == ACT:
        return f"Act[{step.tool_name}]{{{step.tool_args or ''}}}"
    return f"{step.kind}[{step.payload}]"


def render_transcript(steps: list[SlowStep] | tuple[SlowStep, ...]) -> str:
    return "\n".join(serialize_slow_step(s) for s in steps)


def _scan_braced_args(text: str, start: int) -> tuple[str, int]:
    """Scan a balanced {...} group starting at `start`, skipping braces inside
    double-quoted strings.  Returns (args, index past the group); an unclosed
    group yields the rest of the string."""
    depth = 0
    in_string = False
    i = start
    while i < len(text):
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start + 1:i], i + 1
        i += 1
    return text[start + 1:], len(text)


def _payload_before(segment: str) -> str:
    """Reason/Obs payload rule: up to the last `]` in the segment, or all of it."""
    close = segment.rfind("]")
    return segment[:close] if close != -1 else segment


def parse_slow_emission(raw: str) -> list[SlowStep]:
    """Parse one slow-mind emission into steps, stopping at the first Act or Finish.

    Model-emitted Obs blocks are discarded (observations belong to the runtime)
    with a logged protocol violation.  Raises MalformedSlowEmission when no
    block is found at all.
    """
    steps: list[SlowStep] = []
    pos = 0
    while True:
        m = _MARKER_RE.search(raw, pos)
        if m is None:
            break
        kind = m.group(0)[:-1]
        body_start = m.end()
        if kind == FINISH:
            body = raw[body_start:]
            close = body.rfind("]")
            payload = body[:close] if close != -1 else body
            steps.append(SlowStep.finish(payload))
            return steps
        if kind == ACT:
            close = raw.find("]", body_start)
            if close == -1:
                name, rest = raw[body_start:], len(raw)
            else:
                name, rest = raw[body_start:close], close + 1
            while rest < len(raw) and raw[rest] in " \t":
                rest += 1
            if rest < len(raw) and raw[rest] == "{":
                args, _ = _scan_braced_args(raw, rest)
            else:
                args = ""
            steps.append(SlowStep(ACT, "", tool_name=name, tool_args=args))
            return steps
        nxt = _MARKER_RE.search(raw, body_start)
        segment = raw[body_start:nxt.start()] if nxt else raw[body_start:]
        payload = _payload_before(segment)
        if kind == OBS:
            log.warning("protocol violation: model emitted an Obs block; discarded")
        else:
            steps.append(SlowStep.reason(payload))
        pos = body_start + len(segment)
    if not steps:
        raise MalformedSlowEmission("no Reason/Act/Finish block found")
    return steps
