"""duma: a dual-mind conversational-agent runtime.

A fast mind answers every user turn and decides, via an Invoke flag, when to
hand off to a slow mind that reasons step by step with tools.  The package
bundles the protocol grammar, dialogue memory, both minds, a tool registry,
scripted and HTTP model backends, an orchestrator with an HTTP/SSE service and
CLI, and a rubric-score evaluation harness.
"""

from .errors import DumaError
from .types import (
    ChatTemplate,
    FastInput,
    FastOutput,
    RubricScore,
    SlowStep,
    SlowTrace,
    TurnResult,
)

__all__ = [
    "ChatTemplate",
    "DumaError",
    "FastInput",
    "FastOutput",
    "RubricScore",
    "SlowStep",
    "SlowTrace",
    "TurnResult",
]

__version__ = "0.1.0"
