"""Core value types shared by every part of the runtime."""

from __future__ import annotations

from dataclasses import dataclass, field

USER = "user"
SLOW_RESULT = "slow_result"

REASON = "Reason"
ACT = "Act"
OBS = "Obs"
FINISH = "Finish"
STEP_KINDS = (REASON, ACT, OBS, FINISH)

TERMINATED_FINISH = "Finish"
TERMINATED_STEP_BUDGET = "StepBudget"


@dataclass(frozen=True, slots=True)
class FastInput:
    """One tagged input to the fast mind: a user utterance or a slow-mind result."""

    variant: str
    payload: str

    def __post_init__(self) -> None:
        if self.variant not in (USER, SLOW_RESULT):
            raise ValueError(f"unknown FastInput variant: {self.variant!r}")
        if not self.payload.strip():
            raise ValueError("FastInput payload must be non-empty")

    @classmethod
    def user(cls, payload: str) -> FastInput:
        return cls(USER, payload)

    @classmethod
    def slow_result(cls, payload: str) -> FastInput:
        return cls(SLOW_RESULT, payload)

    @property
    def tag(self) -> str:
        return "User" if self.variant == USER else "SlowMind"


@dataclass(frozen=True, slots=True)
class FastOutput:
    """Parsed fast-mind emission: the invoke flag, the reply text, and the verbatim raw."""

    invoke: bool
    response: str
    raw: str

    @classmethod
    def build(cls, invoke: bool, response: str) -> FastOutput:
        """Construct from fields, with raw set to the canonical serialized form."""
        raw = f"Invoke[{'True' if invoke else 'False'}]\nResponse[{response}]"
        return cls(invoke=invoke, response=response, raw=raw)

    def serialize(self) -> str:
        return f"Invoke[{'True' if self.invoke else 'False'}]\nResponse[{self.response}]"


@dataclass(frozen=True, slots=True)
class ChatTemplate:
    """Begin/end markers of the backing model's multi-turn format plus its system prompt."""

    begin_marker: str
    end_marker: str
    system_prompt: str = ""

    def __post_init__(self) -> None:
        if not self.begin_marker or not self.end_marker:
            raise ValueError("chat template markers must be non-empty")
        if self.begin_marker == self.end_marker:
            raise ValueError("begin and end markers must be distinct")
        if self.begin_marker in self.end_marker or self.end_marker in self.begin_marker:
            raise ValueError("markers must not be substrings of each other")


@dataclass(frozen=True, slots=True)
class SlowStep:
    """One step of a slow-mind episode."""

    kind: str
    payload: str
    tool_name: str | None = None
    tool_args: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown step kind: {self.kind!r}")
        if (self.kind == ACT) != (self.tool_name is not None):
            raise ValueError("tool_name is required exactly when kind is Act")
        if self.kind != ACT and self.tool_args is not None:
            raise ValueError("tool_args is only valid on Act steps")

    @classmethod
    def reason(cls, payload: str) -> SlowStep:
        return cls(REASON, payload)

    @classmethod
    def act(cls, tool_name: str, tool_args: str) -> SlowStep:
        return cls(ACT, "", tool_name=tool_name, tool_args=tool_args)

    @classmethod
    def obs(cls, payload: str) -> SlowStep:
        return cls(OBS, payload)

    @classmethod
    def finish(cls, payload: str) -> SlowStep:
        return cls(FINISH, payload)


@dataclass(frozen=True, slots=True)
class SlowTrace:
    """Complete record of one slow-mind episode."""

    steps: tuple[SlowStep, ...]
    final_result: str
    terminated_by: str

    def __post_init__(self) -> None:
        if self.terminated_by not in (TERMINATED_FINISH, TERMINATED_STEP_BUDGET):
            raise ValueError(f"unknown termination: {self.terminated_by!r}")
        last_obs: SlowStep | None = None
        for i, step in enumerate(self.steps):
            if step.kind == FINISH and i != len(self.steps) - 1:
                raise ValueError("Finish step must be last")
            if step.kind == ACT:
                nxt = self.steps[i + 1] if i + 1 < len(self.steps) else None
                if nxt is None or nxt.kind != OBS:
                    raise ValueError("every Act step must be followed by an Obs step")
            if step.kind == OBS:
                prev = self.steps[i - 1] if i > 0 else None
                if prev is None or prev.kind != ACT:
                    raise ValueError("Obs steps only follow Act steps")
                last_obs = step
        if self.terminated_by == TERMINATED_FINISH:
            if not self.steps or self.steps[-1].kind != FINISH:
                raise ValueError("Finish termination requires a trailing Finish step")
            if self.final_result != self.steps[-1].payload:
                raise ValueError("final_result must equal the Finish payload")
        else:
            if any(s.kind == FINISH for s in self.steps):
                raise ValueError("StepBudget termination cannot contain a Finish step")
            if last_obs is None or self.final_result != last_obs.payload:
                raise ValueError("final_result must equal the last Obs payload")


# -- dialogue memory entries ----------------------------------------------------

@dataclass(frozen=True, slots=True)
class UserTurn:
    question: str


@dataclass(frozen=True, slots=True)
class FastTurn:
    output: FastOutput


@dataclass(frozen=True, slots=True)
class SlowInput:
    result: str


@dataclass(frozen=True, slots=True)
class SlowTraceRecord:
    trace: SlowTrace


Entry = UserTurn | FastTurn | SlowInput | SlowTraceRecord


@dataclass(frozen=True, slots=True)
class MemoryRecord:
    """One dialogue-memory entry stamped with its turn index and append time."""

    turn_index: int
    entry: Entry
    ts: str

    def __post_init__(self) -> None:
        if self.turn_index < 0:
            raise ValueError("turn_index must be >= 0")


@dataclass(frozen=True, slots=True)
class TurnResult:
    """The outputs of one completed turn: fast reply, optional slow trace, final reply."""

    o_f: FastOutput
    o_s: SlowTrace | None
    o_b: FastOutput | None
    user_visible_reply: str

    def __post_init__(self) -> None:
        if self.o_f.invoke != (self.o_s is not None) or self.o_f.invoke != (self.o_b is not None):
            raise ValueError("o_s and o_b are present exactly when o_f.invoke is True")
        expected = self.o_b.response if self.o_b is not None else self.o_f.response
        if self.user_visible_reply != expected:
            raise ValueError("user_visible_reply must follow the o_b-else-o_f rule")


EVAL_METRICS = (
    "house_expertise",
    "tool_calling",
    "industry_familiarity",
    "service_attitude",
    "demand_mining",
    "promote_invitation",
)


@dataclass(frozen=True)
class RubricScore:
    """One annotator's 0/1/2 scores for one dialogue of one model.

    A record may omit metrics the annotator could not judge; aggregation
    reports the per-metric count alongside each mean.
    """

    dialogue_id: str
    model_name: str
    scores: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        from .errors import InvalidScore

        for metric, value in self.scores.items():
            if metric not in EVAL_METRICS:
                raise InvalidScore(f"unknown metric {metric!r}")
            if not isinstance(value, int) or isinstance(value, bool) or value not in (0, 1, 2):
                raise InvalidScore(f"score for {metric!r} must be 0, 1, or 2; got {value!r}")
