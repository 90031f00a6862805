"""Shared machinery for the scripted end-to-end scenarios: build an orchestrator
from a scenario file, run its turns under a fixed clock, and hand back everything
needed for byte-level comparison against the frozen expected records."""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from duma.backends import HealthStatus, ScriptedBackend, ScriptRule
from duma.fast_mind import FastMindConfig
from duma.memory import SessionStore
from duma.orchestrator import Orchestrator, SessionConfig
from duma.slow_mind import SlowMindConfig
from duma.toolkit import builtin_registry
from duma.types import ChatTemplate, TurnResult

TESTS_DIR = Path(__file__).parent
SCENARIOS_DIR = TESTS_DIR / "golden" / "scenarios"
EXPECTED_DIR = TESTS_DIR / "golden" / "expected"


class RecordingBackend:
    """Wraps a backend and keeps every prompt it was asked to complete."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.prompts: list[str] = []

    def generate(self, prompt: str) -> str:
        self.prompts.append(prompt)
        return self.inner.generate(prompt)

    def health(self) -> HealthStatus:
        return self.inner.health()


@dataclass
class ScenarioRun:
    session_id: str
    results: list[TurnResult]
    orchestrator: Orchestrator
    store: SessionStore
    fast: RecordingBackend
    slow: RecordingBackend
    events: list[list[tuple[str, dict]]] = field(default_factory=list)

    @property
    def produced_path(self) -> Path:
        return self.store.path_for(self.session_id)


def load_scenario(name: str) -> dict:
    return json.loads((SCENARIOS_DIR / f"{name}.json").read_text(encoding="utf-8"))


def scenario_names() -> list[str]:
    return sorted(p.stem for p in SCENARIOS_DIR.glob("*.json"))


def _build_rules(raw_rules: list[dict]) -> list[ScriptRule]:
    return [
        ScriptRule(
            matcher=r.get("match", "contains"),
            pattern=r["pattern"],
            response=r.get("response"),
            responses=r.get("responses"),
        )
        for r in raw_rules
    ]


def run_scenario(scenario: dict, data_dir: Path, clock) -> ScenarioRun:
    fixtures = data_dir / "fixtures"
    if not fixtures.exists():
        fixtures.mkdir(parents=True)
        shutil.copy(TESTS_DIR / "data" / "listings.json", fixtures / "listings.json")

    template = ChatTemplate(**scenario["template"])
    session_raw = scenario["session"]
    slow_raw = session_raw.get("slow", {})
    config = SessionConfig(
        fast_backend="fast",
        slow_backend="slow",
        fast_config=FastMindConfig(
            template=template,
            max_context_chars=session_raw.get("max_context_chars", 4096),
            truncation_policy=session_raw.get("truncation_policy", "drop_oldest_rounds"),
        ),
        slow_config=SlowMindConfig(
            system_prompt=slow_raw.get("system_prompt", ""),
            max_steps=slow_raw.get("max_steps", 8),
            per_tool_timeout_s=slow_raw.get("per_tool_timeout_s"),
            max_obs_chars=slow_raw.get("max_obs_chars", 400),
        ),
        expose_o_s=session_raw.get("expose_o_s", True),
        max_slow_invocations_per_turn=session_raw.get("max_slow_invocations_per_turn", 1),
    )
    fast = RecordingBackend(ScriptedBackend(
        _build_rules(scenario["fast"].get("rules", [])),
        default=scenario["fast"].get("default"),
        name="fast",
    ))
    slow = RecordingBackend(ScriptedBackend(
        _build_rules(scenario.get("slow", {}).get("rules", [])),
        default=scenario.get("slow", {}).get("default"),
        name="slow",
    ))
    store = SessionStore(data_dir, clock=clock)
    orchestrator = Orchestrator(
        backends={"fast": fast, "slow": slow},
        tools=builtin_registry(data_dir),
        store=store,
        session_configs={"default": config},
    )
    session_id = orchestrator.create_session(config)
    run = ScenarioRun(
        session_id=session_id,
        results=[],
        orchestrator=orchestrator,
        store=store,
        fast=fast,
        slow=slow,
    )
    for question in scenario["turns"]:
        turn_events: list[tuple[str, dict]] = []
        result = orchestrator.run_turn(
            session_id, question, on_event=lambda name, data: turn_events.append((name, data))
        )
        run.results.append(result)
        run.events.append(turn_events)
    return run
