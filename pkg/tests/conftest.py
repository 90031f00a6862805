from __future__ import annotations

import shutil
from datetime import datetime, timedelta
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def record_acceptance(name: str, outcome: str) -> None:
    _ACCEPTANCE_RESULTS.append((name, outcome))


def pytest_terminal_summary(terminalreporter) -> None:
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{name}: {outcome}")


class FixedClock:
    """Deterministic append timestamps: one second per tick from a fixed base."""

    def __init__(self, base: str = "2026-01-01T00:00:00"):
        self.base = datetime.fromisoformat(base)
        self.ticks = 0

    def __call__(self) -> str:
        stamp = self.base + timedelta(seconds=self.ticks)
        self.ticks += 1
        return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


@pytest.fixture
def fixed_clock() -> FixedClock:
    return FixedClock()


@pytest.fixture
def data_dir(tmp_path: Path) -> Path:
    """A session data dir with the bundled listings fixture installed."""
    fixtures = tmp_path / "fixtures"
    fixtures.mkdir()
    shutil.copy(TESTS_DIR / "data" / "listings.json", fixtures / "listings.json")
    return tmp_path


DEMO_CONFIG = {
    "data_dir": "data",
    "templates": {
        "default": {"begin_marker": "<B>", "end_marker": "<E>", "system_prompt": ""}
    },
    "backends": {
        "fast": {
            "type": "scripted",
            "rules": [
                {"match": "regex", "pattern": "<B>SlowMind\\[[^<]*<E>$", "response": "Invoke[False]\nResponse[Bridged.]"},
                {"match": "regex", "pattern": "<B>User\\[lookup\\]<E>$", "response": "Invoke[True]\nResponse[One moment.]"},
                {"match": "regex", "pattern": "<B>User\\[[^<]*<E>$", "response": "Invoke[False]\nResponse[Hello!]"},
            ],
        },
        "slow": {
            "type": "scripted",
            "rules": [
                {"match": "contains", "pattern": "Obs[2]", "response": "Finish[The sum is 2.]"},
                {"match": "contains", "pattern": "Query", "response": "Reason[compute]\nAct[calculator]{1+1}"},
            ],
        },
    },
    "session_defaults": {
        "template": "default",
        "fast_backend": "fast",
        "slow_backend": "slow",
        "slow": {"max_steps": 4},
    },
}


@pytest.fixture
def demo_config(tmp_path: Path) -> Path:
    """A full scripted app config on disk, data dir and listings included."""
    import json

    fixtures = tmp_path / "data" / "fixtures"
    fixtures.mkdir(parents=True)
    shutil.copy(TESTS_DIR / "data" / "listings.json", fixtures / "listings.json")
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(DEMO_CONFIG, indent=2), encoding="utf-8")
    return config_path
