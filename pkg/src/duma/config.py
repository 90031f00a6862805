"""Application config: one JSON file wiring templates, backends, tools, and
session defaults into a ready Orchestrator."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .backends import HttpBackend, HttpBackendConfig, ModelBackend, ScriptedBackend, ScriptRule
from .errors import ConfigError
from .fast_mind import FastMindConfig
from .memory import Clock, SessionStore
from .orchestrator import Orchestrator, SessionConfig
from .slow_mind import SlowMindConfig
from .toolkit import ToolRegistry, builtin_registry
from .types import ChatTemplate

log = logging.getLogger(__name__)


@dataclass
class AppConfig:
    data_dir: Path
    templates: dict[str, ChatTemplate]
    backends: dict[str, ModelBackend]
    tools: ToolRegistry
    session_configs: dict[str, SessionConfig]

    def build_orchestrator(self, clock: Clock | None = None) -> Orchestrator:
        return Orchestrator(
            backends=self.backends,
            tools=self.tools,
            store=SessionStore(self.data_dir, clock=clock),
            session_configs=self.session_configs,
        )


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _build_template(raw: dict, where: str) -> ChatTemplate:
    try:
        return ChatTemplate(
            begin_marker=_require(raw, "begin_marker", where),
            end_marker=_require(raw, "end_marker", where),
            system_prompt=raw.get("system_prompt", ""),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_rule(raw: dict, where: str) -> ScriptRule:
    try:
        return ScriptRule(
            matcher=raw.get("match", "contains"),
            pattern=_require(raw, "pattern", where),
            response=raw.get("response"),
            responses=raw.get("responses"),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _build_backend(name: str, raw: dict, templates: dict[str, ChatTemplate]) -> ModelBackend:
    where = f"backends.{name}"
    kind = _require(raw, "type", where)
    if kind == "scripted":
        rules = [_build_rule(r, where) for r in raw.get("rules", [])]
        return ScriptedBackend(rules, default=raw.get("default"), name=name)
    if kind == "http":
        template = None
        if "template" in raw:
            template_name = raw["template"]
            if template_name not in templates:
                raise ConfigError(f"{where}: unknown template {template_name!r}")
            template = templates[template_name]
        try:
            cfg = HttpBackendConfig(
                base_url=_require(raw, "base_url", where),
                model_name=_require(raw, "model_name", where),
                api_key_env_var=raw.get("api_key_env_var"),
                timeout_s=raw.get("timeout_s", 30.0),
                max_retries=raw.get("max_retries", 2),
                retry_backoff_s=raw.get("retry_backoff_s", 0.5),
                mode=raw.get("mode", "raw_completion"),
                max_tokens=raw.get("max_tokens", 512),
                temperature=raw.get("temperature", 0.0),
            )
            return HttpBackend(cfg, template=template, name=name)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown backend type {kind!r}")


def _build_session_config(
    raw: dict,
    templates: dict[str, ChatTemplate],
    backends: dict[str, ModelBackend],
    where: str,
) -> SessionConfig:
    template_name = _require(raw, "template", where)
    if template_name not in templates:
        raise ConfigError(f"{where}: unknown template {template_name!r}")
    for key in ("fast_backend", "slow_backend"):
        if _require(raw, key, where) not in backends:
            raise ConfigError(f"{where}: unknown backend {raw[key]!r}")
    slow_raw = raw.get("slow", {})
    try:
        return SessionConfig(
            fast_backend=raw["fast_backend"],
            slow_backend=raw["slow_backend"],
            fast_config=FastMindConfig(
                template=templates[template_name],
                max_context_chars=raw.get("max_context_chars", 32768),
                truncation_policy=raw.get("truncation_policy", "drop_oldest_rounds"),
            ),
            slow_config=SlowMindConfig(
                system_prompt=slow_raw.get("system_prompt", ""),
                max_steps=slow_raw.get("max_steps", 8),
                per_tool_timeout_s=slow_raw.get("per_tool_timeout_s", 10.0),
                max_obs_chars=slow_raw.get("max_obs_chars", 2000),
            ),
            expose_o_s=raw.get("expose_o_s", True),
            max_slow_invocations_per_turn=raw.get("max_slow_invocations_per_turn", 1),
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_app_config(path: Path | str) -> AppConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc

    data_dir = Path(_require(raw, "data_dir", "config"))
    if not data_dir.is_absolute():
        data_dir = (path.parent / data_dir).resolve()

    templates = {
        name: _build_template(t, f"templates.{name}")
        for name, t in _require(raw, "templates", "config").items()
    }
    backends = {
        name: _build_backend(name, b, templates)
        for name, b in _require(raw, "backends", "config").items()
    }

    tools_raw = raw.get("tools", {})
    enabled = tools_raw.get("enabled")
    try:
        tools: ToolRegistry = builtin_registry(data_dir, enabled=enabled)
    except ValueError as exc:
        raise ConfigError(f"tools: {exc}") from exc

    defaults = _require(raw, "session_defaults", "config")
    session_configs = {
        "default": _build_session_config(defaults, templates, backends, "session_defaults")
    }
    for name, override in raw.get("session_configs", {}).items():
        merged = {**defaults, **override}
        if "slow" in defaults or "slow" in override:
            merged["slow"] = {**defaults.get("slow", {}), **override.get("slow", {})}
        session_configs[name] = _build_session_config(
            merged, templates, backends, f"session_configs.{name}"
        )

    return AppConfig(
        data_dir=data_dir,
        templates=templates,
        backends=backends,
        tools=tools,
        session_configs=session_configs,
    )
