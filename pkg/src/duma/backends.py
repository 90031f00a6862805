"""Model backends: the generate contract, a deterministic scripted double, and an
HTTP client for OpenAI-compatible completion endpoints."""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

import httpx

from .errors import AuthError, BackendUnavailable, ContractError, NoScriptMatch
from .types import ChatTemplate

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class HealthStatus:
    ok: bool
    detail: str = ""


@runtime_checkable
class ModelBackend(Protocol):
    name: str

    def generate(self, prompt: str) -> str: ...

    def health(self) -> HealthStatus: ...


# -- scripted backend -----------------------------------------------------------------

MATCH_EXACT = "exact"
MATCH_CONTAINS = "contains"
MATCH_REGEX = "regex"


@dataclass
class ScriptRule:
    """One prompt matcher with either an endlessly replayable response or a queue.

    A queue is consumed one response per hit; once exhausted the rule no longer
    matches and later rules get their chance.
    """

    matcher: str
    pattern: str
    response: str | None = None
    responses: list[str] | None = None
    _cursor: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        if self.matcher not in (MATCH_EXACT, MATCH_CONTAINS, MATCH_REGEX):
            raise ValueError(f"unknown matcher: {self.matcher!r}")
        if (self.response is None) == (self.responses is None):
            raise ValueError("exactly one of response/responses must be set")

    def matches(self, prompt: str) -> bool:
        if self.matcher == MATCH_EXACT:
            return prompt == self.pattern
        if self.matcher == MATCH_CONTAINS:
            return self.pattern in prompt
        return re.search(self.pattern, prompt) is not None

    def take(self) -> str | None:
        if self.response is not None:
            return self.response
        assert self.responses is not None
        if self._cursor >= len(self.responses):
            return None
        value = self.responses[self._cursor]
        self._cursor += 1
        return value


class ScriptedBackend:
    """Deterministic backend for tests and offline demos: first matching rule wins."""

    def __init__(self, rules: list[ScriptRule], default: str | None = None, name: str = "scripted"):
        self.rules = rules
        self.default = default
        self.name = name
        self._lock = threading.Lock()

    def generate(self, prompt: str) -> str:
        with self._lock:
            for rule in self.rules:
                if rule.matches(prompt):
                    response = rule.take()
                    if response is not None:
                        return response
        if self.default is not None:
            return self.default
        preview = prompt if len(prompt) <= 200 else prompt[:200] + "…"
        raise NoScriptMatch(f"no rule matches prompt: {preview!r}")

    def health(self) -> HealthStatus:
        return HealthStatus(ok=True, detail=f"{len(self.rules)} rules")


# -- prompt <-> chat-message adaptation -------------------------------------------------

def split_prompt_to_messages(prompt: str, template: ChatTemplate) -> list[dict[str, str]]:
    """Cut a raw multi-turn prompt back into chat messages at the marker boundaries.

    Segment contents must not themselves contain the markers (they are the
    model's reserved delimiters); under that assumption the split is exact and
    join_messages_to_prompt inverts it byte-for-byte.
    """
    b, e = template.begin_marker, template.end_marker
    messages: list[dict[str, str]] = []
    first = prompt.find(b)
    if first == -1:
        raise ValueError("prompt contains no begin marker")
    if first > 0:
        messages.append({"role": "system", "content": prompt[:first]})
    pos = first
    while pos < len(prompt):
        if not prompt.startswith(b, pos):
            raise ValueError(f"expected begin marker at offset {pos}")
        start = pos + len(b)
        end = prompt.find(e, start)
        if end == -1:
            raise ValueError("unterminated input block: missing end marker")
        messages.append({"role": "user", "content": prompt[start:end]})
        pos = end + len(e)
        nxt = prompt.find(b, pos)
        tail = prompt[pos:] if nxt == -1 else prompt[pos:nxt]
        if tail:
            messages.append({"role": "assistant", "content": tail})
        pos = len(prompt) if nxt == -1 else nxt
    return messages


def join_messages_to_prompt(messages: list[dict[str, str]], template: ChatTemplate) -> str:
    parts: list[str] = []
    for message in messages:
        role, content = message["role"], message["content"]
        if role == "system":
            parts.append(content)
        elif role == "user":
            parts.append(f"{template.begin_marker}{content}{template.end_marker}")
        elif role == "assistant":
            parts.append(content)
        else:
            raise ValueError(f"unknown role: {role!r}")
    return "".join(parts)


# -- HTTP backend -----------------------------------------------------------------------

MODE_RAW = "raw_completion"
MODE_CHAT = "chat_messages"


@dataclass(frozen=True, slots=True)
class HttpBackendConfig:
    base_url: str
    model_name: str
    api_key_env_var: str | None = None
    timeout_s: float = 30.0
    max_retries: int = 2
    retry_backoff_s: float = 0.5
    mode: str = MODE_RAW
    max_tokens: int = 512
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in (MODE_RAW, MODE_CHAT):
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class HttpBackend:
    """OpenAI-compatible completions client with bounded retry on 5xx/timeouts."""

    def __init__(
        self,
        config: HttpBackendConfig,
        template: ChatTemplate | None = None,
        name: str = "http",
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if config.mode == MODE_CHAT and template is None:
            raise ValueError("chat_messages mode requires a chat template")
        self.config = config
        self.template = template
        self.name = name
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_s,
            transport=transport,
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key_env_var:
            key = os.environ.get(self.config.api_key_env_var)
            if not key:
                raise AuthError(
                    f"environment variable {self.config.api_key_env_var} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _request_body(self, prompt: str) -> tuple[str, dict]:
        cfg = self.config
        stop = [self.template.begin_marker] if self.template else None
        if cfg.mode == MODE_RAW:
            body: dict = {
                "model": cfg.model_name,
                "prompt": prompt,
                "max_tokens": cfg.max_tokens,
                "temperature": cfg.temperature,
            }
            if stop:
                body["stop"] = stop
            return "/v1/completions", body
        assert self.template is not None
        body = {
            "model": cfg.model_name,
            "messages": split_prompt_to_messages(prompt, self.template),
            "max_tokens": cfg.max_tokens,
            "temperature": cfg.temperature,
        }
        if stop:
            body["stop"] = stop
        return "/v1/chat/completions", body

    def _extract_text(self, data: dict) -> str:
        try:
            choice = data["choices"][0]
            if self.config.mode == MODE_RAW:
                text = choice["text"]
            else:
                text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ContractError(f"response lacks a text choice: {exc}") from exc
        if not isinstance(text, str):
            raise ContractError(f"choice text is {type(text).__name__}, not str")
        return text

    def generate(self, prompt: str) -> str:
        path, body = self._request_body(prompt)
        headers = self._headers()
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(self.config.retry_backoff_s * 2 ** (attempt - 1))
            try:
                response = self._client.post(path, json=body, headers=headers)
            except httpx.TimeoutException as exc:
                last_error = exc
                continue
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"authentication rejected: HTTP {response.status_code}")
            if response.status_code >= 500:
                last_error = BackendUnavailable(f"HTTP {response.status_code}")
                continue
            if response.status_code >= 400:
                raise ContractError(f"HTTP {response.status_code}: {response.text[:200]}")
            return self._extract_text(response.json())
        raise BackendUnavailable(
            f"{self.name}: gave up after {self.config.max_retries + 1} attempts: {last_error}"
        )

    def health(self) -> HealthStatus:
        return HealthStatus(ok=True, detail=f"{self.config.mode} @ {self.config.base_url}")

    def close(self) -> None:
        self._client.close()
