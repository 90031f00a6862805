"""Exception hierarchy for the duma runtime."""

from __future__ import annotations


class DumaError(Exception):
    """Base class for all runtime errors."""


# -- protocol grammar ---------------------------------------------------------

class MalformedFastOutput(DumaError):
    """Fast-mind emission violates the Invoke/Response output contract."""


class MalformedSlowEmission(DumaError):
    """Slow-mind emission contains no Reason/Act/Finish block."""


# -- memory -------------------------------------------------------------------

class OutOfOrderTurn(DumaError):
    """Appended record has a turn index lower than the last stored one."""


class InvalidRecord(DumaError):
    """Appended record violates a memory invariant."""


class StorageFailure(DumaError):
    """Persistence layer failed to durably store a record."""


# -- minds --------------------------------------------------------------------

class ContextOverflow(DumaError):
    """Assembled context cannot fit the configured character budget."""


class SlowEpisodeFailed(DumaError):
    """Slow episode exhausted its step budget with no observation to return."""


# -- backends -----------------------------------------------------------------

class BackendUnavailable(DumaError):
    """Model backend unreachable after the configured retries."""


class AuthError(DumaError):
    """Model backend rejected the request credentials (401/403)."""


class ContractError(DumaError):
    """Model backend response did not contain a usable text choice."""


class NoScriptMatch(DumaError):
    """Scripted backend has no rule matching the prompt and no default."""


# -- toolkit ------------------------------------------------------------------

class DuplicateToolName(DumaError):
    """A tool with this name is already registered."""


# -- orchestrator / service ---------------------------------------------------

class TurnInProgress(DumaError):
    """Another turn is already running for this session."""


class SessionNotFound(DumaError):
    """No session with this id."""


class TurnNotFound(DumaError):
    """Session has no turn with this index."""


class UnknownBackend(DumaError):
    """Session config references a backend name that is not registered."""


class ConfigError(DumaError):
    """Application config file is missing or inconsistent."""


# -- eval harness -------------------------------------------------------------

class EmptyScoreSet(DumaError):
    """No score records for a model."""


class InvalidScore(DumaError):
    """Score record has an unknown metric or an out-of-range value."""


class LengthMismatch(DumaError):
    """Models under alignment comparison have differing dialogue counts."""
