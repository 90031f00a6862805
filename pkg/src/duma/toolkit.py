"""Tool abstraction, registry, and the bundled real-estate demonstration tools."""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from decimal import Decimal, DivisionByZero, InvalidOperation, localcontext
from pathlib import Path
from typing import Callable

from .errors import DuplicateToolName

log = logging.getLogger(__name__)

_NAME_RE = re.compile(r"^[a-z0-9_]+$")


@dataclass(frozen=True, slots=True)
class ToolSpec:
    name: str
    description: str
    arg_schema_doc: str
    executor: Callable[[str], str]

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValueError(f"tool name must match [a-z0-9_]+: {self.name!r}")


class ToolRegistry:
    """Tools resolvable by name, in registration order.  Read-only after startup."""

    def __init__(self) -> None:
        self._tools: dict[str, ToolSpec] = {}

    def register(self, spec: ToolSpec) -> ToolRegistry:
        if spec.name in self._tools:
            raise DuplicateToolName(spec.name)
        self._tools[spec.name] = spec
        return self

    def names(self) -> list[str]:
        return list(self._tools)

    def get(self, name: str) -> ToolSpec | None:
        return self._tools.get(name)

    def render_listing(self) -> str:
        return "\n".join(f"{t.name}: {t.description}" for t in self._tools.values())

    def execute(self, name: str, raw_args: str, timeout_s: float | None = None) -> str:
        """Run a tool; every failure mode comes back as `Error: ...` text.

        The timeout is enforced with a worker thread; a timed-out executor
        thread may linger until it returns on its own.
        """
        spec = self._tools.get(name)
        if spec is None:
            available = ", ".join(self.names())
            return f"Error: unknown tool '{name}'; available: {available}"
        try:
            if timeout_s is None:
                result = spec.executor(raw_args)
            else:
                pool = ThreadPoolExecutor(max_workers=1)
                try:
                    result = pool.submit(spec.executor, raw_args).result(timeout=timeout_s)
                except FutureTimeout:
                    return f"Error: tool '{name}' timed out after {timeout_s}s"
                finally:
                    pool.shutdown(wait=False, cancel_futures=True)
        except Exception as exc:
            log.warning("tool %s raised: %s", name, exc)
            return f"Error: tool '{name}' failed: {exc}"
        return str(result)


# -- calculator ---------------------------------------------------------------------

class _ExprError(ValueError):
    pass


class _Parser:
    """Recursive-descent evaluator for + - * / and parentheses over Decimal."""

    def __init__(self, text: str):
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text: str) -> list[str]:
        tokens: list[str] = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
            elif ch in "+-*/()":
                tokens.append(ch)
                i += 1
            elif ch.isdigit() or ch == ".":
                j = i
                seen_dot = False
                while j < len(text) and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                    seen_dot = seen_dot or text[j] == "."
                    j += 1
                number = text[i:j]
                if number == ".":
                    raise _ExprError("bare '.' is not a number")
                tokens.append(number)
                i = j
            else:
                raise _ExprError(f"unexpected character {ch!r}")
        return tokens

    def _peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> str:
        token = self._peek()
        if token is None:
            raise _ExprError("unexpected end of expression")
        self.pos += 1
        return token

    def parse(self) -> Decimal:
        value = self._expr()
        if self._peek() is not None:
            raise _ExprError(f"trailing input at {self._peek()!r}")
        return value

    def _expr(self) -> Decimal:
        value = self._term()
        while self._peek() in ("+", "-"):
            if self._next() == "+":
                value += self._term()
            else:
                value -= self._term()
        return value

    def _term(self) -> Decimal:
        value = self._factor()
        while self._peek() in ("*", "/"):
            if self._next() == "*":
                value *= self._factor()
            else:
                value /= self._factor()
        return value

    def _factor(self) -> Decimal:
        token = self._next()
        if token == "-":
            return -self._factor()
        if token == "(":
            value = self._expr()
            if self._next() != ")":
                raise _ExprError("expected ')'")
            return value
        if token in "+*/()":
            raise _ExprError(f"unexpected token {token!r}")
        return Decimal(token)


def format_decimal(value: Decimal) -> str:
    """Canonical rendering: integral values without exponent or trailing zeros."""
    value = value.normalize()
    if value == value.to_integral_value():
        value = value.quantize(Decimal(1))
    return str(value)


CALC_PRECISION = 50


def evaluate_expression(text: str) -> str:
    with localcontext() as ctx:
        ctx.prec = CALC_PRECISION
        try:
            return format_decimal(_Parser(text).parse())
        except (DivisionByZero, ZeroDivisionError):
            return "Error: division by zero"
        except (_ExprError, InvalidOperation) as exc:
            return f"Error: invalid expression: {exc}"


# -- mortgage -----------------------------------------------------------------------

def monthly_payment(principal: float, annual_rate: float, years: int) -> float:
    """Standard annuity payment; the zero-rate limit is exactly principal/(12*years)."""
    months = years * 12
    if months <= 0:
        raise ValueError("years must be positive")
    if annual_rate == 0:
        return principal / months
    r = annual_rate / 12
    growth = (1 + r) ** months
    return principal * r * growth / (growth - 1)


def parse_json_args(raw: str) -> dict:
    """JSON-object tool arguments, with or without the outer braces.

    The Act grammar delimits arguments with a brace group, so executors see the
    group's inside; direct callers usually pass a complete object.  Accept both.
    """
    raw = raw.strip()
    if raw and not raw.startswith("{"):
        raw = "{" + raw + "}"
    value = json.loads(raw or "{}")
    if not isinstance(value, dict):
        raise ValueError("expected a JSON object")
    return value


def _mortgage_executor(raw_args: str) -> str:
    try:
        args = parse_json_args(raw_args)
        payment = monthly_payment(
            principal=float(args["principal"]),
            annual_rate=float(args["rate"]),
            years=int(args["years"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        return f"Error: invalid arguments: {exc}"
    return f"{payment:.2f}"


# -- listings -----------------------------------------------------------------------

@dataclass
class _ListingSource:
    path: Path
    _by_id: dict[str, dict] | None = field(default=None, repr=False)

    def lookup(self, raw_args: str) -> str:
        try:
            args = parse_json_args(raw_args)
            listing_id = args["id"]
        except (ValueError, KeyError, TypeError) as exc:
            return f"Error: invalid arguments: {exc}"
        if self._by_id is None:
            try:
                rows = json.loads(self.path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                return f"Error: listing fixture unreadable: {exc}"
            self._by_id = {row["id"]: row for row in rows}
        row = self._by_id.get(listing_id)
        if row is None:
            return f"Error: no listing with id '{listing_id}'"
        return (
            f"{row['id']} {row['name']}: district={row['district']}, "
            f"area_sqm={row['area_sqm']}, bedrooms={row['bedrooms']}, "
            f"price_total={row['price_total']}, "
            f"available={'yes' if row['available'] else 'no'}"
        )


# -- bundled registry ----------------------------------------------------------------

def builtin_registry(data_dir: Path | str, enabled: list[str] | None = None) -> ToolRegistry:
    """The bundled tool set; `enabled` restricts and orders what is registered."""
    listings = _ListingSource(Path(data_dir) / "fixtures" / "listings.json")
    specs = {
        "calculator": ToolSpec(
            name="calculator",
            description="evaluate an arithmetic expression (+ - * / and parentheses)",
            arg_schema_doc="the expression as plain text, e.g. 3500*0.2",
            executor=evaluate_expression,
        ),
        "listing_lookup": ToolSpec(
            name="listing_lookup",
            description="look up a property listing by id",
            arg_schema_doc='JSON object {"id": "<listing id>"}',
            executor=listings.lookup,
        ),
        "mortgage_calc": ToolSpec(
            name="mortgage_calc",
            description="amortized monthly payment from principal, annual rate, years",
            arg_schema_doc='JSON object {"principal": number, "rate": number, "years": integer}',
            executor=_mortgage_executor,
        ),
    }
    registry = ToolRegistry()
    for name in enabled if enabled is not None else list(specs):
        if name not in specs:
            raise ValueError(f"unknown bundled tool: {name!r}")
        registry.register(specs[name])
    return registry
