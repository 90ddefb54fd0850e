"""Tool registry: schemas bound to plain Python callables."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import ConfigurationError, RaspagentError
from .messages import ToolCall, ToolParameter, ToolSchema

logger = logging.getLogger(__name__)


@dataclass
class ToolResult:
    """What a tool hands back: text for the model plus produced artifacts."""

    text: str
    artifacts: list[tuple[str, str]] = field(default_factory=list)
    is_error: bool = False


@dataclass
class Tool:
    schema: ToolSchema
    func: Callable[..., Any]

    @property
    def name(self) -> str:
        return self.schema.name


def tool(name: str, description: str, *params: ToolParameter):
    """Decorator turning a function into a :class:`Tool`."""

    def wrap(func):
        return Tool(ToolSchema(name, description, tuple(params)), func)

    return wrap


def param(name: str, type: str = "string", description: str = "", required: bool = True, items: str | None = None) -> ToolParameter:
    return ToolParameter(name, type, description, required, items)


def _coerce(value: Any) -> str:
    if isinstance(value, ToolResult):
        return value.text
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True, default=str)


class ToolRegistry:
    def __init__(self, tools: list[Tool] | None = None):
        self._tools: dict[str, Tool] = {}
        for t in tools or ():
            self.register(t)

    def register(self, t: Tool) -> None:
        if t.name in self._tools:
            raise ConfigurationError(f"tool name collision: {t.name}")
        self._tools[t.name] = t

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    def names(self) -> list[str]:
        return list(self._tools)

    def get(self, name: str) -> Tool:
        return self._tools[name]

    def schemas(self, names: list[str] | None = None) -> list[ToolSchema]:
        selected = self._tools if names is None else {n: self._tools[n] for n in names}
        return [t.schema for t in selected.values()]

    def subset(self, names: list[str]) -> ToolRegistry:
        missing = [n for n in names if n not in self._tools]
        if missing:
            raise ConfigurationError(f"tools not in registry: {missing}")
        return ToolRegistry([self._tools[n] for n in names])

    def invoke(self, call: ToolCall) -> ToolResult:
        """Run a tool call. Failures come back as an error result, never raise."""
        t = self._tools.get(call.name)
        if t is None:
            return ToolResult(
                f"error: unknown tool {call.name!r}; available: {', '.join(self._tools)}",
                is_error=True,
            )
        args = call.arguments
        if not isinstance(args, dict):
            return ToolResult(f"error: arguments for {call.name} are not a JSON object: {args!r}", is_error=True)
        declared = {p.name for p in t.schema.parameters}
        missing = [p.name for p in t.schema.parameters if p.required and p.name not in args]
        extra = sorted(set(args) - declared)
        if missing or extra:
            parts = []
            if missing:
                parts.append("missing argument(s) " + ", ".join(missing))
            if extra:
                parts.append("unexpected argument(s) " + ", ".join(extra))
            return ToolResult(f"error: {call.name}: " + "; ".join(parts), is_error=True)
        try:
            value = t.func(**args)
        except (RaspagentError, OSError, ValueError, KeyError, TypeError) as exc:
            logger.debug("tool %s failed", call.name, exc_info=True)
            return ToolResult(f"error: {type(exc).__name__}: {exc}", is_error=True)
        if isinstance(value, ToolResult):
            return value
        return ToolResult(_coerce(value))
