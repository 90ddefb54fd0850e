"""Chat message and tool schema model, with chat-completions wire conversion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

ROLES = ("system", "user", "assistant", "tool")

_JSON_TYPES = {"string", "integer", "number", "boolean", "array", "object"}


@dataclass(frozen=True)
class ToolCall:
    id: str
    name: str
    # a dict normally; a raw string when the model sent unparseable JSON
    arguments: dict[str, Any] | str = field(default_factory=dict)

    def to_wire(self) -> dict:
        args = self.arguments if isinstance(self.arguments, str) else json.dumps(self.arguments, sort_keys=True)
        return {"id": self.id, "type": "function", "function": {"name": self.name, "arguments": args}}

    @classmethod
    def from_wire(cls, doc: dict) -> ToolCall:
        fn = doc.get("function", doc)
        args = fn.get("arguments", {})
        if isinstance(args, str):
            try:
                parsed = json.loads(args) if args.strip() else {}
                args = parsed if isinstance(parsed, dict) else args
            except json.JSONDecodeError:
                pass
        return cls(id=doc.get("id", ""), name=fn["name"], arguments=args)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None
    name: str | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "tool_calls", tuple(self.tool_calls))
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool messages need a tool_call_id")

    def to_wire(self) -> dict:
        doc: dict[str, Any] = {"role": self.role, "content": self.content}
        if self.tool_calls:
            doc["tool_calls"] = [c.to_wire() for c in self.tool_calls]
        if self.tool_call_id is not None:
            doc["tool_call_id"] = self.tool_call_id
        if self.name is not None:
            doc["name"] = self.name
        return doc

    @classmethod
    def from_wire(cls, doc: dict) -> ChatMessage:
        return cls(
            role=doc["role"],
            content=doc.get("content") or "",
            tool_calls=tuple(ToolCall.from_wire(c) for c in doc.get("tool_calls") or ()),
            tool_call_id=doc.get("tool_call_id"),
            name=doc.get("name"),
        )


def system(text: str) -> ChatMessage:
    return ChatMessage("system", text)


def user(text: str) -> ChatMessage:
    return ChatMessage("user", text)


@dataclass(frozen=True)
class ToolParameter:
    name: str
    type: str = "string"
    description: str = ""
    required: bool = True
    items: str | None = None

    def __post_init__(self):
        if self.type not in _JSON_TYPES:
            raise ValueError(f"parameter {self.name}: unsupported type {self.type!r}")


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    parameters: tuple[ToolParameter, ...] = ()

    def to_wire(self) -> dict:
        props = {}
        for p in self.parameters:
            prop: dict[str, Any] = {"type": p.type, "description": p.description}
            if p.type == "array":
                prop["items"] = {"type": p.items} if p.items else {}
            props[p.name] = prop
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": props,
                    "required": [p.name for p in self.parameters if p.required],
                },
            },
        }


def check_transcript(messages: list[ChatMessage]) -> None:
    """Raise ValueError unless every tool message answers exactly one earlier call."""
    open_calls: dict[str, int] = {}
    answered: set[str] = set()
    for i, msg in enumerate(messages):
        if msg.role == "assistant":
            for call in msg.tool_calls:
                if call.id in open_calls or call.id in answered:
                    raise ValueError(f"message {i}: tool call id {call.id!r} reused")
                open_calls[call.id] = i
        elif msg.role == "tool":
            if msg.tool_call_id not in open_calls:
                raise ValueError(f"message {i}: tool result for unknown call {msg.tool_call_id!r}")
            del open_calls[msg.tool_call_id]
            answered.add(msg.tool_call_id)
