"""Language-model providers.

``ReplayProvider`` plays back a scripted conversation and is what the tests
and offline benchmarks use. ``ChatCompletionsProvider`` talks to any
OpenAI-compatible ``/chat/completions`` endpoint.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from ..errors import ProviderError, ReplayDivergenceError
from .messages import ChatMessage, ToolCall, ToolSchema

logger = logging.getLogger(__name__)


class Provider(Protocol):
    def complete(
        self,
        messages: list[ChatMessage],
        tools: list[ToolSchema],
        model: str,
        agent: str | None = None,
    ) -> ChatMessage: ...


def _check_request(messages: list[ChatMessage]) -> None:
    if not messages:
        raise ProviderError("empty message list")
    if messages[0].role not in ("system", "user"):
        raise ProviderError(f"conversation must start with a system or user message, not {messages[0].role}")


# --------------------------------------------------------------------------
# replay


@dataclass(frozen=True)
class ScriptEntry:
    message: ChatMessage
    agent: str | None = None
    # substring the latest request message must contain
    expect: str | None = None


def _entry_from_doc(doc: dict, position: int) -> ScriptEntry:
    calls = []
    for k, c in enumerate(doc.get("tool_calls") or ()):
        calls.append(ToolCall(id=c.get("id") or f"call_{position}_{k}", name=c["name"], arguments=c.get("arguments", {})))
    return ScriptEntry(
        message=ChatMessage("assistant", doc.get("content") or "", tuple(calls)),
        agent=doc.get("agent"),
        expect=doc.get("expect"),
    )


def entry_to_doc(entry: ScriptEntry) -> dict:
    doc: dict = {}
    if entry.agent:
        doc["agent"] = entry.agent
    if entry.message.content:
        doc["content"] = entry.message.content
    if entry.message.tool_calls:
        doc["tool_calls"] = [{"id": c.id, "name": c.name, "arguments": c.arguments} for c in entry.message.tool_calls]
    if entry.expect:
        doc["expect"] = entry.expect
    return doc


def parse_script(text: str) -> list[ScriptEntry]:
    """One JSON object per line; blank lines and ``//`` comments skipped."""
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProviderError(f"replay script line {lineno}: {exc}") from None
        entries.append(_entry_from_doc(doc, len(entries)))
    return entries


def load_script(path: str | Path) -> list[ScriptEntry]:
    return parse_script(Path(path).read_text())


def dump_script(entries: list[ScriptEntry]) -> str:
    return "".join(json.dumps(entry_to_doc(e), sort_keys=True) + "\n" for e in entries)


def script_entries(docs: list[dict]) -> list[ScriptEntry]:
    return [_entry_from_doc(d, i) for i, d in enumerate(docs)]


class ReplayProvider:
    def __init__(self, script: list[ScriptEntry] | list[dict] | str | Path):
        if isinstance(script, (str, Path)):
            script = load_script(script)
        elif script and isinstance(script[0], dict):
            script = script_entries(script)
        self.script: list[ScriptEntry] = list(script)
        self.position = 0
        self.calls = 0
        self.requests: list[dict] = []

    @property
    def remaining(self) -> int:
        return len(self.script) - self.position

    def complete(self, messages, tools, model, agent=None) -> ChatMessage:
        _check_request(messages)
        self.calls += 1
        self.requests.append({"agent": agent, "model": model, "tools": [t.name for t in tools], "messages": len(messages)})
        if self.position >= len(self.script):
            raise ProviderError(f"replay script exhausted after {len(self.script)} messages (request from {agent})")
        entry = self.script[self.position]
        if entry.agent is not None and agent is not None and entry.agent != agent:
            raise ReplayDivergenceError(
                f"replay divergence at entry {self.position}: expected request from {entry.agent!r}, got {agent!r}"
            )
        if entry.expect is not None and entry.expect not in messages[-1].content:
            raise ReplayDivergenceError(
                f"replay divergence at entry {self.position}: expected last message to contain "
                f"{entry.expect!r}, got {messages[-1].content[:200]!r}"
            )
        self.position += 1
        return entry.message


# --------------------------------------------------------------------------
# live


@dataclass
class ChatCompletionsProvider:
    base_url: str
    api_key: str | None = None
    timeout: float = 120.0
    max_retries: int = 2
    backoff: float = 1.0
    client: httpx.Client | None = field(default=None, repr=False)

    @classmethod
    def from_env(cls, base_url: str | None = None, api_key: str | None = None, **kwargs) -> ChatCompletionsProvider:
        url = os.environ.get("RASPAGENT_ENDPOINT", base_url or "")
        if not url:
            raise ProviderError("no provider endpoint configured (set RASPAGENT_ENDPOINT)")
        key = os.environ.get("RASPAGENT_API_KEY", api_key or "") or None
        return cls(base_url=url, api_key=key, **kwargs)

    def build_request(self, messages, tools, model) -> dict:
        doc = {"model": model, "messages": [m.to_wire() for m in messages]}
        if tools:
            doc["tools"] = [t.to_wire() for t in tools]
            doc["tool_choice"] = "auto"
        return doc

    def complete(self, messages, tools, model, agent=None) -> ChatMessage:
        _check_request(messages)
        body = self.build_request(messages, tools, model)
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.base_url.rstrip("/") + "/chat/completions"
        client = self.client or httpx.Client(timeout=self.timeout)
        attempts = 0
        last = ""
        try:
            while attempts <= self.max_retries:
                attempts += 1
                try:
                    response = client.post(url, json=body, headers=headers)
                except httpx.TransportError as exc:
                    last = f"transport failure: {exc}"
                else:
                    if response.status_code == 429 or response.status_code >= 500:
                        last = f"HTTP {response.status_code}: {response.text[:200]}"
                    elif response.status_code >= 400:
                        raise ProviderError(
                            f"HTTP {response.status_code}: {response.text[:200]}", retryable=False, attempts=attempts
                        )
                    else:
                        return self._parse(response)
                logger.warning("provider attempt %d failed: %s", attempts, last)
                if attempts <= self.max_retries:
                    time.sleep(self.backoff * 2 ** (attempts - 1))
        finally:
            if self.client is None:
                client.close()
        raise ProviderError(last, retryable=True, attempts=attempts)

    @staticmethod
    def _parse(response: httpx.Response) -> ChatMessage:
        try:
            doc = response.json()
            message = doc["choices"][0]["message"]
        except (ValueError, KeyError, IndexError) as exc:
            raise ProviderError(f"malformed chat-completions response: {exc}") from None
        message = dict(message)
        message["role"] = "assistant"
        return ChatMessage.from_wire(message)
