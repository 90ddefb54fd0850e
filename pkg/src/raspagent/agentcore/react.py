"""ReAct loop and evaluator gating."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError, ProviderError
from .memory import GlobalMemory, MemoryReport, memory_render
from .messages import ChatMessage, ToolCall, check_transcript
from .providers import Provider
from .tools import ToolRegistry

logger = logging.getLogger(__name__)

FINAL_ANSWER = "final-answer"
STEP_LIMIT = "step-limit"
PROVIDER_ERROR = "provider-error"


@dataclass(frozen=True)
class AgentConfig:
    name: str
    system_prompt: str
    tools: tuple[str, ...] = ()
    max_steps: int = 12
    model: str = "gpt-5"

    def __post_init__(self):
        if self.max_steps <= 0:
            raise ConfigurationError(f"agent {self.name}: max_steps must be positive")
        object.__setattr__(self, "tools", tuple(self.tools))
        if len(set(self.tools)) != len(self.tools):
            raise ConfigurationError(f"agent {self.name}: duplicate tool names")


@dataclass
class AgentOutcome:
    agent: str
    final_answer: str
    transcript: list[ChatMessage]
    terminated_by: str
    provider_calls: int
    artifacts: list[tuple[str, str]] = field(default_factory=list)

    @property
    def tool_invocations(self) -> int:
        return sum(1 for m in self.transcript if m.role == "tool")

    @property
    def succeeded(self) -> bool:
        return self.terminated_by == FINAL_ANSWER

    def to_jsonl(self) -> str:
        lines = []
        for i, m in enumerate(self.transcript):
            lines.append(json.dumps({"agent": self.agent, "index": i, **m.to_wire()}, sort_keys=True))
        return "\n".join(lines) + "\n"


def _summary(text: str, limit: int = 240) -> str:
    first = text.strip().splitlines()[0] if text.strip() else ""
    return first if len(first) <= limit else first[: limit - 3] + "..."


def run_react(
    agent: AgentConfig,
    task: str,
    registry: ToolRegistry,
    provider: Provider,
    memory: GlobalMemory | None = None,
    *,
    preamble: list[ChatMessage] = (),
    report: bool = True,
) -> AgentOutcome:
    """Alternate model calls and tool executions until the model answers.

    Tool failures are fed back to the model as tool results. At most
    ``agent.max_steps`` provider calls are made.
    """
    missing = [t for t in agent.tools if t not in registry]
    if missing:
        raise ConfigurationError(f"agent {agent.name}: tools not in registry: {missing}")
    toolset = registry.subset(list(agent.tools))
    schemas = toolset.schemas()

    prompt = task
    if memory is not None:
        prompt += "\n\n" + memory_render(memory, agent.name)
    messages = [ChatMessage("system", agent.system_prompt), ChatMessage("user", prompt), *preamble]
    artifacts: list[tuple[str, str]] = []
    final = ""
    terminated_by = STEP_LIMIT
    calls = 0
    seen_ids: set[str] = {c.id for m in messages for c in m.tool_calls}

    while calls < agent.max_steps:
        calls += 1
        try:
            reply = provider.complete(messages, schemas, agent.model, agent=agent.name)
        except ProviderError as exc:
            logger.warning("agent %s: provider error: %s", agent.name, exc)
            final = f"provider error: {exc}"
            terminated_by = PROVIDER_ERROR
            break
        ids = [c.id for c in reply.tool_calls]
        if any(not i for i in ids) or len(set(ids)) != len(ids) or seen_ids.intersection(ids):
            logger.warning("agent %s: reply with missing or reused tool call ids %s", agent.name, ids)
            final = f"provider error: malformed tool call ids {ids}"
            terminated_by = PROVIDER_ERROR
            break
        seen_ids.update(ids)
        messages.append(reply)
        if reply.tool_calls:
            for call in reply.tool_calls:
                result = toolset.invoke(call)
                artifacts.extend(result.artifacts)
                messages.append(ChatMessage("tool", result.text, tool_call_id=call.id, name=call.name))
            continue
        final = reply.content
        terminated_by = FINAL_ANSWER
        break
    else:
        final = f"stopped after {agent.max_steps} model calls without a final answer"

    check_transcript(messages)
    outcome = AgentOutcome(agent.name, final, messages, terminated_by, calls, artifacts)
    if report and memory is not None:
        memory.report(
            agent.name,
            _summary(final) or "(empty answer)",
            outputs=artifacts,
            status="done" if terminated_by == FINAL_ANSWER else "failed",
        )
    return outcome


# --------------------------------------------------------------------------
# evaluator


@dataclass(frozen=True)
class Verdict:
    approved: bool
    feedback: str = ""

    @classmethod
    def parse(cls, answer: str) -> Verdict:
        text = answer.strip()
        if text.startswith("APPROVE"):
            return cls(True, text[len("APPROVE"):].strip(" :\n"))
        if text.startswith("REVISE:"):
            return cls(False, text[len("REVISE:"):].strip())
        return cls(False, text)


@dataclass
class ReviewPacket:
    """What the evaluator gets to inspect after an agent finishes."""

    author: str
    instruction: str
    files: list[str]
    report: MemoryReport | None = None
    lint_report: str = ""


LINT_TOOL_NAME = "simlint_findings"


def evaluator_review(
    evaluator: AgentConfig,
    packet: ReviewPacket,
    provider: Provider,
    registry: ToolRegistry,
    memory: GlobalMemory | None = None,
) -> tuple[Verdict, AgentOutcome]:
    lines = [
        f"Review the work of agent '{packet.author}'.",
        f"Its instruction was: {packet.instruction}",
        "Files in the workspace:",
        *(f"  - {f}" for f in packet.files),
    ]
    if packet.report is not None:
        lines.append(f"Its report: {packet.report.digest()}")
    lines.append("Answer with 'APPROVE' or 'REVISE: <what to fix>'.")
    call = ToolCall(id="lint_0", name=LINT_TOOL_NAME, arguments={})
    preamble = [
        ChatMessage("assistant", "", (call,)),
        ChatMessage("tool", packet.lint_report or "no findings", tool_call_id=call.id, name=LINT_TOOL_NAME),
    ]
    outcome = run_react(evaluator, "\n".join(lines), registry, provider, memory, preamble=preamble)
    if outcome.terminated_by != FINAL_ANSWER:
        return Verdict(False, outcome.final_answer), outcome
    return Verdict.parse(outcome.final_answer), outcome


def write_transcripts(outcomes: list[AgentOutcome], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(o.to_jsonl() for o in outcomes))
    return path
