from .memory import GlobalMemory, MemoryReport, logical_clock, memory_append, memory_render
from .messages import ChatMessage, ToolCall, ToolParameter, ToolSchema, check_transcript
from .providers import ChatCompletionsProvider, Provider, ReplayProvider, ScriptEntry, dump_script, load_script, parse_script
from .react import (
    FINAL_ANSWER,
    PROVIDER_ERROR,
    STEP_LIMIT,
    AgentConfig,
    AgentOutcome,
    ReviewPacket,
    Verdict,
    evaluator_review,
    run_react,
    write_transcripts,
)
from .tools import Tool, ToolRegistry, ToolResult, param, tool

__all__ = [
    "AgentConfig",
    "AgentOutcome",
    "ChatCompletionsProvider",
    "ChatMessage",
    "FINAL_ANSWER",
    "GlobalMemory",
    "MemoryReport",
    "PROVIDER_ERROR",
    "Provider",
    "ReplayProvider",
    "ReviewPacket",
    "STEP_LIMIT",
    "ScriptEntry",
    "Tool",
    "ToolCall",
    "ToolParameter",
    "ToolRegistry",
    "ToolResult",
    "ToolSchema",
    "Verdict",
    "check_transcript",
    "dump_script",
    "evaluator_review",
    "load_script",
    "logical_clock",
    "memory_append",
    "memory_render",
    "param",
    "parse_script",
    "run_react",
    "tool",
    "write_transcripts",
]
