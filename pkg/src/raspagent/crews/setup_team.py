"""Experiment setup team: a supervisor delegating to four experts, each gated by an evaluator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .. import simlint
from ..agentcore import (
    AgentConfig,
    AgentOutcome,
    GlobalMemory,
    ReviewPacket,
    ToolResult,
    Verdict,
    evaluator_review,
    run_react,
)
from ..simlint import Finding, OutcomeLabel
from ..tasks import TaskRequest
from . import prompts
from .config import TeamConfig
from .toolbox import FILE_TOOLS, Session, lint_text, tool_registry

logger = logging.getLogger(__name__)

SETUP_ORDER = ("structure_expert", "forcefield_expert", "input_expert", "coding_expert")

READ_ONLY_TOOLS = ("list_files", "read_file", "read_atoms_in_file", "get_unit_cell_size", "get_atoms_in_ff_file", "validate_folder")

AGENT_TOOLS = {
    "supervisor": ("delegate", "read_memory", "list_files", "list_structures", "get_all_force_field_descriptions"),
    "structure_expert": ("list_structures", "read_atoms_in_file", "count_atom_type_in_cif", "get_unit_cell_size", *FILE_TOOLS),
    "forcefield_expert": ("get_all_force_field_descriptions", "get_atoms_in_ff_file", "read_atoms_in_file", "combine_force_fields", *FILE_TOOLS),
    "input_expert": ("list_all_example_simulation_inputs", "read_example_input", "get_unit_cell_size", "compute_unit_cells", "write_simulation_input", *FILE_TOOLS),
    "coding_expert": ("replicate_template", "list_structures", "compute_unit_cells", *FILE_TOOLS),
    "evaluator": READ_ONLY_TOOLS,
}

PROMPTS = {
    "supervisor": prompts.SUPERVISOR,
    "structure_expert": prompts.STRUCTURE_EXPERT,
    "forcefield_expert": prompts.FORCEFIELD_EXPERT,
    "input_expert": prompts.INPUT_EXPERT,
    "coding_expert": prompts.CODING_EXPERT,
    "evaluator": prompts.EVALUATOR,
}


def agent_config(name: str, config: TeamConfig) -> AgentConfig:
    return AgentConfig(name, PROMPTS[name], AGENT_TOOLS[name], config.max_steps, config.model_for(name))


@dataclass(frozen=True)
class Gate:
    agent: str
    round: int
    verdict: Verdict


@dataclass
class SetupOutcome:
    success: bool
    workspace: Path
    folders: list[Path]
    findings: dict[str, list[Finding]]
    label: OutcomeLabel
    transcripts: list[AgentOutcome]
    memory: GlobalMemory
    gates: list[Gate] = field(default_factory=list)
    feedback: str = ""

    @property
    def lint_errors(self) -> int:
        return sum(f.is_error for fs in self.findings.values() for f in fs)


def task_prompt(request: TaskRequest) -> str:
    lines = [f"Request: set up {request.kind} simulations."]
    lines.append("Adsorbates: " + ", ".join(request.adsorbates))
    if request.structures:
        lines.append("Structures: " + ", ".join(request.structures))
    else:
        lines.append(f"Structures: all matching '{request.structure_glob or '*'}'")
    lines.append(f"Temperature: {request.temperature} K")
    if request.pressures:
        lines.append("Pressures [Pa]: " + ", ".join(repr(p) for p in request.pressures))
    lines.append(f"Force field: {request.forcefield}")
    if request.notes:
        lines.append(request.notes)
    return "\n".join(lines)


def _lint_workspace(session: Session) -> str:
    parts = []
    for folder in sorted(p for p in session.workspace.iterdir() if p.is_dir()):
        if folder.name.startswith("_template") and (folder / "simulation.input").exists():
            parts.append(lint_text(folder, session.task, allow_placeholders=True, cutoff_warning=session.config.cutoff_warning))
    findings = simlint.validate_batch(session.workspace, session.task, cutoff_warning=session.config.cutoff_warning)
    errors = [f for fs in findings.values() for f in fs]
    if findings:
        parts.append(f"{len(findings)} simulation folder(s) checked, {sum(f.is_error for f in errors)} error(s)")
        parts.append(simlint.render_report(errors[:50]))
    return "\n".join(p.rstrip("\n") for p in parts if p) or "no simulation inputs yet"


def _workspace_files(session: Session, limit: int = 60) -> list[str]:
    files = sorted(str(p.relative_to(session.workspace)) for p in session.workspace.rglob("*") if p.is_file())
    if len(files) > limit:
        return files[:limit] + [f"... {len(files) - limit} more"]
    return files


class SetupTeam:
    def __init__(self, request: TaskRequest, config: TeamConfig, provider, workspace: str | Path,
                 memory: GlobalMemory | None = None):
        self.request = request
        self.config = config
        self.provider = provider
        self.session = Session(config, workspace, task=request, memory=memory, provider=provider)
        self.session.delegate = self._delegate
        self.registry = tool_registry(config, self.session)
        self.transcripts: list[AgentOutcome] = []
        self.gates: list[Gate] = []
        self.stage = 0
        self.failure: str | None = None

    def _delegate(self, agent: str, instruction: str) -> ToolResult:
        if self.failure is not None:
            return ToolResult(f"error: the team has already failed: {self.failure}", is_error=True)
        if agent not in SETUP_ORDER:
            return ToolResult(f"error: unknown agent {agent!r}; team members: {', '.join(SETUP_ORDER)}", is_error=True)
        if self.stage >= len(SETUP_ORDER):
            return ToolResult("error: all stages are complete", is_error=True)
        expected = SETUP_ORDER[self.stage]
        if agent != expected:
            return ToolResult(f"error: delegate to {expected} next (order: {' -> '.join(SETUP_ORDER)})", is_error=True)

        worker = agent_config(agent, self.config)
        evaluator = agent_config("evaluator", self.config)
        task = instruction
        feedback = ""
        for round_ in range(self.config.max_revisions + 1):
            outcome = run_react(worker, task, self.registry, self.provider, self.session.memory)
            self.transcripts.append(outcome)
            packet = ReviewPacket(
                author=agent,
                instruction=instruction,
                files=_workspace_files(self.session),
                report=self.session.memory.reports[-1] if len(self.session.memory) else None,
                lint_report=_lint_workspace(self.session),
            )
            verdict, review = evaluator_review(evaluator, packet, self.provider, self.registry, self.session.memory)
            self.transcripts.append(review)
            self.gates.append(Gate(agent, round_, verdict))
            if verdict.approved:
                self.stage += 1
                return ToolResult(f"{agent} finished and was approved: {outcome.final_answer}")
            feedback = verdict.feedback
            task = f"{instruction}\n\nThe evaluator asked for a revision:\n{feedback}"
        self.failure = f"{agent} rejected after {self.config.max_revisions} revision(s): {feedback}"
        return ToolResult(f"error: {self.failure}", is_error=True)

    def run(self) -> SetupOutcome:
        supervisor = agent_config("supervisor", self.config)
        top = run_react(supervisor, task_prompt(self.request), self.registry, self.provider, self.session.memory)
        self.transcripts.append(top)

        findings = simlint.validate_batch(self.session.workspace, self.request, cutoff_warning=self.config.cutoff_warning)
        label = simlint.combine_outcomes([simlint.classify_outcome(f) for f in findings.values()])
        errors = sum(f.is_error for fs in findings.values() for f in fs)
        warnings = sum(not f.is_error for fs in findings.values() for f in fs)
        expected = len(self.request.select_structures(self.session.structure_names()))
        expected *= 1 if self.request.is_mixture else len(self.request.adsorbates)
        if self.failure is None and len(findings) < expected:
            self.failure = f"{len(findings)} simulation folder(s) for a request needing {expected}"
        success = (
            self.failure is None
            and self.stage == len(SETUP_ORDER)
            and top.succeeded
            and bool(findings)
        )
        self.session.memory.report(
            "simlint",
            f"{len(findings)} folder(s) validated: {errors} error(s), {warnings} warning(s)",
            outputs=[("outcome", f"correct={label.correctly_configured} executable={label.executable}")],
            status="done" if success and errors == 0 else "failed",
        )
        return SetupOutcome(
            success=success,
            workspace=self.session.workspace,
            folders=simlint.batch_folders(self.session.workspace),
            findings=findings,
            label=label,
            transcripts=self.transcripts,
            memory=self.session.memory,
            gates=self.gates,
            feedback=self.failure or "",
        )


def run_setup_team(request: TaskRequest, config: TeamConfig, provider, workspace: str | Path,
                   memory: GlobalMemory | None = None) -> SetupOutcome:
    return SetupTeam(request, config, provider, workspace, memory).run()
