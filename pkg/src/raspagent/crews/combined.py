"""Combined run: a top-level supervisor drives the research team, then the setup team."""

from __future__ import annotations

import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..agentcore import AgentConfig, AgentOutcome, GlobalMemory, ToolResult, logical_clock, run_react
from ..errors import ConfigurationError
from ..tasks import TaskRequest
from . import prompts
from .config import TeamConfig
from .research_team import ResearchOutcome, run_research_team
from .setup_team import SetupOutcome, SetupTeam, task_prompt
from .toolbox import Session, tool_registry

LITERATURE_PREFIXES = ("doi:", "paper:", "query:")
TOP_TOOLS = ("delegate_team", "read_memory")


def literature_source(directive: str) -> str | None:
    """The paper named by a force-field directive such as ``doi:10.1000/x``, if any."""
    low = directive.lower()
    if low.startswith("doi:"):
        return directive[4:].strip()
    if low.startswith(("paper:", "query:")):
        return directive.split(":", 1)[1].strip()
    return None


@dataclass
class CombinedOutcome:
    success: bool
    research: ResearchOutcome | None
    setup: SetupOutcome | None
    memory: GlobalMemory
    transcripts: list[AgentOutcome] = field(default_factory=list)
    feedback: str = ""

    def all_transcripts(self) -> list[AgentOutcome]:
        out = list(self.transcripts)
        if self.research is not None:
            out = self.research.transcripts + out
        if self.setup is not None:
            out = out + self.setup.transcripts
        return out


class CombinedRun:
    def __init__(self, request: TaskRequest, config: TeamConfig, provider, workspace: str | Path,
                 source: str | None = None, literature=None):
        self.request = request
        self.config = config
        self.provider = provider
        self.workspace = Path(workspace)
        self.source = source or literature_source(request.forcefield)
        if not self.source:
            raise ConfigurationError(
                f"combined runs need a literature source; force-field directive is {request.forcefield!r}"
            )
        self.literature = literature
        self.memory = GlobalMemory(logical_clock())
        self.session = Session(config, self.workspace / "supervisor", task=request, memory=self.memory, provider=provider)
        self.session.delegate_team = self._delegate_team
        self.registry = tool_registry(config, self.session)
        self.research: ResearchOutcome | None = None
        self.setup: SetupOutcome | None = None

    def _register(self, research: ResearchOutcome) -> TeamConfig:
        """Copy the extracted bundle into the run's library overlay."""
        library = self.workspace / "library"
        dest = library / "extracted" / research.bundle_dir.name
        if dest.exists():
            shutil.rmtree(dest)
        shutil.copytree(research.bundle_dir, dest)
        return self.config.with_library(library)

    def _delegate_team(self, team: str, instruction: str) -> ToolResult:
        if team == "research":
            if self.research is not None and self.research.success:
                return ToolResult("error: research already completed", is_error=True)
            self.research = run_research_team(self.source, self.config, self.provider, self.workspace / "research",
                                              self.memory, literature=self.literature)
            if not self.research.success:
                return ToolResult(f"error: research team failed: {self.research.feedback}", is_error=True)
            return ToolResult(
                f"research team extracted force field extracted/{self.research.identifier} "
                f"({len(self.research.findings.parameters)} parameters)",
                [("force-field", f"extracted/{self.research.identifier}")],
            )
        if team == "setup":
            if self.research is None or not self.research.success:
                return ToolResult("error: the research team must produce a force field before setup", is_error=True)
            if self.setup is not None:
                return ToolResult("error: setup already ran", is_error=True)
            config = self._register(self.research)
            request = replace(self.request, forcefield=f"extracted/{self.research.identifier}")
            team_ = SetupTeam(request, config, self.provider, self.workspace / "setup", self.memory)
            self.setup = team_.run()
            if not self.setup.success:
                return ToolResult(f"error: setup team failed: {self.setup.feedback or 'validation errors'}", is_error=True)
            return ToolResult(f"setup team prepared {len(self.setup.folders)} folder(s), {self.setup.lint_errors} lint error(s)")
        return ToolResult(f"error: unknown team {team!r}; teams: research, setup", is_error=True)

    def run(self) -> CombinedOutcome:
        agent = AgentConfig("top_supervisor", prompts.TOP_SUPERVISOR, TOP_TOOLS, self.config.max_steps,
                            self.config.model_for("top_supervisor"))
        task = (
            f"Force-field source: {self.source}\n"
            + task_prompt(replace(self.request, forcefield="extracted by the research team"))
        )
        top = run_react(agent, task, self.registry, self.provider, self.memory)
        success = (
            top.succeeded
            and self.research is not None and self.research.success
            and self.setup is not None and self.setup.success
            and self.setup.lint_errors == 0
        )
        feedback = ""
        if self.research is None or not self.research.success:
            feedback = self.research.feedback if self.research else "research team was never run"
        elif self.setup is None or not self.setup.success:
            feedback = self.setup.feedback if self.setup else "setup team was never run"
        return CombinedOutcome(success, self.research, self.setup, self.memory, [top], feedback)


def run_combined(request: TaskRequest, config: TeamConfig, provider, workspace: str | Path,
                 source: str | None = None, literature=None) -> CombinedOutcome:
    return CombinedRun(request, config, provider, workspace, source, literature).run()
