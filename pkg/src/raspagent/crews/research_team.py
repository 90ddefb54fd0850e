"""Research team: paper search -> parameter extraction -> force-field writing.

The pipeline runs once, except that references the extraction agent asks
for trigger further search/extraction rounds (bounded by
``config.max_search_rounds``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .. import forcefield
from ..agentcore import AgentConfig, AgentOutcome, GlobalMemory, run_react
from ..errors import RaspagentError
from ..forcefield import ForceFieldBundle
from . import prompts
from .config import TeamConfig
from .literature import PaperRecord
from .toolbox import FILE_TOOLS, ExtractionFindings, Session, tool_registry

logger = logging.getLogger(__name__)

AGENT_TOOLS = {
    "paper_search": ("semantic_scholar_search", "download_paper"),
    "paper_extraction": ("read_paper_headers", "read_paper_section", "record_parameter", "record_note", "request_reference", "read_findings"),
    "forcefield_writer": ("read_findings", "write_force_field_bundle", "list_files", "read_file"),
}
PROMPTS = {
    "paper_search": prompts.PAPER_SEARCH,
    "paper_extraction": prompts.PAPER_EXTRACTION,
    "forcefield_writer": prompts.FORCEFIELD_WRITER,
}


def agent_config(name: str, config: TeamConfig) -> AgentConfig:
    return AgentConfig(name, PROMPTS[name], AGENT_TOOLS[name], config.max_steps, config.model_for(name))


@dataclass
class ResearchOutcome:
    success: bool
    bundle: ForceFieldBundle | None
    bundle_dir: Path | None
    findings: ExtractionFindings
    papers: list[PaperRecord]
    transcripts: list[AgentOutcome]
    memory: GlobalMemory
    search_rounds: int = 0
    feedback: str = ""
    workspace: Path | None = None

    @property
    def identifier(self) -> str | None:
        return self.bundle.name if self.bundle is not None else None


def _search_instruction(target: str, first: bool) -> str:
    if first:
        return f"Find and download the paper describing this force field: {target}"
    return f"The extraction agent needs a cited work. Find and download: {target}"


def run_research_team(target: str, config: TeamConfig, provider, workspace: str | Path,
                      memory: GlobalMemory | None = None, literature=None) -> ResearchOutcome:
    """Turn a query or DOI into a force-field bundle under ``<workspace>/extracted/<paper-id>``."""
    session = Session(config, workspace, memory=memory, provider=provider, literature=literature)
    registry = tool_registry(config, session)
    transcripts: list[AgentOutcome] = []

    def finish(success: bool, feedback: str = "", bundle=None, rounds: int = 0) -> ResearchOutcome:
        if not success:
            session.memory.report("research_team", f"research failed: {feedback}", status="failed")
        return ResearchOutcome(
            success=success,
            bundle=bundle,
            bundle_dir=session.bundle_dir if success else None,
            findings=session.findings,
            papers=list(session.papers.values()),
            transcripts=transcripts,
            memory=session.memory,
            search_rounds=rounds,
            feedback=feedback,
            workspace=session.workspace,
        )

    pending = [target]
    requested: set[str] = set()
    rounds = 0
    while pending and rounds < config.max_search_rounds:
        wanted = pending.pop(0)
        requested.add(wanted)
        rounds += 1
        before = set(session.papers)
        outcome = run_react(agent_config("paper_search", config), _search_instruction(wanted, rounds == 1),
                            registry, provider, session.memory)
        transcripts.append(outcome)
        new = [pid for pid in session.papers if pid not in before]
        if not new:
            if rounds == 1:
                return finish(False, f"no paper found for {target!r}", rounds=rounds)
            logger.warning("search round %d found nothing for %r", rounds, wanted)
            continue
        instruction = (
            f"Extract the force-field parameters from paper(s) {', '.join(new)}."
            if rounds == 1
            else f"Extract the parameters that {session.findings.source} takes from {', '.join(new)}."
        )
        outcome = run_react(agent_config("paper_extraction", config), instruction, registry, provider, session.memory)
        transcripts.append(outcome)
        pending.extend(c for c in session.findings.unresolved if c not in requested and c not in pending)

    if pending:
        logger.warning("search-round cap reached with unresolved references: %s", pending)
    if not len(session.findings.parameters):
        return finish(False, "extraction produced no parameters", rounds=rounds)

    outcome = run_react(
        agent_config("forcefield_writer", config),
        f"Write the force field extracted from {session.findings.source} as RASPA files.",
        registry, provider, session.memory,
    )
    transcripts.append(outcome)
    if session.bundle_dir is None:
        return finish(False, "the force-field writer did not produce a bundle", rounds=rounds)
    try:
        bundle = forcefield.load_bundle(session.bundle_dir)
    except RaspagentError as exc:
        return finish(False, f"written bundle is unreadable: {exc}", rounds=rounds)
    session.memory.report(
        "research_team",
        f"force field {bundle.name} extracted from {', '.join(session.findings.consulted)}",
        outputs=[("force-field", f"extracted/{bundle.name}")],
    )
    return finish(True, bundle=bundle, rounds=rounds)
