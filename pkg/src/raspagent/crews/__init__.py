"""Agent teams: experiment setup, literature research, and the combined run."""

from .combined import CombinedOutcome, literature_source, run_combined
from .config import DEFAULT_MODELS, TeamConfig, load_config
from .literature import FixtureCorpus, PaperRecord, SemanticScholarClient, read_headers, read_section, search_papers
from .research_team import ResearchOutcome, run_research_team
from .setup_team import SETUP_ORDER, SetupOutcome, run_setup_team
from .toolbox import TABLE_TOOLS, ExtractionFindings, Session, invoke_tool, tool_registry

__all__ = [
    "CombinedOutcome",
    "DEFAULT_MODELS",
    "ExtractionFindings",
    "FixtureCorpus",
    "PaperRecord",
    "ResearchOutcome",
    "SETUP_ORDER",
    "SemanticScholarClient",
    "Session",
    "SetupOutcome",
    "TABLE_TOOLS",
    "TeamConfig",
    "invoke_tool",
    "literature_source",
    "load_config",
    "read_headers",
    "read_section",
    "run_combined",
    "run_research_team",
    "run_setup_team",
    "search_papers",
    "tool_registry",
]
