"""Team configuration: roots, per-agent model labels, caps, provider endpoint."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..errors import ConfigurationError

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

DEFAULT_MODELS = {
    "supervisor": "gpt-5",
    "structure_expert": "gpt-5-mini",
    "forcefield_expert": "gpt-5",
    "input_expert": "gpt-5",
    "coding_expert": "gpt-5",
    "evaluator": "gpt-5",
    "paper_search": "gpt-5-mini",
    "paper_extraction": "gpt-5-mini",
    "forcefield_writer": "gpt-5",
    "top_supervisor": "gpt-5",
}

ENV_PREFIX = "RASPAGENT_"


@dataclass(frozen=True)
class TeamConfig:
    library_roots: tuple[Path, ...] = (DATA_DIR / "library",)
    structures_root: Path = DATA_DIR / "structures"
    examples_root: Path = DATA_DIR / "examples"
    corpus_root: Path = DATA_DIR / "corpus"
    dummy_ff_root: Path = DATA_DIR / "dummy_ff"
    models: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MODELS))
    max_revisions: int = 1
    max_search_rounds: int = 3
    max_steps: int = 16
    cutoff_warning: float = 20.0
    endpoint: str | None = None
    api_key: str | None = None
    literature_mode: str = "fixture"
    semantic_scholar_url: str = "https://api.semanticscholar.org"
    semantic_scholar_key: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "library_roots", tuple(Path(p) for p in self.library_roots))
        for name in ("structures_root", "examples_root", "corpus_root", "dummy_ff_root"):
            object.__setattr__(self, name, Path(getattr(self, name)))
        if self.literature_mode not in ("fixture", "live"):
            raise ConfigurationError(f"literature_mode must be 'fixture' or 'live', not {self.literature_mode!r}")
        if self.max_revisions < 0 or self.max_search_rounds < 1 or self.max_steps < 1:
            raise ConfigurationError("revision/search/step caps out of range")

    def model_for(self, agent: str) -> str:
        return self.models.get(agent, DEFAULT_MODELS.get(agent, "gpt-5"))

    def with_library(self, root: str | Path) -> TeamConfig:
        """Copy with ``root`` searched before the existing libraries."""
        return replace(self, library_roots=(Path(root), *self.library_roots))


def _coerce(name: str, value):
    if name == "library_roots":
        return tuple(Path(p) for p in (value if isinstance(value, (list, tuple)) else str(value).split(os.pathsep)))
    if name in ("max_revisions", "max_search_rounds", "max_steps"):
        return int(value)
    if name == "cutoff_warning":
        return float(value)
    return value


def load_config(path: str | Path | None = None, env: dict | None = None) -> TeamConfig:
    """Defaults, then the config file, then ``RASPAGENT_*`` environment variables."""
    env = os.environ if env is None else env
    doc: dict = {}
    if path is not None:
        path = Path(path)
        text = path.read_text()
        doc = (json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)) or {}
        base = path.parent
        for key in ("structures_root", "examples_root", "corpus_root", "dummy_ff_root"):
            if key in doc:
                doc[key] = base / doc[key]
        if "library_roots" in doc:
            doc["library_roots"] = [base / p for p in doc["library_roots"]]
    names = {f.name for f in fields(TeamConfig)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    for name in names:
        key = ENV_PREFIX + name.upper()
        if key in env:
            doc[name] = env[key]
    if "models" in doc:
        doc["models"] = {**DEFAULT_MODELS, **doc["models"]}
    try:
        return TeamConfig(**{k: _coerce(k, v) for k, v in doc.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
