"""Repeated-run benchmarks over setup tasks and research targets.

A suite file (YAML or JSON) lists setup tasks and research targets. Offline,
every repetition needs a replay script; these are checked before anything
runs. Results go to ``results.jsonl`` (one record per run plus one summary
per entry) and ``table.txt``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from ..agentcore import PROVIDER_ERROR, ReplayProvider
from ..crews import TeamConfig, load_config, run_research_team, run_setup_team
from ..errors import ConfigurationError
from ..simlint import OutcomeLabel
from ..tasks import TaskRequest
from .params import ParameterSet, ScoreReport, batch_rates_exact, bundle_parameter_set, score_parameters

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SetupEntry:
    label: str
    request: TaskRequest
    replays: tuple[Path, ...] = ()


@dataclass(frozen=True)
class ResearchEntry:
    label: str
    target: str
    reference: Path
    replays: tuple[Path, ...] = ()


@dataclass
class Suite:
    name: str
    setup: list[SetupEntry] = field(default_factory=list)
    research: list[ResearchEntry] = field(default_factory=list)
    config: TeamConfig = field(default_factory=TeamConfig)


@dataclass
class BenchmarkResult:
    label: str
    repetitions: int
    outcomes: list[OutcomeLabel]
    structures: int = 0
    adsorbates: int = 0
    kind: str = ""

    @property
    def exact_rates(self) -> tuple[Fraction, Fraction]:
        return batch_rates_exact(self.outcomes)

    @property
    def success_rate(self) -> float:
        return float(self.exact_rates[0])

    @property
    def execution_rate(self) -> float:
        return float(self.exact_rates[1])


@dataclass
class ResearchResult:
    label: str
    repetitions: int
    scores: list[ScoreReport]

    def _mean(self, attr: str) -> float:
        return sum(getattr(s, attr) for s in self.scores) / len(self.scores)

    @property
    def missed(self) -> float:
        return self._mean("missed")

    @property
    def wrong(self) -> float:
        return self._mean("wrong")

    @property
    def iou(self) -> float:
        return self._mean("iou")


@dataclass
class BenchmarkReport:
    setup: list[BenchmarkResult]
    research: list[ResearchResult]
    records: list[dict]
    provider_errors: int = 0

    def results_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


# --------------------------------------------------------------------------
# suite loading


def _replays(doc: dict, base: Path) -> tuple[Path, ...]:
    if "replay" in doc:
        return (base / doc["replay"],)
    return tuple(base / p for p in doc.get("replays", ()))


def load_suite(source: str | Path | dict, base: Path | None = None, config: TeamConfig | None = None) -> Suite:
    if isinstance(source, dict):
        doc = source
        base = base or Path.cwd()
    else:
        path = Path(source)
        text = path.read_text()
        doc = (json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)) or {}
        base = base or path.parent
    if config is None:
        config = load_config(base / doc["config"]) if doc.get("config") else TeamConfig()
    suite = Suite(name=doc.get("name", "suite"), config=config)
    for k, item in enumerate(doc.get("setup") or ()):
        request = item["request"]
        if isinstance(request, str):
            req_path = base / request
            req_doc = json.loads(req_path.read_text()) if req_path.suffix == ".json" else yaml.safe_load(req_path.read_text())
            request = req_doc
        suite.setup.append(SetupEntry(item.get("label", f"setup-{k}"), TaskRequest.from_dict(request), _replays(item, base)))
    for k, item in enumerate(doc.get("research") or ()):
        if "reference" not in item or "target" not in item:
            raise ConfigurationError(f"research entry {k} needs 'target' and 'reference'")
        suite.research.append(
            ResearchEntry(item.get("label", item["target"]), item["target"], base / item["reference"], _replays(item, base))
        )
    return suite


def _check_replays(suite: Suite, repetitions: int) -> None:
    problems = []
    for entry in [*suite.setup, *suite.research]:
        if not entry.replays:
            problems.append(f"{entry.label}: no replay script")
            continue
        if len(entry.replays) not in (1, repetitions):
            problems.append(f"{entry.label}: {len(entry.replays)} replay scripts for {repetitions} repetitions")
        problems += [f"{entry.label}: replay script {p} not found" for p in entry.replays if not p.is_file()]
    for entry in suite.research:
        if not entry.reference.is_file():
            problems.append(f"{entry.label}: reference {entry.reference} not found")
    if problems:
        raise ConfigurationError("benchmark suite is not runnable offline:\n  " + "\n  ".join(problems))


# --------------------------------------------------------------------------
# running


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def run_benchmark(suite: Suite | str | Path, repetitions: int, out_dir: str | Path, provider=None) -> BenchmarkReport:
    """Run every suite entry ``repetitions`` times.

    With ``provider=None`` each run replays its script; otherwise the given
    (live) provider is shared by all runs.
    """
    if repetitions < 1:
        raise ConfigurationError("repetitions must be at least 1")
    if not isinstance(suite, Suite):
        suite = load_suite(suite)
    if provider is None:
        _check_replays(suite, repetitions)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: list[dict] = []
    provider_errors = 0

    def provider_for(entry, rep):
        if provider is not None:
            return provider
        return ReplayProvider(entry.replays[rep if len(entry.replays) > 1 else 0])

    setup_results = []
    for i, entry in enumerate(suite.setup):
        outcomes = []
        available = sorted(p.stem for p in suite.config.structures_root.glob("*.cif"))
        n_structures = len(entry.request.select_structures(available))
        for rep in range(repetitions):
            workspace = out / "work" / f"setup{i:02d}_rep{rep}"
            outcome = run_setup_team(entry.request, suite.config, provider_for(entry, rep), workspace)
            errors = sum(t.terminated_by == PROVIDER_ERROR for t in outcome.transcripts)
            provider_errors += errors
            outcomes.append(outcome.label)
            records.append({
                "kind": "setup", "label": entry.label, "rep": rep,
                "team_success": outcome.success,
                "correctly_configured": outcome.label.correctly_configured,
                "executable": outcome.label.executable,
                "folders": len(outcome.folders),
                "lint_errors": outcome.lint_errors,
                "rules": sorted({f.rule for fs in outcome.findings.values() for f in fs}),
                "provider_errors": errors,
            })
        result = BenchmarkResult(entry.label, repetitions, outcomes, n_structures, len(entry.request.adsorbates), entry.request.kind)
        success, execution = result.exact_rates
        records.append({
            "kind": "setup-summary", "label": entry.label, "repetitions": repetitions,
            "success_rate": _frac(success), "execution_rate": _frac(execution),
        })
        setup_results.append(result)

    research_results = []
    for i, entry in enumerate(suite.research):
        reference = ParameterSet.load(entry.reference)
        scores = []
        for rep in range(repetitions):
            workspace = out / "work" / f"research{i:02d}_rep{rep}"
            outcome = run_research_team(entry.target, suite.config, provider_for(entry, rep), workspace)
            errors = sum(t.terminated_by == PROVIDER_ERROR for t in outcome.transcripts)
            provider_errors += errors
            extracted = bundle_parameter_set(outcome.bundle) if outcome.bundle is not None else ParameterSet()
            score = score_parameters(extracted, reference)
            scores.append(score)
            records.append({
                "kind": "research", "label": entry.label, "rep": rep,
                "team_success": outcome.success,
                "missed": score.missed, "wrong": score.wrong, "extra": score.extra,
                "matched": score.matched, "iou": round(score.iou, 6),
                "papers": [p.identifier for p in outcome.papers],
                "provider_errors": errors,
            })
        result = ResearchResult(entry.label, repetitions, scores)
        records.append({
            "kind": "research-summary", "label": entry.label, "repetitions": repetitions,
            "missed": round(result.missed, 6), "wrong": round(result.wrong, 6), "iou": round(result.iou, 6),
        })
        research_results.append(result)

    report = BenchmarkReport(setup_results, research_results, records, provider_errors)
    (out / "results.jsonl").write_text(report.results_jsonl())
    (out / "table.txt").write_text(render_tables(report))
    return report


def render_tables(report: BenchmarkReport) -> str:
    lines = []
    if report.setup:
        lines.append(f"{'Task':<20} {'Structures':>10} {'Adsorbates':>10} {'Success':>8} {'Execution':>10}")
        lines.append("-" * 62)
        for r in report.setup:
            lines.append(
                f"{r.kind:<20} {r.structures:>10} {r.adsorbates:>10} {r.success_rate:>7.0%} {r.execution_rate:>10.0%}"
            )
    if report.research:
        if lines:
            lines.append("")
        lines.append(f"{'Force field':<32} {'Missed':>7} {'Wrong':>7} {'IoU':>6}")
        lines.append("-" * 55)
        for r in report.research:
            lines.append(f"{r.label:<32} {r.missed:>7.1f} {r.wrong:>7.1f} {r.iou:>6.2f}")
    return "\n".join(lines) + "\n"
