from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from raspagent import forcefield
from raspagent.agentcore import ReplayProvider, ToolCall, check_transcript
from raspagent.crews import (
    SETUP_ORDER,
    TABLE_TOOLS,
    FixtureCorpus,
    SemanticScholarClient,
    Session,
    TeamConfig,
    literature_source,
    load_config,
    read_headers,
    read_section,
    run_combined,
    run_research_team,
    run_setup_team,
    tool_registry,
)
from raspagent.errors import ConfigurationError, LiteratureError, SectionNotFoundError
from raspagent.evalbench import ParameterSet, bundle_parameter_set, score_parameters
from raspagent.evalbench.scenarios import combined_script, research_script, setup_script
from raspagent.tasks import TaskRequest

ISO = TaskRequest("isotherm", ("CO2",), structures=("MFI_SI",), pressures=(1e4, 1e5))
FFS = ["zeolite_framework", "trappe_adsorbates"]


@pytest.fixture
def corpus(config):
    return FixtureCorpus(config.corpus_root)


@pytest.fixture
def registry(config, tmp_path):
    return tool_registry(config, Session(config, tmp_path))


def call(registry, name, **arguments):
    return registry.invoke(ToolCall("c", name, arguments))


def test_registry_has_table_tools(registry):
    assert len(TABLE_TOOLS) == 10
    assert all(name in registry for name in TABLE_TOOLS)


def test_unknown_tool_lists_available(registry):
    result = call(registry, "frobnicate")
    assert result.is_error
    assert result.text.startswith("error: unknown tool 'frobnicate'; available: ")
    assert "get_atoms_in_ff_file" in result.text


def test_get_atoms_in_ff_file_cross_check(registry, config):
    path = config.library_roots[-1] / "trappe_adsorbates" / "pseudo_atoms.def"
    # independent read: first token of each data row after the count line
    lines = [line.split() for line in path.read_text().splitlines()]
    count = int(lines[1][0])
    expected = [row[0] for row in lines[3 : 3 + count]]
    result = call(registry, "get_atoms_in_ff_file", path="library/trappe_adsorbates/pseudo_atoms.def")
    assert json.loads(result.text) == expected


def test_cif_tools(registry):
    assert call(registry, "count_atom_type_in_cif", path="structures/MFI_SI.cif", atom_type="Si").text == "96"
    assert call(registry, "count_atom_type_in_cif", path="structures/MFI_SI.cif", atom_type="Zn").text == "0"
    cell = json.loads(call(registry, "get_unit_cell_size", path="structures/MFI_SI.cif").text)
    assert len(cell) == 6 or set(cell) >= {"a", "b", "c"}


def test_workspace_sandbox(registry):
    assert call(registry, "write_file", path="../escape.txt", content="x").is_error
    assert call(registry, "write_file", path="structures/new.cif", content="x").is_error
    assert not call(registry, "write_file", path="notes/a.txt", content="x").is_error
    assert call(registry, "read_file", path="notes/a.txt").text == "x"


def test_fixture_search_ranking(corpus):
    hits = corpus.search("transferable CO2 zeolite force field")
    # token-overlap oracle computed by hand from the corpus metadata
    assert [(h.identifier, h.score) for h in hits] == [("garcia2009", 4.0), ("trappezeo_2013", 3.0), ("epm2_1995", 1.0)]
    assert [h.identifier for h in corpus.search("transferable CO2 zeolite force field", limit=1)] == ["garcia2009"]
    assert corpus.search("graphene membrane desalination") == []
    with pytest.raises(ValueError):
        corpus.search("  ")


def test_paper_sections(corpus, config):
    paper = corpus.download("doi:10.5555/fixture.garcia.2009")
    assert read_headers(paper) == ["Introduction", "Methods", "Force field parameters", "Results"]
    body = (config.corpus_root / "garcia2009" / "body").read_text()
    section = read_section(paper, "Methods")
    assert section and section in body
    with pytest.raises(SectionNotFoundError, match="Introduction, Methods"):
        read_section(paper, "Appendix")
    with pytest.raises(LiteratureError):
        corpus.download("10.0000/unknown")


def test_setup_team_clean(config, tmp_path):
    provider = ReplayProvider(setup_script(ISO, FFS, config))
    outcome = run_setup_team(ISO, config, provider, tmp_path)
    assert outcome.success
    assert outcome.lint_errors == 0
    assert [p.name for p in outcome.folders] == ["MFI_SI_CO2_0"]
    assert outcome.label.correctly_configured and outcome.label.executable
    assert provider.remaining == 0
    delegated = [o.agent for o in outcome.transcripts if o.agent in SETUP_ORDER]
    assert delegated == list(SETUP_ORDER)
    authors = {r.author for r in outcome.memory}
    assert set(SETUP_ORDER) | {"supervisor", "evaluator", "simlint"} <= authors
    for o in outcome.transcripts:
        check_transcript(o.transcript)


def test_setup_team_mixture_revised(config, tmp_path):
    request = TaskRequest("isotherm", ("CO2", "CH4"), structures=("MFI_SI",), pressures=(1e5,))
    provider = ReplayProvider(setup_script(request, FFS, config, fault="mixture"))
    outcome = run_setup_team(request, config, provider, tmp_path)
    assert outcome.success
    assert [(g.agent, g.round, g.verdict.approved) for g in outcome.gates if g.agent == "input_expert"] == [
        ("input_expert", 0, False),
        ("input_expert", 1, True),
    ]
    assert sorted(p.name for p in outcome.folders) == ["MFI_SI_CH4_0", "MFI_SI_CO2_0"]
    assert outcome.lint_errors == 0


def test_setup_team_missing_cif(config, tmp_path):
    provider = ReplayProvider(setup_script(ISO, FFS, config, fault="no-cif"))
    outcome = run_setup_team(ISO, config, provider, tmp_path)
    rules = {f.rule for fs in outcome.findings.values() for f in fs}
    assert "R1" in rules
    assert (outcome.label.correctly_configured, outcome.label.executable) == (False, False)


def test_setup_team_rejected(config, tmp_path):
    provider = ReplayProvider(setup_script(ISO, FFS, config, fault="reject"))
    outcome = run_setup_team(ISO, config, provider, tmp_path)
    assert not outcome.success
    assert "coding_expert rejected" in outcome.feedback
    assert provider.remaining == 0


def test_delegation_out_of_order(config, tmp_path):
    script = [
        {"agent": "supervisor", "tool_calls": [{"id": "d", "name": "delegate", "arguments": {"agent": "coding_expert", "instruction": "go"}}]},
        {"agent": "supervisor", "expect": "delegate to structure_expert next", "content": "stopping"},
    ]
    outcome = run_setup_team(ISO, config, ReplayProvider(script), tmp_path)
    assert not outcome.success
    assert outcome.folders == []


def reference(config, paper_id):
    return ParameterSet.load(config.corpus_root / paper_id / "reference.json")


def test_research_team_garcia(config, tmp_path):
    outcome = run_research_team("transferable CO2 zeolite force field", config, ReplayProvider(research_script("garcia2009")), tmp_path)
    assert outcome.success
    assert outcome.bundle_dir == tmp_path / "extracted" / "garcia2009"
    report = score_parameters(bundle_parameter_set(outcome.bundle), reference(config, "garcia2009"))
    assert (report.missed, report.wrong, report.iou) == (0, 0, 1.0)


def test_research_team_swapped_sigmas(config, tmp_path):
    script = research_script("epm2_1995", swap_sigmas=True)
    outcome = run_research_team("EPM2", config, ReplayProvider(script), tmp_path)
    assert outcome.success
    report = score_parameters(bundle_parameter_set(outcome.bundle), reference(config, "epm2_1995"))
    assert (report.missed, report.wrong) == (0, 3)
    assert report.iou == pytest.approx(0.667, abs=1e-3)


def test_research_team_follows_citation(config, tmp_path):
    outcome = run_research_team("TraPPE-zeo", config, ReplayProvider(research_script("trappezeo_2013")), tmp_path)
    assert outcome.success
    assert outcome.search_rounds == 2
    assert sorted(p.identifier for p in outcome.papers) == ["epm2_1995", "trappezeo_2013"]
    report = score_parameters(bundle_parameter_set(outcome.bundle), reference(config, "trappezeo_2013"))
    assert report.iou == 1.0
    forcefield.load_bundle(outcome.bundle_dir)


def test_research_team_no_hit(config, tmp_path):
    outcome = run_research_team("graphene", config, ReplayProvider(research_script("garcia2009", no_hit=True)), tmp_path)
    assert not outcome.success
    assert outcome.bundle is None
    assert outcome.memory.reports[-1].status == "failed"


def test_combined_run(config, tmp_path):
    request = TaskRequest("isotherm", ("CO2",), structures=("MFI_SI",), pressures=(1e5,), forcefield="doi:10.5555/fixture.garcia.2009")
    provider = ReplayProvider(combined_script(request, "garcia2009", config))
    outcome = run_combined(request, config, provider, tmp_path)
    assert outcome.success, outcome.feedback
    assert provider.remaining == 0
    authors = [r.author for r in outcome.memory]
    assert authors.index("research_team") < authors.index("structure_expert")
    stamps = [r.timestamp for r in outcome.memory]
    assert stamps == sorted(stamps) and len(set(stamps)) == len(stamps)
    assert (tmp_path / "setup" / "MFI_SI_CO2_0" / "simulation.input").is_file()


def test_combined_research_failure_creates_no_folders(config, tmp_path):
    request = TaskRequest("isotherm", ("CO2",), structures=("MFI_SI",), pressures=(1e5,), forcefield="query:graphene")
    provider = ReplayProvider(combined_script(request, "garcia2009", config, research_fails=True))
    outcome = run_combined(request, config, provider, tmp_path)
    assert not outcome.success
    assert outcome.setup is None
    assert not (tmp_path / "setup").exists()


def test_combined_needs_literature_source(config, tmp_path):
    with pytest.raises(ConfigurationError):
        run_combined(ISO, config, ReplayProvider([]), tmp_path)
    assert literature_source("doi:10.1/x") == "10.1/x"
    assert literature_source("query: EPM2 ") == "EPM2"
    assert literature_source("auto") is None


class _ScholarHandler(BaseHTTPRequestHandler):
    seen: list = []

    def do_GET(self):
        url = urlparse(self.path)
        type(self).seen.append((url.path, parse_qs(url.query), self.headers.get("x-api-key")))
        if url.path == "/graph/v1/paper/search":
            doc = {"data": [{"paperId": "p1", "title": "A", "abstract": "x", "externalIds": {"DOI": "10.1/a"}},
                            {"paperId": "p2", "title": "B", "abstract": None, "externalIds": {}}]}
        elif url.path == "/graph/v1/paper/DOI:10.1/a":
            doc = {"paperId": "p1", "title": "A", "abstract": "abstract text"}
        else:
            self.send_response(404)
            self.end_headers()
            return
        data = json.dumps(doc).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


def test_semantic_scholar_client(tmp_path):
    _ScholarHandler.seen = []
    server = HTTPServer(("127.0.0.1", 0), _ScholarHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        client = SemanticScholarClient(f"http://127.0.0.1:{server.server_address[1]}", api_key="k", download_dir=tmp_path)
        hits = client.search("zeolite", limit=2)
        assert [(h.identifier, h.doi) for h in hits] == [("p1", "10.1/a"), ("p2", None)]
        paper = client.download("doi:10.1/a")
        assert read_headers(paper) == ["Abstract"]
        assert read_section(paper, "Abstract") == "abstract text"
        assert json.loads((tmp_path / "p1" / "meta").read_text())["doi"] == "10.1/a"
        with pytest.raises(LiteratureError, match="not found"):
            client.download("10.1/missing")
        path, query, key = _ScholarHandler.seen[0]
        assert (path, query["query"], query["limit"], key) == ("/graph/v1/paper/search", ["zeolite"], ["2"], "k")
    finally:
        server.shutdown()
        server.server_close()


def test_load_config_layers(tmp_path):
    path = tmp_path / "team.yaml"
    path.write_text("max_revisions: 2\nmodels:\n  evaluator: local-model\nstructures_root: cifs\n")
    cfg = load_config(path, env={"RASPAGENT_MAX_STEPS": "5", "RASPAGENT_MAX_REVISIONS": "3"})
    assert cfg.max_revisions == 3
    assert cfg.max_steps == 5
    assert cfg.model_for("evaluator") == "local-model"
    assert cfg.model_for("supervisor") == "gpt-5"
    assert cfg.structures_root == tmp_path / "cifs"
    assert load_config(env={}) == TeamConfig()
    path.write_text("bogus: 1\n")
    with pytest.raises(ConfigurationError):
        load_config(path, env={})
    with pytest.raises(ConfigurationError):
        load_config(env={"RASPAGENT_MAX_STEPS": "0"})
