"""Tools available to the agents, bound to a working session.

Paths given to tools are relative to the session workspace, except for the
read-only prefixes ``structures/``, ``library/``, ``examples/`` and
``dummy/`` which map onto the configured roots.
"""

from __future__ import annotations

import fnmatch
import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .. import chemio, forcefield, simlint
from ..agentcore import GlobalMemory, ToolCall, ToolRegistry, ToolResult, logical_clock, memory_render, param, tool
from ..errors import ToolError
from ..evalbench.params import ParameterSet, ParameterSlot
from ..forcefield import (
    ForceFieldBundle,
    LjParams,
    MoleculeAtom,
    MoleculeDefinition,
    PairOverride,
    PseudoAtom,
)
from ..siminput import (
    SIMULATION_INPUT,
    SimulationSpec,
    example_inputs_catalog,
    instantiate_template,
    load_template,
    materialize_plan,
    render_simulation_input,
)
from ..tasks import TaskRequest
from .config import TeamConfig
from .literature import FixtureCorpus, PaperRecord, SemanticScholarClient, read_section

READ_ONLY_PREFIXES = ("structures", "library", "examples", "dummy")

TABLE_TOOLS = (
    "list_all_example_simulation_inputs",
    "read_atoms_in_file",
    "count_atom_type_in_cif",
    "get_unit_cell_size",
    "get_all_force_field_descriptions",
    "get_atoms_in_ff_file",
    "semantic_scholar_search",
    "download_paper",
    "read_paper_headers",
    "read_paper_section",
)
FILE_TOOLS = ("list_files", "read_file", "write_file", "copy_file", "make_directory")


@dataclass
class ExtractionFindings:
    source: str | None = None
    summary: list[str] = field(default_factory=list)
    parameters: ParameterSet = field(default_factory=ParameterSet)
    geometry_notes: list[str] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)
    consulted: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "summary": self.summary,
            "parameters": self.parameters.to_list(),
            "geometry_notes": self.geometry_notes,
            "unresolved": self.unresolved,
            "consulted": self.consulted,
        }


class Session:
    """Mutable state shared by the tools of one team run."""

    def __init__(self, config: TeamConfig, workspace: str | Path, *, task: TaskRequest | None = None,
                 memory: GlobalMemory | None = None, provider=None, literature=None):
        self.config = config
        self.workspace = Path(workspace)
        self.workspace.mkdir(parents=True, exist_ok=True)
        self.task = task
        self.memory = memory if memory is not None else GlobalMemory(logical_clock())
        self.provider = provider
        if literature is None:
            if config.literature_mode == "live":
                literature = SemanticScholarClient(config.semantic_scholar_url, config.semantic_scholar_key,
                                                   download_dir=self.workspace / "papers")
            else:
                literature = FixtureCorpus(config.corpus_root)
        self.literature = literature
        self.papers: dict[str, PaperRecord] = {}
        self.findings = ExtractionFindings()
        self.bundle_dir: Path | None = None
        # hooks installed by the team runners
        self.delegate: Callable[[str, str], ToolResult] | None = None
        self.delegate_team: Callable[[str, str], ToolResult] | None = None

    # -- paths ------------------------------------------------------------
    def resolve(self, path: str, *, write: bool = False) -> Path:
        rel = Path(path)
        if rel.is_absolute() or ".." in rel.parts:
            raise ToolError(f"path {path!r} must be relative and stay inside the workspace")
        head = rel.parts[0] if rel.parts else ""
        if head in READ_ONLY_PREFIXES:
            if write:
                raise ToolError(f"{head}/ is read-only")
            rest = Path(*rel.parts[1:]) if len(rel.parts) > 1 else Path(".")
            if head == "library":
                for root in self.config.library_roots:
                    if (root / rest).exists():
                        return root / rest
                return self.config.library_roots[0] / rest
            root = {
                "structures": self.config.structures_root,
                "examples": self.config.examples_root,
                "dummy": self.config.dummy_ff_root,
            }[head]
            return root / rest
        return self.workspace / rel

    def structure_names(self) -> list[str]:
        return sorted(p.stem for p in self.config.structures_root.glob("*.cif"))

    def paper(self, paper_id: str) -> PaperRecord:
        if paper_id not in self.papers:
            raise ToolError(f"paper {paper_id!r} has not been downloaded; downloaded: {sorted(self.papers)}")
        return self.papers[paper_id]


def _atoms_in_file(path: Path) -> list[str]:
    if path.suffix == ".cif":
        return sorted(chemio.atom_type_census(chemio.read_cif(path)))
    if path.name in forcefield.FORCE_FIELD_FILES:
        return forcefield.atoms_in_ff_file(path)
    if path.suffix == ".def":
        mol = forcefield.parse_molecule(path.read_text(), path.stem)
        return sorted(set(mol.atom_types))
    raise ToolError(f"{path.name}: expected a .cif or molecule .def file")


def _bundle_from_doc(doc: dict) -> ForceFieldBundle:
    atoms = tuple(PseudoAtom(**a) for a in doc.get("pseudo_atoms", ()))
    self_params = {p["type"]: LjParams(float(p["epsilon"]), float(p["sigma"])) for p in doc.get("lj_parameters", ())}
    overrides = tuple(
        PairOverride(o["type_a"], o["type_b"], LjParams(float(o["epsilon"]), float(o["sigma"])))
        for o in doc.get("pair_overrides", ())
    )
    molecules = {}
    for m in doc.get("molecules", ()):
        molecules[m["name"]] = MoleculeDefinition(
            name=m["name"],
            critical_temperature=float(m["critical_temperature"]),
            critical_pressure=float(m["critical_pressure"]),
            acentric_factor=float(m["acentric_factor"]),
            atoms=tuple(MoleculeAtom(a["type"], tuple(float(x) for x in a.get("position", (0, 0, 0)))) for a in m["atoms"]),
            rigid=bool(m.get("rigid", True)),
            bonds=tuple(tuple(b) for b in m.get("bonds", ())),
        )
    return ForceFieldBundle(
        name=doc.get("name", "extracted"),
        description=doc.get("description", ""),
        pseudo_atoms=atoms,
        self_params=self_params,
        overrides=overrides,
        molecules=molecules,
        mixing_rule_name=doc.get("mixing_rule", forcefield.LORENTZ_BERTHELOT),
        truncation_rule=doc.get("truncation", "shifted"),
        tail_corrections=bool(doc.get("tail_corrections", False)),
    )


def lint_text(folder: Path, task: TaskRequest | None, allow_placeholders: bool = False, cutoff_warning: float = 20.0) -> str:
    findings = simlint.validate_folder(folder, task, cutoff_warning=cutoff_warning)
    if allow_placeholders:
        findings = template_findings(findings)
    return simlint.render_report(findings) or f"{folder.name}: no findings\n"


def template_findings(findings):
    """Drop findings that only reflect a template's unbound placeholders."""
    return [
        f for f in findings
        if not (f.rule == "R0" and "placeholder" in f.message)
        and not (f.rule == "R8" and (f.file or "").endswith(".cif"))
    ]


def tool_registry(config: TeamConfig, session: Session | None = None, workspace: str | Path | None = None) -> ToolRegistry:
    """Every tool, bound to ``session`` (a scratch session is created if omitted)."""
    if session is None:
        session = Session(config, workspace or Path.cwd())
    s = session
    tools = []

    def add(t):
        tools.append(t)
        return t

    # -- generic file tools ------------------------------------------------
    @add
    @tool("list_files", "List files under a directory (recursively, relative paths).",
          param("path", description="directory, default workspace root", required=False))
    def list_files(path: str = "."):
        root = s.resolve(path)
        if not root.is_dir():
            raise ToolError(f"{path} is not a directory")
        entries = sorted(str(p.relative_to(root)) for p in root.rglob("*") if p.is_file())
        if len(entries) > 200:
            return "\n".join(entries[:200]) + f"\n... ({len(entries) - 200} more)"
        return "\n".join(entries) or "(empty)"

    @add
    @tool("read_file", "Read a text file.", param("path"))
    def read_file(path: str):
        return s.resolve(path).read_text()

    @add
    @tool("write_file", "Write a text file in the workspace (parents created).", param("path"), param("content"))
    def write_file(path: str, content: str):
        target = s.resolve(path, write=True)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content)
        return ToolResult(f"wrote {path} ({len(content)} characters)", [("file", path)])

    @add
    @tool("copy_file", "Copy a file into the workspace.", param("source"), param("destination"))
    def copy_file(source: str, destination: str):
        src = s.resolve(source)
        dst = s.resolve(destination, write=True)
        if dst.is_dir() or destination.endswith("/"):
            dst = dst / src.name
        dst.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(src, dst)
        return ToolResult(f"copied {source} -> {dst.relative_to(s.workspace)}", [("file", str(dst.relative_to(s.workspace)))])

    @add
    @tool("make_directory", "Create a directory in the workspace.", param("path"))
    def make_directory(path: str):
        s.resolve(path, write=True).mkdir(parents=True, exist_ok=True)
        return f"created {path}"

    # -- structure and force-field queries -----------------------------------
    @add
    @tool("list_all_example_simulation_inputs", "Names and descriptions of the example RASPA input files.")
    def list_all_example_simulation_inputs():
        return "\n".join(f"{e.name}: {e.description}" for e in example_inputs_catalog(s.config.examples_root)) or "(no examples)"

    @add
    @tool("read_example_input", "Full text of one example input file.", param("name"))
    def read_example_input(name: str):
        for e in example_inputs_catalog(s.config.examples_root):
            if e.name == name:
                return e.text
        raise ToolError(f"no example named {name!r}")

    @add
    @tool("read_atoms_in_file", "Set of atom types in a framework .cif or molecule .def file.", param("path"))
    def read_atoms_in_file(path: str):
        return _atoms_in_file(s.resolve(path))

    @add
    @tool("count_atom_type_in_cif", "How often an atom type occurs in a CIF file.", param("path"), param("atom_type"))
    def count_atom_type_in_cif(path: str, atom_type: str):
        return chemio.atom_type_census(chemio.read_cif(s.resolve(path)))[atom_type]

    @add
    @tool("get_unit_cell_size", "Lattice parameters (a, b, c in A; alpha, beta, gamma in degrees) of a CIF file.", param("path"))
    def get_unit_cell_size(path: str):
        lat = chemio.lattice_parameters(chemio.read_cif(s.resolve(path)))
        return dict(zip(("a", "b", "c", "alpha", "beta", "gamma"), lat.as_tuple()))

    @add
    @tool("list_structures", "Names of the available framework structures matching a glob pattern.",
          param("pattern", required=False))
    def list_structures(pattern: str = "*"):
        names = [n for n in s.structure_names() if fnmatch.fnmatch(n, pattern)]
        if len(names) > 50:
            return f"{len(names)} structures: " + ", ".join(names[:50]) + ", ..."
        return f"{len(names)} structures: " + ", ".join(names)

    @add
    @tool("compute_unit_cells", "Minimum unit-cell replication of a CIF for a cutoff.", param("path"), param("cutoff", "number"))
    def compute_unit_cells(path: str, cutoff: float):
        return list(chemio.replication_for_cutoff(chemio.read_cif(s.resolve(path)).lattice, float(cutoff)))

    @add
    @tool("get_all_force_field_descriptions", "Available force fields with descriptions and atom types.")
    def get_all_force_field_descriptions():
        lines = []
        for root in s.config.library_roots:
            if not root.is_dir():
                continue
            for e in forcefield.library_catalog(root):
                lines.append(f"{e.name}: {e.description} [atoms: {', '.join(e.atom_types)}]")
        return "\n".join(lines) or "(library empty)"

    @add
    @tool("get_atoms_in_ff_file", "Atom types with parameters in a force_field.def, force_field_mixing_rules.def or pseudo_atoms.def file.", param("path"))
    def get_atoms_in_ff_file(path: str):
        return forcefield.atoms_in_ff_file(s.resolve(path))

    @add
    @tool("combine_force_fields",
          "Combine library force fields (earlier ones win on conflicts) and write the RASPA files to a workspace folder.",
          param("force_fields", "array", "library names, primary first", items="string"),
          param("destination"),
          param("molecules", "array", "molecule definitions to write; default all", required=False, items="string"))
    def combine_force_fields(force_fields: list, destination: str, molecules: list | None = None):
        if not force_fields:
            raise ToolError("name at least one force field")
        bundles = [forcefield.load_bundle(s.resolve(f"library/{name}"), name=name) for name in force_fields]
        combined = forcefield.combine_force_fields(bundles[0], bundles[1:])
        if molecules is not None:
            unknown = [m for m in molecules if m not in combined.molecules]
            if unknown:
                raise ToolError(f"molecules not defined by these force fields: {unknown}")
            combined = replace(combined, molecules={m: combined.molecules[m] for m in molecules})
        dest = s.resolve(destination, write=True)
        written = forcefield.render_bundle(combined, dest)
        rel = [str(p.relative_to(s.workspace)) for p in written]
        text = "wrote " + ", ".join(rel)
        if combined.collisions:
            text += "\ncollisions (first definition kept): " + "; ".join(combined.collisions)
        return ToolResult(text, [("force-field-file", r) for r in rel])

    # -- simulation input --------------------------------------------------
    @add
    @tool("write_simulation_input",
          "Render a simulation.input from a structured description. Placeholder values such as {FRAMEWORK}, {UNITCELLS}, {PRESSURE}, {TEMPERATURE} are allowed.",
          param("path", description="folder or file path"), param("spec", "object"))
    def write_simulation_input(path: str, spec: dict):
        target = s.resolve(path, write=True)
        if target.suffix != ".input":
            target = target / SIMULATION_INPUT
        target.parent.mkdir(parents=True, exist_ok=True)
        text = render_simulation_input(SimulationSpec.from_dict(spec))
        target.write_text(text)
        rel = str(target.relative_to(s.workspace))
        return ToolResult(f"wrote {rel}:\n{text}", [("simulation-input", rel)])

    @add
    @tool("replicate_template",
          "Create one simulation folder per structure from a template folder, binding {FRAMEWORK}, {UNITCELLS}, {PRESSURE} and {TEMPERATURE} from the task.",
          param("template"),
          param("structures", "array", "structure names; default: the task's selection", required=False, items="string"))
    def replicate_template(template: str, structures: list | None = None):
        tmpl = load_template(s.resolve(template), s.config.structures_root)
        names = structures or (s.task.select_structures(s.structure_names()) if s.task else s.structure_names())
        needed = tmpl.placeholders()
        created = []
        for name in names:
            bindings = {"{FRAMEWORK}": name}
            if "{UNITCELLS}" in needed:
                lattice = chemio.read_cif(s.config.structures_root / f"{name}.cif").lattice
                bindings["{UNITCELLS}"] = chemio.replication_for_cutoff(lattice, tmpl.spec.cutoff)
            if s.task is not None:
                bindings["{TEMPERATURE}"] = s.task.temperature
                if s.task.pressures:
                    bindings["{PRESSURE}"] = s.task.pressures
            bindings = {k: v for k, v in bindings.items() if k in needed}
            plan = instantiate_template(tmpl, bindings)
            materialize_plan(plan, s.workspace)
            created.append(plan.folder)
        shown = ", ".join(created[:20]) + (f", ... ({len(created)} total)" if len(created) > 20 else "")
        return ToolResult(f"created {len(created)} folder(s): {shown}", [("simulation-folders", f"{len(created)} from {template}")])

    @add
    @tool("validate_folder", "Static check of a simulation folder or template; returns rule findings.", param("path"))
    def validate_folder(path: str):
        folder = s.resolve(path)
        return lint_text(folder, s.task, allow_placeholders=folder.name.startswith("_"), cutoff_warning=s.config.cutoff_warning)

    # -- literature --------------------------------------------------------
    @add
    @tool("semantic_scholar_search", "Search for papers; returns identifiers, DOIs, titles and abstracts.",
          param("query"), param("limit", "integer", required=False))
    def semantic_scholar_search(query: str, limit: int = 5):
        hits = s.literature.search(query, int(limit))
        if not hits:
            return "no results"
        return json.dumps([{"id": h.identifier, "doi": h.doi, "title": h.title, "abstract": h.abstract} for h in hits], indent=1)

    @add
    @tool("download_paper", "Download a paper by DOI and parse it into sections.", param("doi"))
    def download_paper(doi: str):
        record = s.literature.download(doi)
        s.papers[record.identifier] = record
        if s.findings.source is None:
            s.findings.source = record.identifier
        if record.identifier not in s.findings.consulted:
            s.findings.consulted.append(record.identifier)
        return ToolResult(
            f"downloaded {record.identifier}: {record.title} ({len(record.sections)} sections)",
            [("paper", record.identifier)],
        )

    @add
    @tool("read_paper_headers", "Section headers of a downloaded paper.", param("paper_id"))
    def read_paper_headers(paper_id: str):
        return s.paper(paper_id).headers()

    @add
    @tool("read_paper_section", "Content of one section of a downloaded paper.", param("paper_id"), param("header"))
    def read_paper_section(paper_id: str, header: str):
        return read_section(s.paper(paper_id), header)

    # -- extraction findings ----------------------------------------------
    @add
    @tool("record_parameter",
          "Record one extracted parameter. key: atom type, 'A|B' pair, or 'bond:A-B'; name: epsilon, sigma, charge, bond-length, angle.",
          param("key"), param("name"), param("value", "number"), param("units"), param("paper_id", required=False))
    def record_parameter(key: str, name: str, value: float, units: str, paper_id: str | None = None):
        slot = ParameterSlot(key, name, float(value), units)
        s.findings.parameters.put(slot)
        if paper_id and paper_id not in s.findings.consulted:
            s.findings.consulted.append(paper_id)
        return f"recorded {slot.key} {slot.name} = {slot.value} {slot.units}"

    @add
    @tool("record_note", "Record a finding in prose (summary or molecule geometry).",
          param("text"), param("kind", description="'summary' or 'geometry'", required=False))
    def record_note(text: str, kind: str = "summary"):
        (s.findings.geometry_notes if kind == "geometry" else s.findings.summary).append(text)
        return "noted"

    @add
    @tool("request_reference", "Ask the search agent to find a cited work needed to complete the force field.", param("citation"))
    def request_reference(citation: str):
        if citation not in s.findings.unresolved:
            s.findings.unresolved.append(citation)
        return f"requested: {citation}"

    @add
    @tool("read_findings", "The extraction findings recorded so far.")
    def read_findings():
        return json.dumps(s.findings.to_dict(), indent=1)

    @add
    @tool("write_force_field_bundle",
          "Write RASPA force-field files from structured parameters into extracted/<name>/.",
          param("bundle", "object", "name, description, pseudo_atoms, lj_parameters, pair_overrides, molecules, mixing_rule, truncation, tail_corrections"))
    def write_force_field_bundle(bundle: dict):
        b = _bundle_from_doc(bundle)
        if s.findings.source and b.name != s.findings.source:
            # bundles are registered under the id of the paper they came from
            b = forcefield.with_name(b, s.findings.source)
        dest = s.resolve(f"extracted/{b.name}", write=True)
        if dest.exists():
            shutil.rmtree(dest)
        written = forcefield.render_bundle(b, dest)
        forcefield.write_metadata(b, dest)
        s.bundle_dir = dest
        rel = [str(p.relative_to(s.workspace)) for p in written]
        return ToolResult("wrote " + ", ".join(rel), [("force-field-file", r) for r in rel])

    # -- orchestration -----------------------------------------------------
    @add
    @tool("delegate", "Hand a task to a team member and wait for its evaluated result.", param("agent"), param("instruction"))
    def delegate(agent: str, instruction: str):
        if s.delegate is None:
            raise ToolError("delegation is not available in this session")
        return s.delegate(agent, instruction)

    @add
    @tool("delegate_team", "Hand a task to a whole team ('research' or 'setup').", param("team"), param("instruction"))
    def delegate_team(team: str, instruction: str):
        if s.delegate_team is None:
            raise ToolError("team delegation is not available in this session")
        return s.delegate_team(team, instruction)

    @add
    @tool("read_memory", "Digest of the shared memory reports.")
    def read_memory():
        return memory_render(s.memory)

    return ToolRegistry(tools)


def invoke_tool(registry: ToolRegistry, name: str, arguments: dict) -> ToolResult:
    return registry.invoke(ToolCall(id="direct", name=name, arguments=arguments))

