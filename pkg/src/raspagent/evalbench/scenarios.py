"""Scripted sessions and seeded-fault folders.

The builders return replay scripts (lists of assistant-message documents)
that drive the teams offline. They stand in for a model: each entry is what
an agent "says" at that point of the run, in execution order.
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass, replace
from pathlib import Path

from .. import chemio, forcefield, siminput
from ..agentcore.providers import dump_script, script_entries
from ..crews.config import TeamConfig
from ..siminput import ISOTHERM_MOVES, WIDOM_MOVES, SimulationPlan, materialize_plan, plan_batch, render_simulation_input
from ..simlint import FAILURE_MODES, OutcomeLabel
from ..tasks import HEAT_OF_ADSORPTION, TaskRequest


def msg(agent: str, content: str = "", calls=(), expect: str | None = None) -> dict:
    doc: dict = {"agent": agent}
    if content:
        doc["content"] = content
    if calls:
        doc["tool_calls"] = [{"name": name, "arguments": args} for name, args in calls]
    if expect:
        doc["expect"] = expect
    return doc


def save_script(docs: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_script(script_entries(docs)))
    return path


# --------------------------------------------------------------------------
# setup team


SETUP_FAULTS = (None, "no-cif", "mixture", "mixture-unnoticed", "no-moves", "reject", "cutoff-24", "extra-files")


def template_name(adsorbates) -> str:
    return "_template_" + "-".join(adsorbates)


def template_spec(request: TaskRequest, molecules, *, cutoff: float = 12.0, moves: dict | None = None,
                  charge_method: str = "Ewald") -> dict:
    if moves is None:
        moves = WIDOM_MOVES if request.kind == HEAT_OF_ADSORPTION else ISOTHERM_MOVES
    spec = {
        "cycles": request.cycles,
        "init_cycles": request.init_cycles,
        "print_every": request.print_every,
        "framework_name": "{FRAMEWORK}",
        "unit_cells": "{UNITCELLS}",
        "temperature": "{TEMPERATURE}",
        "cutoff": cutoff,
        "charge_method": charge_method,
        "components": [{"molecule_name": m, "moves": dict(moves)} for m in molecules],
    }
    if request.is_isotherm:
        spec["pressure"] = "{PRESSURE}"
    return spec


def setup_script(request: TaskRequest, forcefields: list[str], config: TeamConfig | None = None, *,
                 fault: str | None = None, representative: str | None = None) -> list[dict]:
    """A full setup-team session: supervisor, four gated experts, final answer.

    ``fault`` seeds one of the mistakes agents make (see ``SETUP_FAULTS``).
    """
    if fault not in SETUP_FAULTS:
        raise ValueError(f"unknown setup fault {fault!r}")
    config = config or TeamConfig()
    names = sorted(p.stem for p in config.structures_root.glob("*.cif"))
    selected = request.select_structures(names)
    representative = representative or selected[0]
    groups = [list(request.adsorbates)] if request.is_mixture else [[a] for a in request.adsorbates]
    templates = [template_name(g) for g in groups]
    cutoff = 24.0 if fault == "cutoff-24" else request.cutoff
    s: list[dict] = []

    def gate(approve: bool = True, expect: str | None = None, feedback: str = ""):
        s.append(msg("evaluator", "APPROVE" if approve else f"REVISE: {feedback}", expect=expect))

    # structure expert
    s.append(msg("supervisor", "Plan: structures, force field, inputs, then replicate.",
                 [("delegate", {"agent": "structure_expert", "instruction": f"Copy {representative} into {', '.join(templates)} as the placeholder structure."})]))
    s.append(msg("structure_expert", calls=[("list_structures", {"pattern": request.structure_glob or "*"})]))
    s.append(msg("structure_expert", calls=[("copy_file", {"source": f"structures/{representative}.cif", "destination": f"{t}/{representative}.cif"}) for t in templates]))
    s.append(msg("structure_expert", f"Copied {representative}.cif into {len(templates)} template folder(s); the batch covers {len(selected)} structure(s)."))
    gate()

    # force-field expert
    s.append(msg("supervisor", calls=[("delegate", {"agent": "forcefield_expert", "instruction": f"Provide force-field files for {', '.join(request.adsorbates)} in each template folder."})]))
    s.append(msg("forcefield_expert", calls=[("get_all_force_field_descriptions", {})]))
    every = fault in ("extra-files", "mixture-unnoticed")
    molecules_for = (lambda g: list(request.adsorbates)) if every else (lambda g: g)
    s.append(msg("forcefield_expert", calls=[
        ("combine_force_fields", {"force_fields": list(forcefields), "destination": t, "molecules": molecules_for(g)})
        for t, g in zip(templates, groups)
    ]))
    s.append(msg("forcefield_expert", f"Combined {' + '.join(forcefields)} into every template folder."))
    gate()

    # input expert
    s.append(msg("supervisor", calls=[("delegate", {"agent": "input_expert", "instruction": f"Write a templated simulation.input for a {request.kind} task in each template folder."})]))
    s.append(msg("input_expert", calls=[("list_all_example_simulation_inputs", {})]))
    if fault in ("mixture", "mixture-unnoticed"):
        s.append(msg("input_expert", calls=[("write_simulation_input", {"path": templates[0], "spec": template_spec(request, request.adsorbates, cutoff=cutoff)})]))
        s.append(msg("input_expert", "Wrote one mixture input covering all adsorbates."))
    if fault == "mixture":
        gate(False, expect="RULE R9", feedback="the task asks for one simulation per adsorbate, not a mixture")
    if fault == "mixture-unnoticed":
        gate()
        templates = templates[:1]
    else:
        moves = {"translation": 0.0, "swap": 0.0, "widom": 0.0} if fault == "no-moves" else None
        s.append(msg("input_expert", calls=[
            ("write_simulation_input", {"path": t, "spec": template_spec(request, g, cutoff=cutoff, moves=moves)})
            for t, g in zip(templates, groups)
        ]))
        s.append(msg("input_expert", f"Wrote {len(templates)} templated simulation.input file(s)."))
        gate()

    # coding expert
    s.append(msg("supervisor", calls=[("delegate", {"agent": "coding_expert", "instruction": "Create one simulation folder per structure from each template."})]))
    if fault == "no-cif":
        s.extend(_manual_replication(request, groups, templates, selected, cutoff, config))
    else:
        s.append(msg("coding_expert", calls=[("replicate_template", {"template": t}) for t in templates]))
    s.append(msg("coding_expert", f"Created {len(selected) * len(templates)} simulation folder(s)."))
    if fault == "reject":
        for _ in range(config.max_revisions):
            gate(False, feedback="folders do not match the request")
            s.append(msg("coding_expert", calls=[("replicate_template", {"template": t}) for t in templates]))
            s.append(msg("coding_expert", "Recreated the folders."))
        gate(False, feedback="folders still do not match the request")
        s.append(msg("supervisor", "The coding stage was rejected; the setup failed."))
        return s
    gate()
    s.append(msg("supervisor", f"Done: {len(selected) * len(templates)} folder(s) prepared for the {request.kind} task."))
    return s


def _manual_replication(request, groups, templates, structures, cutoff, config) -> list[dict]:
    """Coding expert writing folders by hand and forgetting the framework CIF."""
    calls = []
    for t, g in zip(templates, groups):
        for name in structures:
            lattice = chemio.read_cif(config.structures_root / f"{name}.cif").lattice
            spec = template_spec(request, g, cutoff=cutoff)
            spec.update(framework_name=name, unit_cells=list(chemio.replication_for_cutoff(lattice, cutoff)),
                        temperature=request.temperature)
            if request.is_isotherm:
                spec["pressure"] = list(request.pressures)
            folder = f"{name}_{'-'.join(g)}_0"
            text = render_simulation_input(siminput.SimulationSpec.from_dict(spec))
            calls.append(("write_file", {"path": f"{folder}/{siminput.SIMULATION_INPUT}", "content": text}))
            for f in (*forcefield.FORCE_FIELD_FILES, *(f"{m}.def" for m in g)):
                calls.append(("copy_file", {"source": f"{t}/{f}", "destination": f"{folder}/{f}"}))
    return [msg("coding_expert", calls=calls)]


# --------------------------------------------------------------------------
# research team


@dataclass(frozen=True)
class PaperTranscript:
    """What a careful reader takes from one fixture paper."""

    paper_id: str
    doi: str
    query: str
    section: str
    atoms: tuple  # (name, element, mass, charge)
    lj: tuple  # (type, epsilon, sigma)
    pairs: tuple = ()  # (type_a, type_b, epsilon, sigma)
    bonds: tuple = ()  # (type_a, type_b, length)
    cites: str | None = None

    def parameter_calls(self, swap_sigmas: bool = False) -> list[tuple[str, dict]]:
        calls = []
        for name, _, _, q in self.atoms:
            calls.append(("record_parameter", {"key": name, "name": "charge", "value": q, "units": "e", "paper_id": self.paper_id}))
        rows = [(t, e, s) for t, e, s in self.lj] + [(f"{a}|{b}", e, s) for a, b, e, s in self.pairs]
        sigmas = [r[2] for r in rows]
        if swap_sigmas:
            # a transposed table read the wrong way round: every sigma shifted by one column
            sigmas = sigmas[1:] + sigmas[:1]
        for (key, eps, _), sig in zip(rows, sigmas):
            calls.append(("record_parameter", {"key": key, "name": "epsilon", "value": eps, "units": "K", "paper_id": self.paper_id}))
            calls.append(("record_parameter", {"key": key, "name": "sigma", "value": sig, "units": "A", "paper_id": self.paper_id}))
        for a, b, length in self.bonds:
            calls.append(("record_parameter", {"key": f"bond:{a}-{b}", "name": "bond-length", "value": length, "units": "A", "paper_id": self.paper_id}))
        return calls


_SI = ("Si", "Si", 28.0855)
_O = ("O", "O", 15.9994)

TRANSCRIPTS = {
    "garcia2009": PaperTranscript(
        "garcia2009", "10.5555/fixture.garcia.2009", "transferable CO2 zeolite force field", "Force field parameters",
        atoms=((*_SI, 0.78598), (*_O, -0.39299), ("C_co2", "C", 12.0107, 0.6512), ("O_co2", "O", 15.9994, -0.3256)),
        lj=(("C_co2", 29.933, 2.745), ("O_co2", 85.671, 3.017)),
        pairs=(("O", "O_co2", 78.98, 3.017), ("O", "C_co2", 37.595, 3.511)),
        bonds=(("C_co2", "O_co2", 1.149),),
    ),
    "epm2_1995": PaperTranscript(
        "epm2_1995", "10.5555/fixture.epm2.1995", "carbon dioxide coexistence curve intermolecular potential", "Model",
        atoms=(("C_co2", "C", 12.0107, 0.6512), ("O_co2", "O", 15.9994, -0.3256)),
        lj=(("C_co2", 28.129, 2.757), ("O_co2", 80.507, 3.033)),
        pairs=(("C_co2", "O_co2", 47.588, 2.892),),
        bonds=(("C_co2", "O_co2", 1.149),),
    ),
    "trappezeo_2013": PaperTranscript(
        "trappezeo_2013", "10.5555/fixture.trappezeo.2013", "TraPPE-zeo all-silica zeolites force field", "Force field",
        atoms=((*_SI, 1.5), (*_O, -0.75)),
        lj=(("Si", 22.0, 2.3), ("O", 53.0, 3.3)),
        cites="epm2_1995",
    ),
}

CO2_CRITICAL = (304.1282, 7377300.0, 0.22394)


def writer_document(papers: list[PaperTranscript], name: str, swap_sigmas: bool = False) -> dict:
    """The bundle description the force-field writer sends for ``papers`` (primary first)."""
    atoms, lj, pairs, bond = {}, {}, [], None
    for k, p in enumerate(papers):
        rows = [(t, e, s) for t, e, s in p.lj] + [((a, b), e, s) for a, b, e, s in p.pairs]
        sigmas = [r[2] for r in rows]
        if swap_sigmas and k == 0:
            sigmas = sigmas[1:] + sigmas[:1]
        for n, el, mass, q in p.atoms:
            atoms.setdefault(n, {"name": n, "element": el, "mass": mass, "charge": q})
        for (key, eps, _), sig in zip(rows, sigmas):
            if isinstance(key, tuple):
                pairs.append({"type_a": key[0], "type_b": key[1], "epsilon": eps, "sigma": sig})
            else:
                lj.setdefault(key, {"type": key, "epsilon": eps, "sigma": sig})
        for _, _, length in p.bonds:
            bond = bond or length
    doc = {
        "name": name,
        "description": f"Force field extracted from {', '.join(p.paper_id for p in papers)}",
        "pseudo_atoms": list(atoms.values()),
        "lj_parameters": list(lj.values()),
        "pair_overrides": pairs,
        "molecules": [],
    }
    if bond and "C_co2" in atoms:
        tc, pc, w = CO2_CRITICAL
        doc["molecules"].append({
            "name": "CO2", "critical_temperature": tc, "critical_pressure": pc, "acentric_factor": w,
            "atoms": [{"type": "O_co2", "position": [0.0, 0.0, bond]}, {"type": "C_co2", "position": [0.0, 0.0, 0.0]},
                      {"type": "O_co2", "position": [0.0, 0.0, -bond]}],
            "bonds": [[0, 1], [1, 2]],
        })
    return doc


def research_script(paper_id: str, *, swap_sigmas: bool = False, follow_citation: bool = True,
                    no_hit: bool = False, empty: bool = False) -> list[dict]:
    """A research-team session on one fixture paper.

    ``swap_sigmas`` misreads the parameter table; ``no_hit`` searches for
    something the corpus does not have; ``empty`` extracts nothing.
    """
    p = TRANSCRIPTS[paper_id]
    s: list[dict] = []
    if no_hit:
        s.append(msg("paper_search", calls=[("semantic_scholar_search", {"query": "graphene membrane desalination", "limit": 5})]))
        s.append(msg("paper_search", "No matching paper was found.", expect="no results"))
        return s
    s.append(msg("paper_search", calls=[("semantic_scholar_search", {"query": p.query, "limit": 3})]))
    s.append(msg("paper_search", calls=[("download_paper", {"doi": p.doi})], expect=p.doi))
    s.append(msg("paper_search", f"Downloaded {p.paper_id}."))
    s.append(msg("paper_extraction", calls=[("read_paper_headers", {"paper_id": p.paper_id})]))
    s.append(msg("paper_extraction", calls=[("read_paper_section", {"paper_id": p.paper_id, "header": p.section})], expect=p.section))
    if empty:
        s.append(msg("paper_extraction", "The paper gives no usable parameters."))
        return s
    calls = p.parameter_calls(swap_sigmas)
    calls.append(("record_note", {"text": "CO2 is rigid and linear" if p.bonds else "rigid framework", "kind": "geometry"}))
    cited = TRANSCRIPTS.get(p.cites) if p.cites and follow_citation else None
    if cited:
        calls.append(("request_reference", {"citation": f"EPM2 carbon dioxide model ({cited.query})"}))
    s.append(msg("paper_extraction", calls=calls))
    s.append(msg("paper_extraction", f"Recorded {len(p.parameter_calls())} parameters from {p.paper_id}."))
    papers = [p]
    if cited:
        s.append(msg("paper_search", calls=[("semantic_scholar_search", {"query": cited.query, "limit": 3})]))
        s.append(msg("paper_search", calls=[("download_paper", {"doi": cited.doi})]))
        s.append(msg("paper_search", f"Downloaded {cited.paper_id}."))
        s.append(msg("paper_extraction", calls=[("read_paper_section", {"paper_id": cited.paper_id, "header": cited.section})]))
        s.append(msg("paper_extraction", calls=cited.parameter_calls()))
        s.append(msg("paper_extraction", f"Recorded the cited parameters from {cited.paper_id}."))
        papers.append(cited)
    s.append(msg("forcefield_writer", calls=[("read_findings", {}), ("list_files", {"path": "dummy"})]))
    s.append(msg("forcefield_writer", calls=[("write_force_field_bundle", {"bundle": writer_document(papers, p.paper_id, swap_sigmas)})]))
    s.append(msg("forcefield_writer", f"Wrote extracted/{p.paper_id}."))
    return s


# --------------------------------------------------------------------------
# combined run


def combined_script(request: TaskRequest, paper_id: str, config: TeamConfig | None = None, *,
                    research_fails: bool = False) -> list[dict]:
    s = [msg("top_supervisor", "First the research team extracts the force field.",
             [("delegate_team", {"team": "research", "instruction": f"Extract the force field of {paper_id}."})])]
    s += research_script(paper_id, no_hit=research_fails)
    if research_fails:
        s.append(msg("top_supervisor", calls=[("delegate_team", {"team": "setup", "instruction": "Set up the simulations."})],
                     expect="research team failed"))
        s.append(msg("top_supervisor", "The research phase failed, so no simulations were set up.", expect="must produce"))
        return s
    s.append(msg("top_supervisor", calls=[("delegate_team", {"team": "setup", "instruction": f"Set up the {request.kind} with extracted/{paper_id}."})],
                 expect=f"extracted/{paper_id}"))
    s += setup_script(request, [f"extracted/{paper_id}"], config)
    s.append(msg("top_supervisor", "Extracted the force field and prepared the simulations."))
    return s


# --------------------------------------------------------------------------
# seeded faults for the failure catalogue


@dataclass(frozen=True)
class SeededFault:
    mode: str
    folder: Path
    task: TaskRequest
    rules: tuple[str, ...]
    expected: OutcomeLabel


# consequence reported for each failure mode: (correctly configured, executable)
FAULT_CONSEQUENCES = {
    "every adsorbate definition copied into each folder": (True, True),
    "adsorbate defined without any moves": (False, True),
    "framework CIF files not copied": (False, False),
    "redundant force-field files left in the folder": (True, True),
    "minimum number of unit cells enforced": (True, True),
    "mixture isotherm instead of separate runs": (False, True),
    "24 A cutoff instead of 12 A": (True, True),
    "Widom insertion misconfigured for heat of adsorption": (False, True),
}


def _clean_plan(task: TaskRequest, bundle, structure, adsorbates, cutoff=12.0) -> SimulationPlan:
    return plan_batch(task, [structure], adsorbates=adsorbates, bundle=bundle, cutoff=cutoff)[0]


def seed_fault(mode: str, root: str | Path, config: TeamConfig | None = None) -> SeededFault:
    """Write a folder exhibiting one failure mode under ``root``."""
    if mode not in FAILURE_MODES:
        raise ValueError(f"unknown failure mode {mode!r}")
    config = config or TeamConfig()
    lib = config.library_roots[-1]
    bundle = forcefield.combine_force_fields(
        forcefield.load_bundle(lib / "zeolite_framework"), [forcefield.load_bundle(lib / "trappe_adsorbates")]
    )
    structure = chemio.read_cif(config.structures_root / "MFI_SI.cif")
    structures = {structure.name: structure}
    iso = TaskRequest("isotherm", ("CH4", "CO2", "CO"), structures=(structure.name,), pressures=(1e4, 1e5))
    hoa = TaskRequest("heat-of-adsorption", ("CO2",), structures=(structure.name,))
    root = Path(root) / "".join(c if c.isalnum() else "_" for c in mode)
    if root.exists():
        shutil.rmtree(root)
    task = iso
    if mode == "every adsorbate definition copied into each folder":
        folder = materialize_plan(_clean_plan(iso, bundle, structure, ["CH4"]), root, bundle, structures)
        for m in ("CO2", "CO"):
            (folder / f"{m}.def").write_text(forcefield.render_molecule(bundle.molecules[m]))
    elif mode == "adsorbate defined without any moves":
        task = hoa
        plan = _clean_plan(hoa, bundle, structure, ["CO2"])
        comp = replace(plan.spec.components[0], move_probabilities={})
        plan = replace(plan, spec=replace(plan.spec, components=(comp,)))
        folder = materialize_plan(plan, root, bundle, structures)
    elif mode == "framework CIF files not copied":
        task = hoa
        plan = _clean_plan(hoa, bundle, structure, ["CO2"])
        plan = replace(plan, files=tuple(f for f in plan.files if f.role != siminput.ROLE_FRAMEWORK))
        folder = materialize_plan(plan, root, bundle, structures)
    elif mode == "redundant force-field files left in the folder":
        task = hoa
        folder = materialize_plan(_clean_plan(hoa, bundle, structure, ["CO2"]), root, bundle, structures)
        (folder / "dummy_force_field.def").write_text(forcefield.render_force_field(bundle))
    elif mode == "minimum number of unit cells enforced":
        plan = _clean_plan(iso, bundle, structure, ["CH4"])
        cells = tuple(max(n, 3) for n in plan.spec.unit_cells)
        folder = materialize_plan(replace(plan, spec=replace(plan.spec, unit_cells=cells)), root, bundle, structures)
    elif mode == "mixture isotherm instead of separate runs":
        mix = replace(iso, kind="mixture-isotherm")
        folder = materialize_plan(_clean_plan(mix, bundle, structure, list(iso.adsorbates)), root, bundle, structures)
    elif mode == "24 A cutoff instead of 12 A":
        folder = materialize_plan(_clean_plan(iso, bundle, structure, ["CH4"], cutoff=24.0), root, bundle, structures)
    else:  # Widom misconfigured: GCMC moves and a pressure in a heat-of-adsorption run
        task = hoa
        plan = _clean_plan(iso, bundle, structure, ["CO2"])
        folder = materialize_plan(plan, root, bundle, structures)
    correct, executable = FAULT_CONSEQUENCES[mode]
    return SeededFault(mode, folder, task, FAILURE_MODES[mode], OutcomeLabel(correct, executable))


def render_template_preview(request: TaskRequest, adsorbates) -> str:
    """The simulation.input a scripted input expert writes (for docs and debugging)."""
    return render_simulation_input(siminput.SimulationSpec.from_dict(template_spec(request, adsorbates)))
