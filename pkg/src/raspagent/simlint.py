"""Static validation of simulation folders.

Each rule has a fixed id and severity. ``execution-error`` means RASPA would
refuse to run the folder; ``setup-error`` means it runs but does not compute
what the task asked for; warnings flag unusual but valid choices.
"""

from __future__ import annotations

import json
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

from .chemio import perpendicular_widths, read_cif, replication_for_cutoff
from .errors import RaspagentError
from .forcefield import (
    FORCE_FIELD_FILE,
    FORCE_FIELD_FILES,
    MIXING_RULES_FILE,
    PSEUDO_ATOMS_FILE,
    parse_interaction_files,
    parse_molecule,
    parse_pseudo_atoms,
)
from .siminput import SIMULATION_INPUT, SimulationPlan, materialize_plan, parse_simulation_input
from .tasks import HEAT_OF_ADSORPTION, TaskRequest

EXECUTION_ERROR = "execution-error"
SETUP_ERROR = "setup-error"
WARNING = "warning"
SEVERITIES = (EXECUTION_ERROR, SETUP_ERROR, WARNING)

DEFAULT_CUTOFF_WARNING = 20.0


@dataclass(frozen=True)
class Rule:
    id: str
    severity: str
    title: str


RULES = {
    r.id: r
    for r in (
        Rule("R0", EXECUTION_ERROR, "simulation.input present, readable and fully bound"),
        Rule("R1", EXECUTION_ERROR, "framework CIF named by FrameworkName is in the folder"),
        Rule("R2", SETUP_ERROR, "every component has at least one move with positive probability"),
        Rule("R3", SETUP_ERROR, "heat-of-adsorption runs use Widom insertion without swap or pressure"),
        Rule("R4", EXECUTION_ERROR, "force-field files cover every framework and adsorbate atom type"),
        Rule("R5", EXECUTION_ERROR, "unit cells satisfy the minimum-image condition for the cutoff"),
        Rule("R6", WARNING, "cutoff above the usual range"),
        Rule("R7", WARNING, "more unit cells than the cutoff requires"),
        Rule("R8", WARNING, "definition or CIF file present but not used"),
        Rule("R9", SETUP_ERROR, "single-adsorbate isotherm task set up as a mixture"),
        Rule("R10", EXECUTION_ERROR, "molecule definition file of a component is missing"),
    )
}

# Failure modes seen in agent-generated setups and the rules that catch them.
FAILURE_MODES = {
    "every adsorbate definition copied into each folder": ("R8",),
    "adsorbate defined without any moves": ("R2",),
    "framework CIF files not copied": ("R1",),
    "redundant force-field files left in the folder": ("R8",),
    "minimum number of unit cells enforced": ("R7",),
    "mixture isotherm instead of separate runs": ("R9",),
    "24 A cutoff instead of 12 A": ("R6",),
    "Widom insertion misconfigured for heat of adsorption": ("R3",),
}


@dataclass(frozen=True)
class Finding:
    rule: str
    severity: str
    message: str
    folder: str
    file: str | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unregistered rule id {self.rule!r}")
        if self.severity not in SEVERITIES:
            raise ValueError(f"unknown severity {self.severity!r}")

    @property
    def is_error(self) -> bool:
        return self.severity != WARNING

    def line(self) -> str:
        return f"RULE {self.rule} {self.severity} {self.folder} {self.message}"


@dataclass(frozen=True)
class OutcomeLabel:
    correctly_configured: bool
    executable: bool


def _finding(rule: str, message: str, folder: Path, file: str | None = None) -> Finding:
    return Finding(rule, RULES[rule].severity, message, str(folder), file)


def validate_folder(
    folder: str | Path,
    task: TaskRequest | None = None,
    *,
    cutoff_warning: float = DEFAULT_CUTOFF_WARNING,
) -> list[Finding]:
    """Run every rule against one simulation folder.

    Task-dependent rules (R3, R9) are skipped when no task is given.
    """
    folder = Path(folder)
    input_path = folder / SIMULATION_INPUT
    if not input_path.is_file():
        return [_finding("R0", f"{SIMULATION_INPUT} not found", folder)]
    try:
        spec = parse_simulation_input(input_path.read_text())
    except RaspagentError as exc:
        return [_finding("R0", f"cannot parse {SIMULATION_INPUT}: {exc}", folder, SIMULATION_INPUT)]

    findings: list[Finding] = []
    placeholders = spec.placeholders()
    if placeholders:
        findings.append(
            _finding("R0", f"unbound placeholders {', '.join(sorted(placeholders))}", folder, SIMULATION_INPUT)
        )

    # R1: framework
    structure = None
    cif_name = None
    if spec.framework_name and not placeholders:
        cif_name = f"{spec.framework_name}.cif"
        if not (folder / cif_name).is_file():
            findings.append(_finding("R1", f"framework file {cif_name} is missing", folder, cif_name))
        else:
            try:
                structure = read_cif(folder / cif_name)
            except RaspagentError as exc:
                findings.append(_finding("R1", f"framework file {cif_name} is unreadable: {exc}", folder, cif_name))

    # R2 / R3 / R9: component setup
    for comp in spec.components:
        if not comp.active_moves:
            findings.append(
                _finding("R2", f"component {comp.index} ({comp.molecule_name}) has no moves with positive probability", folder, SIMULATION_INPUT)
            )
    if task is not None and task.kind == HEAT_OF_ADSORPTION:
        for comp in spec.components:
            moves = comp.active_moves
            if moves.get("widom", 0.0) <= 0:
                findings.append(_finding("R3", f"component {comp.index} ({comp.molecule_name}) has no Widom insertions", folder, SIMULATION_INPUT))
            if moves.get("swap", 0.0) > 0:
                findings.append(_finding("R3", f"component {comp.index} ({comp.molecule_name}) uses swap moves in a Widom run", folder, SIMULATION_INPUT))
        if spec.pressure is not None:
            findings.append(_finding("R3", "heat-of-adsorption run sets ExternalPressure", folder, SIMULATION_INPUT))
        if not spec.components:
            findings.append(_finding("R3", "no adsorbate component for Widom insertion", folder, SIMULATION_INPUT))
    if task is not None and task.is_isotherm and not task.is_mixture and len(spec.components) > 1:
        findings.append(
            _finding("R9", f"{len(spec.components)} components in one isotherm run; the task asks for separate simulations", folder, SIMULATION_INPUT)
        )

    # R10: molecule files
    molecules = {}
    for comp in spec.components:
        mol_file = f"{comp.molecule_name}.def"
        path = folder / mol_file
        if not path.is_file():
            findings.append(_finding("R10", f"molecule definition {mol_file} is missing", folder, mol_file))
            continue
        try:
            molecules[comp.molecule_name] = parse_molecule(path.read_text(), comp.molecule_name)
        except RaspagentError as exc:
            findings.append(_finding("R10", f"molecule definition {mol_file} is unreadable: {exc}", folder, mol_file))

    # R4: force-field coverage
    findings.extend(_coverage(folder, structure, molecules))

    # R5 / R7: geometry
    if structure is not None and not isinstance(spec.unit_cells, str):
        required = replication_for_cutoff(structure.lattice, spec.cutoff)
        widths = perpendicular_widths(structure.lattice)
        short = [
            f"{axis}: {n} x {h:.3f} A < {2 * spec.cutoff:g} A"
            for axis, n, h in zip("abc", spec.unit_cells, widths)
            if n * h < 2 * spec.cutoff
        ]
        if short:
            findings.append(_finding("R5", "box too small for the cutoff (" + "; ".join(short) + ")", folder, SIMULATION_INPUT))
        elif tuple(spec.unit_cells) != required:
            findings.append(
                _finding("R7", f"unit cells {' '.join(map(str, spec.unit_cells))} exceed the required {' '.join(map(str, required))}", folder, SIMULATION_INPUT)
            )

    # R6
    if spec.cutoff > cutoff_warning:
        findings.append(_finding("R6", f"cutoff {spec.cutoff:g} A is above {cutoff_warning:g} A", folder, SIMULATION_INPUT))

    # R8: stray files
    used = set(FORCE_FIELD_FILES) | {f"{c.molecule_name}.def" for c in spec.components}
    if cif_name:
        used.add(cif_name)
    for path in sorted(folder.iterdir()):
        if path.is_file() and path.suffix in (".def", ".cif") and path.name not in used:
            findings.append(_finding("R8", f"{path.name} is not used by {SIMULATION_INPUT}", folder, path.name))
    return findings


def _coverage(folder: Path, structure, molecules: dict) -> list[Finding]:
    needed: dict[str, str] = {}
    if structure is not None:
        for site in structure.sites:
            needed.setdefault(site.type_symbol, f"framework {structure.name}")
    for name, mol in molecules.items():
        for t in mol.atom_types:
            needed.setdefault(t, f"molecule {name}")
    out = []
    try:
        atoms = {a.name for a in parse_pseudo_atoms((folder / PSEUDO_ATOMS_FILE).read_text())}
    except (OSError, RaspagentError) as exc:
        return [_finding("R4", f"{PSEUDO_ATOMS_FILE} missing or unreadable: {exc}", folder, PSEUDO_ATOMS_FILE)]
    try:
        ff_path = folder / FORCE_FIELD_FILE
        tables = parse_interaction_files(
            (folder / MIXING_RULES_FILE).read_text(),
            ff_path.read_text() if ff_path.exists() else None,
        )
    except (OSError, RaspagentError) as exc:
        return [_finding("R4", f"{MIXING_RULES_FILE} missing or unreadable: {exc}", folder, MIXING_RULES_FILE)]
    for type_name, owner in needed.items():
        if type_name not in atoms:
            out.append(_finding("R4", f"atom type {type_name} ({owner}) is not in {PSEUDO_ATOMS_FILE}", folder, PSEUDO_ATOMS_FILE))
        # framework sites may interact through charges only (e.g. Si in zeolites)
        elif owner.startswith("molecule") and type_name not in tables.self_params and not any(type_name in ov.key for ov in tables.overrides):
            out.append(_finding("R4", f"atom type {type_name} ({owner}) has no Lennard-Jones parameters", folder, MIXING_RULES_FILE))
    return out


def classify_outcome(findings: list[Finding]) -> OutcomeLabel:
    executable = not any(f.severity == EXECUTION_ERROR for f in findings)
    correct = executable and not any(f.severity == SETUP_ERROR for f in findings)
    return OutcomeLabel(correctly_configured=correct, executable=executable)


def combine_outcomes(labels: list[OutcomeLabel]) -> OutcomeLabel:
    """A batch is correct / executable only if every folder in it is."""
    if not labels:
        return OutcomeLabel(False, False)
    return OutcomeLabel(
        correctly_configured=all(l.correctly_configured for l in labels),
        executable=all(l.executable for l in labels),
    )


def batch_folders(batch_root: str | Path) -> list[Path]:
    """Simulation folders of a batch; names starting with ``_`` are templates."""
    root = Path(batch_root)
    if not root.is_dir():
        return []
    return sorted(
        p for p in root.iterdir()
        if p.is_dir() and not p.name.startswith("_") and (p / SIMULATION_INPUT).exists()
    )


def validate_batch(batch_root: str | Path, task: TaskRequest | None = None, **kwargs) -> dict[str, list[Finding]]:
    return {p.name: validate_folder(p, task, **kwargs) for p in batch_folders(batch_root)}


def validate_plan(plan: SimulationPlan, task: TaskRequest | None = None, *, bundle=None, structures=None, **kwargs) -> list[Finding]:
    """Validate an in-memory plan by materializing it into a scratch folder."""
    with tempfile.TemporaryDirectory() as tmp:
        folder = materialize_plan(plan, tmp, bundle=bundle, structures=structures)
        findings = validate_folder(folder, task, **kwargs)
    return [Finding(f.rule, f.severity, f.message, plan.folder, f.file) for f in findings]


def render_report(findings: list[Finding]) -> str:
    return "".join(f.line() + "\n" for f in findings)


def report_document(findings: list[Finding]) -> dict:
    label = classify_outcome(findings)
    return {
        "findings": [asdict(f) for f in findings],
        "errors": sum(f.is_error for f in findings),
        "warnings": sum(not f.is_error for f in findings),
        "correctly_configured": label.correctly_configured,
        "executable": label.executable,
    }


def report_json(findings: list[Finding]) -> str:
    return json.dumps(report_document(findings), sort_keys=True)
