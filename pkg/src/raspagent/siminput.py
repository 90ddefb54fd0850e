"""``simulation.input`` model, reader/writer, templating and batch planning."""

from __future__ import annotations

import logging
import re
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import chemio
from .chemio import CrystalStructure, replication_for_cutoff
from .errors import (
    PlanningError,
    SimulationInputParseError,
    StructuralError,
    UnboundPlaceholderError,
    UnknownAdsorbateError,
)
from .forcefield import (
    FORCE_FIELD_FILE,
    MIXING_RULES_FILE,
    PSEUDO_ATOMS_FILE,
    ForceFieldBundle,
    render_force_field,
    render_mixing_rules,
    render_molecule,
    render_pseudo_atoms,
)
from .tasks import HEAT_OF_ADSORPTION, ISOTHERM, MIXTURE_ISOTHERM, TaskRequest

logger = logging.getLogger(__name__)

SIMULATION_INPUT = "simulation.input"
DEFAULT_CUTOFF = 12.0

PLACEHOLDER_RE = re.compile(r"\{[A-Z][A-Z0-9_]*\}")
FRAMEWORK_TOKEN = "{FRAMEWORK}"
UNITCELLS_TOKEN = "{UNITCELLS}"
PRESSURE_TOKEN = "{PRESSURE}"
TEMPERATURE_TOKEN = "{TEMPERATURE}"

# move name -> RASPA keyword, in canonical output order
MOVE_KEYWORDS = {
    "translation": "TranslationProbability",
    "rotation": "RotationProbability",
    "reinsertion": "ReinsertionProbability",
    "swap": "SwapProbability",
    "widom": "WidomProbability",
    "identity-change": "IdentityChangeProbability",
}
_KEYWORD_MOVES = {kw.lower(): move for move, kw in MOVE_KEYWORDS.items()}

ISOTHERM_MOVES = {"translation": 0.5, "reinsertion": 0.5, "swap": 1.0}
WIDOM_MOVES = {"widom": 1.0}

ROLE_FRAMEWORK = "framework-cif"
ROLE_FORCE_FIELD = "force-field-file"
ROLE_MOLECULE = "molecule-def"


def is_placeholder(value) -> bool:
    return isinstance(value, str) and PLACEHOLDER_RE.fullmatch(value) is not None


@dataclass(frozen=True)
class ComponentSpec:
    index: int
    molecule_name: str
    molecule_definition: str = "Local"
    move_probabilities: dict[str, float] = field(default_factory=dict)
    create_count: int = 0
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for move, prob in self.move_probabilities.items():
            if move not in MOVE_KEYWORDS:
                raise StructuralError(f"component {self.index}: unknown move {move!r}")
            if prob < 0:
                raise StructuralError(f"component {self.index}: negative {move} probability")

    @property
    def active_moves(self) -> dict[str, float]:
        return {m: p for m, p in self.move_probabilities.items() if p > 0}


@dataclass(frozen=True)
class SimulationSpec:
    """One simulation.input. String values matching ``{TOKEN}`` are placeholders."""

    cycles: int = 10000
    init_cycles: int = 2000
    print_every: int = 1000
    forcefield: str = "Local"
    framework_name: str | None = None
    unit_cells: tuple[int, int, int] | str = (1, 1, 1)
    temperature: float | str | None = None
    pressure: tuple[float, ...] | str | None = None
    cutoff: float = DEFAULT_CUTOFF
    charge_method: str = "None"
    components: tuple[ComponentSpec, ...] = ()
    simulation_type: str = "MonteCarlo"
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if isinstance(self.pressure, (int, float)):
            object.__setattr__(self, "pressure", (float(self.pressure),))
        elif isinstance(self.pressure, list):
            object.__setattr__(self, "pressure", tuple(float(p) for p in self.pressure))
        if isinstance(self.unit_cells, list):
            object.__setattr__(self, "unit_cells", tuple(self.unit_cells))
        object.__setattr__(self, "components", tuple(self.components))
        if self.simulation_type != "MonteCarlo":
            raise StructuralError(f"unsupported simulation type {self.simulation_type!r}")
        if not self.cutoff > 0:
            raise StructuralError(f"cutoff must be positive, got {self.cutoff}")
        if self.print_every <= 0:
            raise StructuralError("PrintEvery must be positive")
        if self.charge_method not in ("None", "Ewald"):
            raise StructuralError(f"unsupported charge method {self.charge_method!r}")
        for expected, comp in enumerate(self.components):
            if comp.index != expected:
                raise StructuralError(
                    f"component indices must be consecutive from 0; found {comp.index} at position {expected}"
                )

    def placeholders(self) -> set[str]:
        return set(PLACEHOLDER_RE.findall(render_simulation_input(self)))

    @property
    def molecule_names(self) -> list[str]:
        return [c.molecule_name for c in self.components]

    @classmethod
    def from_dict(cls, doc: dict) -> SimulationSpec:
        """Build from a loosely typed document (as sent by an agent tool call)."""
        doc = dict(doc)
        comps = []
        for i, c in enumerate(doc.pop("components", [])):
            c = dict(c)
            moves = c.pop("moves", c.pop("move_probabilities", {}))
            comps.append(
                ComponentSpec(
                    index=int(c.pop("index", i)),
                    molecule_name=c.pop("molecule_name"),
                    molecule_definition=c.pop("molecule_definition", "Local"),
                    move_probabilities={k: float(v) for k, v in moves.items()},
                    create_count=int(c.pop("create_count", 0)),
                    extras=tuple(tuple(e) for e in c.pop("extras", ())),
                )
            )
        if "unit_cells" in doc and isinstance(doc["unit_cells"], list):
            doc["unit_cells"] = tuple(int(n) for n in doc["unit_cells"])
        if "extras" in doc:
            doc["extras"] = tuple(tuple(e) for e in doc["extras"])
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise StructuralError(f"unknown simulation fields: {sorted(unknown)}")
        return cls(components=tuple(comps), **doc)


# --------------------------------------------------------------------------
# rendering


def _num(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def render_simulation_input(spec: SimulationSpec) -> str:
    out = [
        f"SimulationType {spec.simulation_type}",
        f"NumberOfCycles {spec.cycles}",
        f"NumberOfInitializationCycles {spec.init_cycles}",
        f"PrintEvery {spec.print_every}",
        f"Forcefield {spec.forcefield}",
        f"CutOff {_num(spec.cutoff)}",
        f"ChargeMethod {spec.charge_method}",
    ]
    out.extend(f"{k} {v}".rstrip() for k, v in spec.extras)
    if spec.framework_name is not None:
        out.append("")
        out.append("Framework 0")
        out.append(f"FrameworkName {spec.framework_name}")
        cells = spec.unit_cells
        out.append("UnitCells " + (cells if isinstance(cells, str) else " ".join(str(n) for n in cells)))
        if spec.temperature is not None:
            out.append(f"ExternalTemperature {_num(spec.temperature)}")
        if spec.pressure is not None:
            pressure = spec.pressure
            text = pressure if isinstance(pressure, str) else " ".join(_num(p) for p in pressure)
            out.append(f"ExternalPressure {text}")
    for comp in spec.components:
        out.append("")
        out.append(f"Component {comp.index} MoleculeName {comp.molecule_name}")
        out.append(f"    MoleculeDefinition {comp.molecule_definition}")
        for move, keyword in MOVE_KEYWORDS.items():
            prob = comp.move_probabilities.get(move, 0.0)
            if prob > 0:
                out.append(f"    {keyword} {_num(prob)}")
        out.append(f"    CreateNumberOfMolecules {comp.create_count}")
        out.extend(f"    {k} {v}".rstrip() for k, v in comp.extras)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# parsing


def _parse_number(token: str, kind, keyword: str, lineno: int):
    if is_placeholder(token):
        return token
    try:
        return kind(token)
    except ValueError:
        raise SimulationInputParseError(
            f"line {lineno}: {keyword} expects a number, got {token!r}"
        ) from None


def parse_simulation_input(text: str) -> SimulationSpec:
    fields: dict = {"extras": []}
    components: list[dict] = []
    current: dict | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indented = line[:1].isspace()
        tokens = line.split()
        keyword = tokens[0]
        key = keyword.lower()
        values = tokens[1:]
        value = " ".join(values)

        def need_one():
            if not values:
                raise SimulationInputParseError(f"line {lineno}: {keyword} has no value")
            return values[0]

        if key == "component":
            if len(tokens) < 4 or tokens[2].lower() != "moleculename":
                raise SimulationInputParseError(
                    f"line {lineno}: expected 'Component <i> MoleculeName <name>'"
                )
            index = _parse_number(tokens[1], int, "Component", lineno)
            if index != len(components):
                raise StructuralError(
                    f"line {lineno}: component index {index} follows {len(components) - 1}; indices must be consecutive"
                )
            current = {
                "index": index,
                "molecule_name": tokens[3],
                "move_probabilities": {},
                "extras": [],
            }
            components.append(current)
            continue

        if current is not None:
            if key == "moleculedefinition":
                current["molecule_definition"] = need_one()
                continue
            if key in _KEYWORD_MOVES:
                current["move_probabilities"][_KEYWORD_MOVES[key]] = _parse_number(
                    need_one(), float, keyword, lineno
                )
                continue
            if key == "createnumberofmolecules":
                current["create_count"] = _parse_number(need_one(), int, keyword, lineno)
                continue
            if indented:
                current["extras"].append((keyword, value))
                continue

        if key == "simulationtype":
            fields["simulation_type"] = need_one()
        elif key == "numberofcycles":
            fields["cycles"] = _parse_number(need_one(), int, keyword, lineno)
        elif key == "numberofinitializationcycles":
            fields["init_cycles"] = _parse_number(need_one(), int, keyword, lineno)
        elif key == "printevery":
            fields["print_every"] = _parse_number(need_one(), int, keyword, lineno)
        elif key == "forcefield":
            fields["forcefield"] = need_one()
        elif key == "cutoff":
            fields["cutoff"] = _parse_number(need_one(), float, keyword, lineno)
        elif key == "chargemethod":
            fields["charge_method"] = "Ewald" if need_one().lower() == "ewald" else "None"
        elif key == "framework":
            pass
        elif key == "frameworkname":
            fields["framework_name"] = need_one()
        elif key == "unitcells":
            if len(values) == 1 and is_placeholder(values[0]):
                fields["unit_cells"] = values[0]
            elif len(values) == 3:
                fields["unit_cells"] = tuple(
                    _parse_number(v, int, keyword, lineno) for v in values
                )
            else:
                raise SimulationInputParseError(f"line {lineno}: UnitCells expects 3 integers")
        elif key == "externaltemperature":
            fields["temperature"] = _parse_number(need_one(), float, keyword, lineno)
        elif key == "externalpressure":
            if len(values) == 1 and is_placeholder(values[0]):
                fields["pressure"] = values[0]
            else:
                fields["pressure"] = tuple(
                    _parse_number(v, float, keyword, lineno) for v in values
                )
                if not fields["pressure"]:
                    raise SimulationInputParseError(f"line {lineno}: ExternalPressure has no value")
        else:
            fields["extras"].append((keyword, value))

    fields["extras"] = tuple(fields["extras"])
    comps = tuple(
        ComponentSpec(
            index=c["index"],
            molecule_name=c["molecule_name"],
            molecule_definition=c.get("molecule_definition", "Local"),
            move_probabilities=c["move_probabilities"],
            create_count=c.get("create_count", 0),
            extras=tuple(c["extras"]),
        )
        for c in components
    )
    return SimulationSpec(components=comps, **fields)


def read_simulation_input(path: str | Path) -> SimulationSpec:
    return parse_simulation_input(Path(path).read_text())


# --------------------------------------------------------------------------
# example inputs


@dataclass(frozen=True)
class ExampleInput:
    name: str
    description: str
    text: str


def example_inputs_catalog(examples_root: str | Path) -> list[ExampleInput]:
    """Example inputs (``*.input``); the first ``#`` line is the description."""
    root = Path(examples_root)
    if not root.is_dir():
        raise OSError(f"examples root {root} is not a readable directory")
    entries = []
    for path in sorted(root.glob("*.input")):
        text = path.read_text()
        description = ""
        for line in text.splitlines():
            if line.strip():
                if line.lstrip().startswith("#"):
                    description = line.lstrip("# ").strip()
                break
        entries.append(ExampleInput(name=path.stem, description=description, text=text))
    return entries


# --------------------------------------------------------------------------
# plans and templates


@dataclass(frozen=True)
class RequiredFile:
    role: str
    filename: str
    # None: generated from the bundle / structure when materialized
    source: str | None = None


@dataclass(frozen=True)
class SimulationPlan:
    folder: str
    spec: SimulationSpec
    files: tuple[RequiredFile, ...]

    @property
    def framework_files(self) -> list[RequiredFile]:
        return [f for f in self.files if f.role == ROLE_FRAMEWORK]


@dataclass(frozen=True)
class TemplateFolder:
    spec: SimulationSpec
    files: tuple[RequiredFile, ...]
    name: str = "template"

    def placeholders(self) -> set[str]:
        found = self.spec.placeholders()
        for f in self.files:
            found |= set(PLACEHOLDER_RE.findall(f.filename))
            found |= set(PLACEHOLDER_RE.findall(f.source or ""))
        return found


def _binding_text(value) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_num(v) for v in value)
    return _num(value)


def _substitute(text: str, bindings: dict[str, str]) -> str:
    return PLACEHOLDER_RE.sub(lambda m: bindings.get(m.group(0), m.group(0)), text)


def folder_name(spec: SimulationSpec, condition_index: int = 0) -> str:
    molecules = "-".join(spec.molecule_names) or "empty"
    return f"{spec.framework_name}_{molecules}_{condition_index}"


def instantiate_template(
    template: TemplateFolder, bindings: dict[str, object], condition_index: int = 0
) -> SimulationPlan:
    """Bind every placeholder of a template, producing a concrete plan.

    Binding keys may be given with or without braces. Unused bindings are
    logged and otherwise ignored.
    """
    normalized = {}
    for key, value in bindings.items():
        token = key if key.startswith("{") else "{" + key + "}"
        normalized[token] = _binding_text(value)
    needed = template.placeholders()
    missing = sorted(needed - set(normalized))
    if missing:
        raise UnboundPlaceholderError(f"unbound placeholder(s): {', '.join(missing)}")
    unused = sorted(set(normalized) - needed)
    if unused:
        logger.warning("template %s: unused bindings %s", template.name, ", ".join(unused))

    spec = parse_simulation_input(_substitute(render_simulation_input(template.spec), normalized))
    leftover = spec.placeholders()
    if leftover:
        raise UnboundPlaceholderError(f"placeholder(s) survived binding: {', '.join(sorted(leftover))}")
    files = tuple(
        RequiredFile(
            f.role,
            _substitute(f.filename, normalized),
            None if f.source is None else _substitute(f.source, normalized),
        )
        for f in template.files
    )
    if not any(f.role == ROLE_FRAMEWORK for f in files) and spec.framework_name:
        files = (RequiredFile(ROLE_FRAMEWORK, f"{spec.framework_name}.cif", None),) + files
    return SimulationPlan(folder=folder_name(spec, condition_index), spec=spec, files=files)


def load_template(folder: str | Path, structures_root: str | Path) -> TemplateFolder:
    """Describe a template folder on disk.

    The CIF found in the template (a placeholder structure) is replaced by a
    reference to ``<structures_root>/{FRAMEWORK}.cif``.
    """
    folder = Path(folder)
    spec = read_simulation_input(folder / SIMULATION_INPUT)
    files = [RequiredFile(ROLE_FRAMEWORK, f"{FRAMEWORK_TOKEN}.cif", str(Path(structures_root) / f"{FRAMEWORK_TOKEN}.cif"))]
    for path in sorted(folder.iterdir()):
        if path.name == SIMULATION_INPUT or path.suffix == ".cif" or not path.is_file():
            continue
        if path.name in (PSEUDO_ATOMS_FILE, MIXING_RULES_FILE, FORCE_FIELD_FILE):
            files.append(RequiredFile(ROLE_FORCE_FIELD, path.name, str(path)))
        elif path.suffix == ".def":
            files.append(RequiredFile(ROLE_MOLECULE, path.name, str(path)))
    return TemplateFolder(spec=spec, files=tuple(files), name=folder.name)


def _components_for(task: TaskRequest, molecules: list[str]) -> tuple[ComponentSpec, ...]:
    moves = WIDOM_MOVES if task.kind == HEAT_OF_ADSORPTION else ISOTHERM_MOVES
    return tuple(
        ComponentSpec(index=i, molecule_name=m, move_probabilities=dict(moves), create_count=0)
        for i, m in enumerate(molecules)
    )


def _needs_ewald(bundle: ForceFieldBundle, structure: CrystalStructure, molecules: list[str]) -> bool:
    types = {s.type_symbol for s in structure.sites}
    for m in molecules:
        types |= set(bundle.molecules[m].atom_types)
    charged = {a.name for a in bundle.pseudo_atoms if a.charge != 0.0}
    return bool(types & charged) or any(s.charge for s in structure.sites)


def plan_batch(
    task: TaskRequest,
    structures: list[CrystalStructure],
    adsorbates: list[str] | None = None,
    bundle: ForceFieldBundle | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    structure_sources: dict[str, str] | None = None,
) -> list[SimulationPlan]:
    """Expand a task into one plan per structure and adsorbate.

    Mixture tasks put every adsorbate into a single plan per structure.
    Files with no ``structure_sources`` entry are generated on
    materialization.
    """
    if task.kind not in (ISOTHERM, HEAT_OF_ADSORPTION, MIXTURE_ISOTHERM):
        raise PlanningError(f"unknown task kind {task.kind!r}")
    if bundle is None:
        raise PlanningError("a force-field bundle is required")
    adsorbates = list(task.adsorbates if adsorbates is None else adsorbates)
    if not structures:
        raise PlanningError("no structures to plan for")
    if not adsorbates:
        raise PlanningError("no adsorbates to plan for")
    for name in adsorbates:
        if name not in bundle.molecules:
            raise UnknownAdsorbateError(
                f"adsorbate {name!r} has no molecule definition in bundle {bundle.name}"
            )
    groups = [adsorbates] if task.is_mixture else [[a] for a in adsorbates]
    sources = structure_sources or {}

    plans = []
    seen = set()
    for structure in structures:
        cells = replication_for_cutoff(structure.lattice, cutoff)
        for molecules in groups:
            spec = SimulationSpec(
                cycles=task.cycles,
                init_cycles=task.init_cycles,
                print_every=task.print_every,
                forcefield="Local",
                framework_name=structure.name,
                unit_cells=cells,
                temperature=task.temperature,
                pressure=task.pressures if task.is_isotherm else None,
                cutoff=cutoff,
                charge_method="Ewald" if _needs_ewald(bundle, structure, molecules) else "None",
                components=_components_for(task, molecules),
            )
            files = [RequiredFile(ROLE_FRAMEWORK, f"{structure.name}.cif", sources.get(structure.name))]
            files += [RequiredFile(ROLE_FORCE_FIELD, name, None) for name in (PSEUDO_ATOMS_FILE, MIXING_RULES_FILE, FORCE_FIELD_FILE)]
            files += [RequiredFile(ROLE_MOLECULE, f"{m}.def", None) for m in molecules]
            plan = SimulationPlan(folder=folder_name(spec), spec=spec, files=tuple(files))
            if plan.folder in seen:
                raise PlanningError(f"duplicate folder name {plan.folder}")
            seen.add(plan.folder)
            plans.append(plan)
    return plans


def materialize_plan(
    plan: SimulationPlan,
    batch_root: str | Path,
    bundle: ForceFieldBundle | None = None,
    structures: dict[str, CrystalStructure] | None = None,
) -> Path:
    """Write a plan's folder: simulation.input plus every required file."""
    folder = Path(batch_root) / plan.folder
    folder.mkdir(parents=True, exist_ok=True)
    (folder / SIMULATION_INPUT).write_text(render_simulation_input(plan.spec))
    for f in plan.files:
        target = folder / f.filename
        if f.source is not None:
            shutil.copyfile(f.source, target)
            continue
        if f.role == ROLE_FRAMEWORK:
            if not structures or plan.spec.framework_name not in structures:
                raise PlanningError(f"no structure available to write {f.filename}")
            chemio.write_cif(structures[plan.spec.framework_name], target)
            continue
        if bundle is None:
            raise PlanningError(f"no bundle available to write {f.filename}")
        if f.filename == PSEUDO_ATOMS_FILE:
            target.write_text(render_pseudo_atoms(bundle.pseudo_atoms))
        elif f.filename == MIXING_RULES_FILE:
            target.write_text(render_mixing_rules(bundle))
        elif f.filename == FORCE_FIELD_FILE:
            target.write_text(render_force_field(bundle))
        else:
            mol = Path(f.filename).stem
            if mol not in bundle.molecules:
                raise UnknownAdsorbateError(f"bundle {bundle.name} has no molecule {mol!r}")
            target.write_text(render_molecule(bundle.molecules[mol]))
    return folder


def with_condition(plan: SimulationPlan, index: int) -> SimulationPlan:
    return replace(plan, folder=folder_name(plan.spec, index))
