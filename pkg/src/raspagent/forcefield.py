"""RASPA force-field definition files: model, parsers, writers, mixing.

Energies are in Kelvin, lengths in Angstrom, charges in units of e. Only the
``lennard-jones`` pair potential is supported.

Writers emit fixed comment lines and ``repr`` floats so that rendering a
parsed bundle reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    DanglingReferenceError,
    DuplicateTypeError,
    ForceFieldFormatError,
    IncompatibleForceFieldsError,
    MissingTypeError,
    UnsupportedPotentialError,
)

logger = logging.getLogger(__name__)

PSEUDO_ATOMS_FILE = "pseudo_atoms.def"
MIXING_RULES_FILE = "force_field_mixing_rules.def"
FORCE_FIELD_FILE = "force_field.def"
FORCE_FIELD_FILES = (PSEUDO_ATOMS_FILE, MIXING_RULES_FILE, FORCE_FIELD_FILE)
METADATA_FILE = "metadata.json"

LENNARD_JONES = "lennard-jones"
LORENTZ_BERTHELOT = "Lorentz-Berthelot"
JORGENSEN = "Jorgensen"
MIXING_RULES = (LORENTZ_BERTHELOT, JORGENSEN)
TRUNCATION_RULES = ("truncated", "shifted")


@dataclass(frozen=True)
class PseudoAtom:
    name: str
    element: str
    mass: float
    charge: float = 0.0
    print_flag: bool = True
    chem: str = ""
    oxidation: int = 0
    polarization: float = 0.0
    b_factor: float = 1.0
    radius: float = 1.0
    connectivity: int = 0
    anisotropic_flag: str = "0"
    anisotropic_type: str = "absolute"
    tinker_type: str = "0"

    def __post_init__(self):
        if not self.name:
            raise ForceFieldFormatError("pseudo atom with empty name")
        if self.mass < 0:
            raise ForceFieldFormatError(f"pseudo atom {self.name}: negative mass {self.mass}")
        if not self.chem:
            object.__setattr__(self, "chem", self.element)


@dataclass(frozen=True)
class LjParams:
    epsilon: float
    sigma: float

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ForceFieldFormatError(f"epsilon must be >= 0, got {self.epsilon}")
        if not self.sigma > 0:
            raise ForceFieldFormatError(f"sigma must be > 0, got {self.sigma}")


def pair_key(type_a: str, type_b: str) -> tuple[str, str]:
    return (type_a, type_b) if type_a <= type_b else (type_b, type_a)


@dataclass(frozen=True)
class PairOverride:
    type_a: str
    type_b: str
    params: LjParams
    potential_name: str = LENNARD_JONES

    @property
    def key(self) -> tuple[str, str]:
        return pair_key(self.type_a, self.type_b)


@dataclass(frozen=True)
class MoleculeAtom:
    pseudo_atom: str
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class MoleculeDefinition:
    name: str
    critical_temperature: float
    critical_pressure: float
    acentric_factor: float
    atoms: tuple[MoleculeAtom, ...]
    rigid: bool = True
    bonds: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.atoms:
            raise ForceFieldFormatError(f"molecule {self.name} has no atoms")
        for i, j in self.bonds:
            if not (0 <= i < len(self.atoms) and 0 <= j < len(self.atoms)):
                raise ForceFieldFormatError(f"molecule {self.name}: bond ({i}, {j}) out of range")

    @property
    def atom_types(self) -> list[str]:
        return [atom.pseudo_atom for atom in self.atoms]

    def bond_length(self, i: int, j: int) -> float:
        return math.dist(self.atoms[i].position, self.atoms[j].position)


@dataclass(frozen=True)
class InteractionTables:
    """Contents of the mixing-rules file plus the optional overrides file."""

    truncation_rule: str
    tail_corrections: bool
    self_params: dict[str, LjParams]
    mixing_rule_name: str
    overrides: tuple[PairOverride, ...] = ()
    # raw rows of the rarely used overwrite sections, passed through untouched
    rule_overwrites: tuple[str, ...] = ()
    mixing_overwrites: tuple[str, ...] = ()


@dataclass(frozen=True)
class ForceFieldBundle:
    name: str
    pseudo_atoms: tuple[PseudoAtom, ...]
    self_params: dict[str, LjParams]
    description: str = ""
    truncation_rule: str = "shifted"
    tail_corrections: bool = False
    mixing_rule_name: str = LORENTZ_BERTHELOT
    overrides: tuple[PairOverride, ...] = ()
    molecules: dict[str, MoleculeDefinition] = field(default_factory=dict)
    rule_overwrites: tuple[str, ...] = ()
    mixing_overwrites: tuple[str, ...] = ()
    collisions: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        names = [atom.name for atom in self.pseudo_atoms]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateTypeError(f"bundle {self.name}: duplicate pseudo atoms {dupes}")
        known = set(names)
        for type_name in self.self_params:
            if type_name not in known:
                raise MissingTypeError(
                    f"bundle {self.name}: LJ parameters for unknown pseudo atom {type_name!r}"
                )
        seen = set()
        for ov in self.overrides:
            for type_name in (ov.type_a, ov.type_b):
                if type_name not in known:
                    raise MissingTypeError(
                        f"bundle {self.name}: override references unknown pseudo atom {type_name!r}"
                    )
            if ov.key in seen:
                raise DuplicateTypeError(f"bundle {self.name}: duplicate override for {ov.key}")
            seen.add(ov.key)
        if self.truncation_rule not in TRUNCATION_RULES:
            raise ForceFieldFormatError(f"unknown truncation rule {self.truncation_rule!r}")
        if self.mixing_rule_name not in MIXING_RULES:
            raise ForceFieldFormatError(f"unknown mixing rule {self.mixing_rule_name!r}")

    @property
    def atom_types(self) -> list[str]:
        return [atom.name for atom in self.pseudo_atoms]

    def pseudo_atom(self, name: str) -> PseudoAtom:
        for atom in self.pseudo_atoms:
            if atom.name == name:
                return atom
        raise MissingTypeError(f"pseudo atom {name!r} not in bundle {self.name}")

    def semantic_content(self) -> tuple:
        """Everything the definition files carry (name/description excluded)."""
        return (
            self.pseudo_atoms,
            tuple(sorted(self.self_params.items())),
            self.truncation_rule,
            self.tail_corrections,
            self.mixing_rule_name,
            tuple(sorted(self.overrides, key=lambda o: o.key)),
            tuple(sorted(self.molecules.items())),
            self.rule_overwrites,
            self.mixing_overwrites,
        )


# --------------------------------------------------------------------------
# parsing helpers


def _content_lines(text: str) -> list[tuple[int, str]]:
    """Non-blank lines with 1-based numbers; comments kept (they delimit sections)."""
    return [(i + 1, line.strip()) for i, line in enumerate(text.splitlines()) if line.strip()]


def _data_lines(text: str) -> list[tuple[int, str]]:
    return [(n, line) for n, line in _content_lines(text) if not line.startswith("#")]


class _Cursor:
    def __init__(self, lines: list[tuple[int, str]], what: str):
        self.lines = lines
        self.pos = 0
        self.what = what

    def next(self, expect: str) -> tuple[int, str]:
        if self.pos >= len(self.lines):
            raise ForceFieldFormatError(f"{self.what}: unexpected end of file, expected {expect}")
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def next_int(self, expect: str) -> int:
        lineno, line = self.next(expect)
        try:
            return int(line.split()[0])
        except ValueError:
            raise ForceFieldFormatError(
                f"{self.what} line {lineno}: expected {expect}, got {line!r}"
            ) from None

    def remaining(self) -> int:
        return len(self.lines) - self.pos


def _float(token: str, what: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ForceFieldFormatError(f"{where}: {what} is not numeric: {token!r}") from None


def _yes(token: str) -> bool:
    return token.strip().lower() in ("yes", "true", "1")


def parse_pseudo_atoms(text: str) -> tuple[PseudoAtom, ...]:
    cur = _Cursor(_data_lines(text), PSEUDO_ATOMS_FILE)
    declared = cur.next_int("pseudo atom count")
    rows = cur.lines[cur.pos :]
    if len(rows) != declared:
        raise ForceFieldFormatError(
            f"{PSEUDO_ATOMS_FILE}: declares {declared} pseudo atoms but has {len(rows)} rows"
        )
    atoms = []
    for index, (lineno, line) in enumerate(rows):
        where = f"{PSEUDO_ATOMS_FILE} row {index} (line {lineno})"
        tok = line.split()
        if len(tok) < 14:
            raise ForceFieldFormatError(f"{where}: expected 14 columns, got {len(tok)}")
        try:
            oxidation = int(tok[4])
            connectivity = int(tok[10])
        except ValueError:
            raise ForceFieldFormatError(f"{where}: oxidation/connectivity must be integers") from None
        atoms.append(
            PseudoAtom(
                name=tok[0],
                print_flag=_yes(tok[1]),
                element=tok[2],
                chem=tok[3],
                oxidation=oxidation,
                mass=_float(tok[5], "mass", where),
                charge=_float(tok[6], "charge", where),
                polarization=_float(tok[7], "polarization", where),
                b_factor=_float(tok[8], "B-factor", where),
                radius=_float(tok[9], "radius", where),
                connectivity=connectivity,
                anisotropic_flag=tok[11],
                anisotropic_type=tok[12],
                tinker_type=tok[13],
            )
        )
    return tuple(atoms)


def _parse_lj_row(tok: list[str], offset: int, where: str) -> LjParams:
    potential = tok[offset].lower()
    if potential != LENNARD_JONES:
        raise UnsupportedPotentialError(f"{where}: unsupported potential {tok[offset]!r}")
    if len(tok) < offset + 3:
        raise ForceFieldFormatError(f"{where}: lennard-jones needs epsilon and sigma")
    return LjParams(
        epsilon=_float(tok[offset + 1], "epsilon", where),
        sigma=_float(tok[offset + 2], "sigma", where),
    )


def _canonical_mixing_rule(token: str) -> str:
    for rule in MIXING_RULES:
        if token.lower() == rule.lower():
            return rule
    raise UnsupportedPotentialError(f"unsupported mixing rule {token!r}")


def parse_interaction_files(mixing_text: str, overrides_text: str | None = None) -> InteractionTables:
    cur = _Cursor(_data_lines(mixing_text), MIXING_RULES_FILE)
    _, rule_line = cur.next("truncation rule")
    truncation = rule_line.split()[0].lower()
    if truncation not in TRUNCATION_RULES:
        raise ForceFieldFormatError(f"{MIXING_RULES_FILE}: unknown truncation rule {rule_line!r}")
    _, tail_line = cur.next("tail-correction flag")
    tail = _yes(tail_line.split()[0])
    count = cur.next_int("interaction count")
    self_params: dict[str, LjParams] = {}
    for _ in range(count):
        lineno, line = cur.next("interaction row")
        where = f"{MIXING_RULES_FILE} line {lineno}"
        tok = line.split()
        if len(tok) < 2:
            raise ForceFieldFormatError(f"{where}: malformed interaction row {line!r}")
        if tok[0] in self_params:
            raise DuplicateTypeError(f"{where}: duplicate interaction for type {tok[0]!r}")
        self_params[tok[0]] = _parse_lj_row(tok, 1, where)
    _, mixing_line = cur.next("mixing rule name")
    mixing = _canonical_mixing_rule(mixing_line.split()[0])

    overrides: list[PairOverride] = []
    rule_overwrites: list[str] = []
    mixing_overwrites: list[str] = []
    if overrides_text is not None:
        ocur = _Cursor(_data_lines(overrides_text), FORCE_FIELD_FILE)
        for _ in range(ocur.next_int("rule-overwrite count")):
            rule_overwrites.append(ocur.next("rule-overwrite row")[1])
        seen = set()
        for _ in range(ocur.next_int("pair interaction count")):
            lineno, line = ocur.next("pair interaction row")
            where = f"{FORCE_FIELD_FILE} line {lineno}"
            tok = line.split()
            if len(tok) < 3:
                raise ForceFieldFormatError(f"{where}: malformed pair row {line!r}")
            ov = PairOverride(tok[0], tok[1], _parse_lj_row(tok, 2, where), LENNARD_JONES)
            if ov.key in seen:
                raise DuplicateTypeError(f"{where}: duplicate pair override {ov.key}")
            seen.add(ov.key)
            overrides.append(ov)
        if ocur.remaining():
            for _ in range(ocur.next_int("mixing-overwrite count")):
                mixing_overwrites.append(ocur.next("mixing-overwrite row")[1])

    return InteractionTables(
        truncation_rule=truncation,
        tail_corrections=tail,
        self_params=self_params,
        mixing_rule_name=mixing,
        overrides=tuple(overrides),
        rule_overwrites=tuple(rule_overwrites),
        mixing_overwrites=tuple(mixing_overwrites),
    )


def parse_molecule(text: str, name: str) -> MoleculeDefinition:
    cur = _Cursor(_data_lines(text), f"{name}.def")
    tc = _float(cur.next("critical temperature")[1].split()[0], "critical temperature", f"{name}.def")
    pc = _float(cur.next("critical pressure")[1].split()[0], "critical pressure", f"{name}.def")
    omega = _float(cur.next("acentric factor")[1].split()[0], "acentric factor", f"{name}.def")
    n_atoms = cur.next_int("number of atoms")
    n_groups = cur.next_int("number of groups")
    if n_groups != 1:
        raise ForceFieldFormatError(f"{name}.def: only single-group molecules supported")
    _, kind = cur.next("group type")
    rigid = kind.split()[0].lower() == "rigid"
    group_atoms = cur.next_int("group atom count")
    if group_atoms != n_atoms:
        raise ForceFieldFormatError(
            f"{name}.def: group lists {group_atoms} atoms, molecule declares {n_atoms}"
        )
    atoms = []
    for k in range(n_atoms):
        lineno, line = cur.next("atom position row")
        tok = line.split()
        where = f"{name}.def line {lineno}"
        if len(tok) < 2:
            raise ForceFieldFormatError(f"{where}: malformed atom row {line!r}")
        pos = (0.0, 0.0, 0.0)
        if len(tok) >= 5:
            pos = tuple(_float(t, "position", where) for t in tok[2:5])
        atoms.append(MoleculeAtom(tok[1], pos))
    counts_line = cur.next("intramolecular counts")[1].split()
    try:
        n_bonds = int(counts_line[1]) if len(counts_line) > 1 else 0
    except ValueError:
        raise ForceFieldFormatError(f"{name}.def: malformed intramolecular count line") from None
    bonds = []
    for _ in range(n_bonds):
        lineno, line = cur.next("bond row")
        tok = line.split()
        try:
            bonds.append((int(tok[0]), int(tok[1])))
        except (ValueError, IndexError):
            raise ForceFieldFormatError(f"{name}.def line {lineno}: malformed bond row") from None
    return MoleculeDefinition(
        name=name,
        critical_temperature=tc,
        critical_pressure=pc,
        acentric_factor=omega,
        atoms=tuple(atoms),
        rigid=rigid,
        bonds=tuple(bonds),
    )


# --------------------------------------------------------------------------
# mixing


def mix_lorentz_berthelot(p_i: LjParams, p_j: LjParams) -> LjParams:
    return LjParams(
        epsilon=math.sqrt(p_i.epsilon * p_j.epsilon),
        sigma=0.5 * (p_i.sigma + p_j.sigma),
    )


def mix_jorgensen(p_i: LjParams, p_j: LjParams) -> LjParams:
    return LjParams(
        epsilon=math.sqrt(p_i.epsilon * p_j.epsilon),
        sigma=math.sqrt(p_i.sigma * p_j.sigma),
    )


_MIXERS = {LORENTZ_BERTHELOT: mix_lorentz_berthelot, JORGENSEN: mix_jorgensen}


def effective_pair_params(bundle: ForceFieldBundle, type_a: str, type_b: str) -> LjParams:
    known = set(bundle.atom_types)
    for type_name in (type_a, type_b):
        if type_name not in known:
            raise MissingTypeError(f"type {type_name!r} is not defined in bundle {bundle.name}")
    key = pair_key(type_a, type_b)
    for ov in bundle.overrides:
        if ov.key == key:
            return ov.params
    for type_name in key:
        if type_name not in bundle.self_params:
            raise MissingTypeError(
                f"type {type_name!r} has no Lennard-Jones parameters in bundle {bundle.name}"
            )
    mixer = _MIXERS[bundle.mixing_rule_name]
    return mixer(bundle.self_params[key[0]], bundle.self_params[key[1]])


# --------------------------------------------------------------------------
# combining


def combine_force_fields(
    primary: ForceFieldBundle,
    extras: list[ForceFieldBundle] | tuple[ForceFieldBundle, ...] = (),
    *,
    name: str | None = None,
    truncation_rule: str | None = None,
    tail_corrections: bool | None = None,
    mixing_rule_name: str | None = None,
) -> ForceFieldBundle:
    """Union of several bundles; earlier bundles win on conflicting definitions.

    Conflicts are recorded in ``collisions`` on the result. Differing
    truncation / tail-correction settings need an explicit resolution.
    """
    bundles = [primary, *extras]
    resolved = {}
    for attr, override in (
        ("truncation_rule", truncation_rule),
        ("tail_corrections", tail_corrections),
        ("mixing_rule_name", mixing_rule_name),
    ):
        values = {getattr(b, attr) for b in bundles}
        if override is not None:
            resolved[attr] = override
        elif len(values) == 1 or attr == "mixing_rule_name":
            resolved[attr] = getattr(primary, attr)
        else:
            raise IncompatibleForceFieldsError(
                f"bundles disagree on {attr}: "
                + ", ".join(f"{b.name}={getattr(b, attr)!r}" for b in bundles)
            )

    collisions: list[str] = []
    atoms: dict[str, PseudoAtom] = {}
    self_params: dict[str, LjParams] = {}
    overrides: dict[tuple[str, str], PairOverride] = {}
    molecules: dict[str, MoleculeDefinition] = {}
    for bundle in bundles:
        for atom in bundle.pseudo_atoms:
            if atom.name in atoms:
                if atoms[atom.name] != atom:
                    collisions.append(f"pseudo atom {atom.name}: ignored {bundle.name}")
            else:
                atoms[atom.name] = atom
        for type_name, params in bundle.self_params.items():
            if type_name in self_params:
                if self_params[type_name] != params:
                    collisions.append(f"self parameters {type_name}: ignored {bundle.name}")
            else:
                self_params[type_name] = params
        for ov in bundle.overrides:
            if ov.key in overrides:
                if overrides[ov.key].params != ov.params:
                    collisions.append(f"override {ov.key[0]}-{ov.key[1]}: ignored {bundle.name}")
            else:
                overrides[ov.key] = ov
        for mol_name, mol in bundle.molecules.items():
            if mol_name in molecules:
                if molecules[mol_name] != mol:
                    collisions.append(f"molecule {mol_name}: ignored {bundle.name}")
            else:
                molecules[mol_name] = mol
    for line in collisions:
        logger.info("force-field collision: %s", line)

    return ForceFieldBundle(
        name=name or "+".join(b.name for b in bundles),
        description="combined: " + ", ".join(b.name for b in bundles),
        pseudo_atoms=tuple(atoms.values()),
        self_params=self_params,
        overrides=tuple(overrides.values()),
        molecules=molecules,
        rule_overwrites=tuple(r for b in bundles for r in b.rule_overwrites),
        mixing_overwrites=tuple(r for b in bundles for r in b.mixing_overwrites),
        collisions=tuple(collisions),
        **resolved,
    )


# --------------------------------------------------------------------------
# rendering


def _f(value: float) -> str:
    return repr(float(value))


def render_pseudo_atoms(atoms: tuple[PseudoAtom, ...] | list[PseudoAtom]) -> str:
    out = ["#number of pseudo atoms", str(len(atoms))]
    out.append(
        "#type print as chem oxidation mass charge polarization B-factor radii "
        "connectivity anisotropic anisotropic-type tinker-type"
    )
    for a in atoms:
        out.append(
            " ".join(
                [
                    a.name,
                    "yes" if a.print_flag else "no",
                    a.element,
                    a.chem,
                    str(a.oxidation),
                    _f(a.mass),
                    _f(a.charge),
                    _f(a.polarization),
                    _f(a.b_factor),
                    _f(a.radius),
                    str(a.connectivity),
                    a.anisotropic_flag,
                    a.anisotropic_type,
                    a.tinker_type,
                ]
            )
        )
    return "\n".join(out) + "\n"


def render_mixing_rules(bundle: ForceFieldBundle) -> str:
    out = [
        "# general rule for shifted vs truncated",
        bundle.truncation_rule,
        "# general rule tailcorrections",
        "yes" if bundle.tail_corrections else "no",
        "# number of defined interactions",
        str(len(bundle.self_params)),
        "# type interaction, parameters: epsilon [K] sigma [A]",
    ]
    for type_name, p in bundle.self_params.items():
        out.append(f"{type_name} {LENNARD_JONES} {_f(p.epsilon)} {_f(p.sigma)}")
    out.append("# general mixing rule for Lennard-Jones")
    out.append(bundle.mixing_rule_name)
    return "\n".join(out) + "\n"


def render_force_field(bundle: ForceFieldBundle) -> str:
    out = ["# rules to overwrite", str(len(bundle.rule_overwrites)), *bundle.rule_overwrites]
    out.append("# number of defined interactions")
    out.append(str(len(bundle.overrides)))
    out.append("# type type2 interaction, parameters: epsilon [K] sigma [A]")
    for ov in bundle.overrides:
        out.append(
            f"{ov.type_a} {ov.type_b} {LENNARD_JONES} {_f(ov.params.epsilon)} {_f(ov.params.sigma)}"
        )
    out.append("# mixing rules to overwrite")
    out.append(str(len(bundle.mixing_overwrites)))
    out.extend(bundle.mixing_overwrites)
    return "\n".join(out) + "\n"


_INTRA_HEADER = (
    "# Chiral centers Bond BondDipoles Bend UrayBradley InvBend Torsion Imp.Torsion "
    "Bond/Bond Stretch/Bend Bend/Bend Stretch/Torsion Bend/Torsion IntraVDW IntraCoulomb"
)


def render_molecule(mol: MoleculeDefinition) -> str:
    out = [
        "# critical constants: Temperature [T], Pressure [Pa], and Acentric factor [-]",
        _f(mol.critical_temperature),
        _f(mol.critical_pressure),
        _f(mol.acentric_factor),
        "# Number Of Atoms",
        str(len(mol.atoms)),
        "# Number of groups",
        "1",
        f"# {mol.name}-group",
        "rigid" if mol.rigid else "flexible",
        "# number of atoms",
        str(len(mol.atoms)),
        "# atomic positions",
    ]
    for i, atom in enumerate(mol.atoms):
        x, y, z = atom.position
        out.append(f"{i} {atom.pseudo_atom} {_f(x)} {_f(y)} {_f(z)}")
    out.append(_INTRA_HEADER)
    counts = [0] * 15
    counts[1] = len(mol.bonds)
    out.append(" ".join(str(c) for c in counts))
    if mol.bonds:
        out.append("# Bond stretch: atom n1-n2, type, parameters")
        for i, j in mol.bonds:
            out.append(f"{i} {j} RIGID_BOND")
    out.append("# Number of config moves")
    out.append("0")
    return "\n".join(out) + "\n"


def render_bundle(bundle: ForceFieldBundle, destination: str | Path) -> list[Path]:
    dest = Path(destination)
    known = set(bundle.atom_types)
    for mol in bundle.molecules.values():
        for type_name in mol.atom_types:
            if type_name not in known:
                raise DanglingReferenceError(
                    f"molecule {mol.name} uses pseudo atom {type_name!r} not defined in bundle {bundle.name}"
                )
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for filename, text in (
        (PSEUDO_ATOMS_FILE, render_pseudo_atoms(bundle.pseudo_atoms)),
        (MIXING_RULES_FILE, render_mixing_rules(bundle)),
        (FORCE_FIELD_FILE, render_force_field(bundle)),
    ):
        path = dest / filename
        path.write_text(text)
        written.append(path)
    for mol_name, mol in bundle.molecules.items():
        path = dest / f"{mol_name}.def"
        path.write_text(render_molecule(mol))
        written.append(path)
    return written


def write_metadata(bundle: ForceFieldBundle, destination: str | Path, **extra) -> Path:
    doc = {"name": bundle.name, "description": bundle.description, **extra}
    path = Path(destination) / METADATA_FILE
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def load_bundle(folder: str | Path, name: str | None = None) -> ForceFieldBundle:
    """Read a folder of definition files back into a bundle.

    Every ``*.def`` besides the three force-field files is taken as a
    molecule definition named after its stem.
    """
    folder = Path(folder)
    meta = {}
    if (folder / METADATA_FILE).exists():
        meta = json.loads((folder / METADATA_FILE).read_text())
    atoms = parse_pseudo_atoms((folder / PSEUDO_ATOMS_FILE).read_text())
    ff_path = folder / FORCE_FIELD_FILE
    tables = parse_interaction_files(
        (folder / MIXING_RULES_FILE).read_text(),
        ff_path.read_text() if ff_path.exists() else None,
    )
    molecules = {}
    for path in sorted(folder.glob("*.def")):
        if path.name in FORCE_FIELD_FILES:
            continue
        molecules[path.stem] = parse_molecule(path.read_text(), path.stem)
    return ForceFieldBundle(
        name=name or meta.get("name", folder.name),
        description=meta.get("description", ""),
        pseudo_atoms=atoms,
        self_params=tables.self_params,
        truncation_rule=tables.truncation_rule,
        tail_corrections=tables.tail_corrections,
        mixing_rule_name=tables.mixing_rule_name,
        overrides=tables.overrides,
        molecules=molecules,
        rule_overwrites=tables.rule_overwrites,
        mixing_overwrites=tables.mixing_overwrites,
    )


def atoms_in_ff_file(path: str | Path) -> list[str]:
    """Types for which a single force-field file defines parameters."""
    path = Path(path)
    text = path.read_text()
    if path.name == PSEUDO_ATOMS_FILE:
        return [a.name for a in parse_pseudo_atoms(text)]
    if path.name == MIXING_RULES_FILE:
        return list(parse_interaction_files(text).self_params)
    if path.name == FORCE_FIELD_FILE:
        dummy_mixing = "shifted\nno\n0\nLorentz-Berthelot\n"
        tables = parse_interaction_files(dummy_mixing, text)
        seen: list[str] = []
        for ov in tables.overrides:
            for t in (ov.type_a, ov.type_b):
                if t not in seen:
                    seen.append(t)
        return seen
    raise ForceFieldFormatError(f"{path.name} is not a force-field file")


# --------------------------------------------------------------------------
# library


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    atom_types: tuple[str, ...]
    path: Path


@dataclass
class Catalog:
    entries: list[CatalogEntry]
    warnings: list[str]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def get(self, name: str) -> CatalogEntry | None:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


def library_catalog(library_root: str | Path) -> Catalog:
    """Scan a library of force-field folders.

    A folder is a force field when it holds ``metadata.json``; folders
    without one are searched one level deeper (e.g. ``extracted/<id>``) and
    reported as warnings if nothing is found.
    """
    root = Path(library_root)
    if not root.is_dir():
        raise OSError(f"force-field library {root} is not a readable directory")
    entries: list[CatalogEntry] = []
    warnings: list[str] = []

    def visit(folder: Path, prefix: str, depth: int) -> bool:
        rel = prefix + folder.name
        if (folder / METADATA_FILE).exists():
            try:
                meta = json.loads((folder / METADATA_FILE).read_text())
                atoms = parse_pseudo_atoms((folder / PSEUDO_ATOMS_FILE).read_text())
            except (OSError, ValueError) as exc:
                warnings.append(f"{rel}: {exc}")
                return False
            entries.append(
                CatalogEntry(
                    name=rel,
                    description=str(meta.get("description", "")),
                    atom_types=tuple(a.name for a in atoms),
                    path=folder,
                )
            )
            return True
        found = False
        if depth < 1:
            for child in sorted(p for p in folder.iterdir() if p.is_dir()):
                found = visit(child, rel + "/", depth + 1) or found
        if not found:
            warnings.append(f"{rel}: no {METADATA_FILE} descriptor")
        return found

    for child in sorted(p for p in root.iterdir() if p.is_dir()):
        visit(child, "", 0)
    return Catalog(entries=entries, warnings=warnings)


def with_name(bundle: ForceFieldBundle, name: str, description: str | None = None) -> ForceFieldBundle:
    return replace(bundle, name=name, description=bundle.description if description is None else description)
