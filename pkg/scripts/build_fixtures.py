"""Regenerate the bundled fixture data under src/raspagent/data.

Run from the repository root: ``python scripts/build_fixtures.py``.
The structures are synthetic (deterministic placeholder coordinates on the
published cell parameters); the force fields carry literature-style values.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import yaml

from raspagent import chemio, forcefield
from raspagent.chemio import AtomSite, CrystalStructure, LatticeParameters
from raspagent.evalbench.params import bundle_parameter_set
from raspagent.evalbench.scenarios import combined_script, research_script, save_script, setup_script
from raspagent.tasks import TaskRequest
from raspagent.forcefield import ForceFieldBundle, LjParams, MoleculeAtom, MoleculeDefinition, PairOverride, PseudoAtom

DATA = Path(__file__).resolve().parent.parent / "src" / "raspagent" / "data"


# -- structures -------------------------------------------------------------

def silica_framework(name: str, lattice: LatticeParameters, grid: tuple[int, int, int]) -> CrystalStructure:
    """n Si on a shifted grid, two O per Si halfway to the next Si along a and b."""
    na, nb, nc = grid
    sites = []
    k = 0
    for i in range(na):
        for j in range(nb):
            for l in range(nc):
                x, y, z = (i + 0.25) / na, (j + 0.25) / nb, (l + 0.25) / nc
                k += 1
                sites.append(AtomSite(f"Si{k}", "Si", round(x, 6), round(y, 6), round(z, 6)))
                sites.append(AtomSite(f"O{2 * k - 1}", "O", round(x + 0.5 / na, 6), round(y, 6), round(z, 6)))
                sites.append(AtomSite(f"O{2 * k}", "O", round(x, 6), round(y + 0.5 / nb, 6), round(z, 6)))
    si = [s for s in sites if s.type_symbol == "Si"]
    o = [s for s in sites if s.type_symbol == "O"]
    return CrystalStructure(name, lattice, tuple(si + o))


STRUCTURES = [
    silica_framework("MFI_SI", LatticeParameters(20.09, 19.738, 13.142, 90, 90, 90), (4, 4, 6)),
    silica_framework("LTA_SI", LatticeParameters(11.867, 11.867, 11.867, 90, 90, 90), (2, 2, 6)),
    silica_framework("CHA_SI", LatticeParameters(13.675, 13.675, 14.767, 90, 90, 120), (3, 3, 4)),
    silica_framework("TRI_SI", LatticeParameters(9.3, 10.1, 11.4, 82.5, 97.0, 101.3), (2, 2, 3)),
]


# -- force fields -----------------------------------------------------------

SI = dict(name="Si", element="Si", mass=28.0855, oxidation=4, radius=1.18)
O = dict(name="O", element="O", mass=15.9994, oxidation=-2, radius=0.68)

CO2 = MoleculeDefinition(
    "CO2", 304.1282, 7377300.0, 0.22394,
    (MoleculeAtom("O_co2", (0.0, 0.0, 1.149)), MoleculeAtom("C_co2", (0.0, 0.0, 0.0)), MoleculeAtom("O_co2", (0.0, 0.0, -1.149))),
    bonds=((0, 1), (1, 2)),
)
CH4 = MoleculeDefinition("CH4", 190.564, 4599200.0, 0.01142, (MoleculeAtom("CH4", (0.0, 0.0, 0.0)),))
CO = MoleculeDefinition(
    "CO", 132.85, 3494000.0, 0.045,
    (MoleculeAtom("C_co", (0.0, 0.0, 0.0)), MoleculeAtom("O_co", (0.0, 0.0, 1.128))),
    bonds=((0, 1),),
)


def co2_atoms(q_c: float) -> tuple[PseudoAtom, PseudoAtom]:
    return (
        PseudoAtom("C_co2", "C", 12.0107, charge=q_c, radius=0.72),
        PseudoAtom("O_co2", "O", 15.9994, charge=-q_c / 2, radius=0.68),
    )


LIBRARY = [
    ForceFieldBundle(
        name="zeolite_framework",
        description="All-silica zeolite framework atoms (Si, O) with Lennard-Jones sites on both",
        pseudo_atoms=(PseudoAtom(charge=1.5, **SI), PseudoAtom(charge=-0.75, **O)),
        self_params={"Si": LjParams(22.0, 2.3), "O": LjParams(53.0, 3.3)},
        tail_corrections=True,
    ),
    ForceFieldBundle(
        name="trappe_adsorbates",
        description="Small adsorbates: united-atom CH4, three-site CO2 and two-site CO",
        pseudo_atoms=(
            PseudoAtom("CH4", "C", 16.04246, radius=1.0),
            *co2_atoms(0.7),
            PseudoAtom("C_co", "C", 12.0107, charge=-0.2424, radius=0.72),
            PseudoAtom("O_co", "O", 15.9994, charge=0.2424, radius=0.68),
        ),
        self_params={
            "CH4": LjParams(148.0, 3.73),
            "C_co2": LjParams(27.0, 2.8),
            "O_co2": LjParams(79.0, 3.05),
            "C_co": LjParams(16.141, 3.28),
            "O_co": LjParams(49.5, 3.03),
        },
        tail_corrections=True,
        molecules={"CH4": CH4, "CO2": CO2, "CO": CO},
    ),
    ForceFieldBundle(
        name="co2_in_zeolite",
        description="CO2 adsorption in all-silica zeolites; explicit framework-CO2 cross terms, charges on Si and O",
        pseudo_atoms=(PseudoAtom(charge=0.78598, **SI), PseudoAtom(charge=-0.39299, **O), *co2_atoms(0.6512)),
        self_params={"C_co2": LjParams(29.933, 2.745), "O_co2": LjParams(85.671, 3.017)},
        overrides=(
            PairOverride("O", "O_co2", LjParams(78.98, 3.017)),
            PairOverride("O", "C_co2", LjParams(37.595, 3.511)),
        ),
        molecules={"CO2": CO2},
    ),
    ForceFieldBundle(
        name="methane_in_zeolite",
        description="Methane in all-silica zeolites; united-atom CH4 with an explicit O-CH4 interaction",
        pseudo_atoms=(PseudoAtom(**SI), PseudoAtom(**O), PseudoAtom("CH4", "C", 16.04246, radius=1.0)),
        self_params={"CH4": LjParams(158.5, 3.72)},
        overrides=(PairOverride("O", "CH4", LjParams(115.0, 3.47)),),
        molecules={"CH4": CH4},
    ),
]


# -- literature corpus ------------------------------------------------------

GARCIA = ForceFieldBundle(
    name="garcia2009",
    description="CO2 in zeolites, extracted from the transferable force field fixture paper",
    pseudo_atoms=(PseudoAtom(charge=0.78598, **SI), PseudoAtom(charge=-0.39299, **O), *co2_atoms(0.6512)),
    self_params={"C_co2": LjParams(29.933, 2.745), "O_co2": LjParams(85.671, 3.017)},
    overrides=(
        PairOverride("O", "O_co2", LjParams(78.98, 3.017)),
        PairOverride("O", "C_co2", LjParams(37.595, 3.511)),
    ),
    molecules={"CO2": CO2},
)

EPM2 = ForceFieldBundle(
    name="epm2_1995",
    description="Elementary physical model of CO2",
    pseudo_atoms=co2_atoms(0.6512),
    self_params={"C_co2": LjParams(28.129, 2.757), "O_co2": LjParams(80.507, 3.033)},
    overrides=(PairOverride("C_co2", "O_co2", LjParams(47.588, 2.892)),),
    molecules={"CO2": CO2},
)

TRAPPEZEO = ForceFieldBundle(
    name="trappezeo_2013",
    description="All-silica zeolite framework with CO2 taken from the cited carbon dioxide model",
    pseudo_atoms=(PseudoAtom(charge=1.5, **SI), PseudoAtom(charge=-0.75, **O), *co2_atoms(0.6512)),
    self_params={
        "Si": LjParams(22.0, 2.3),
        "O": LjParams(53.0, 3.3),
        "C_co2": LjParams(28.129, 2.757),
        "O_co2": LjParams(80.507, 3.033),
    },
    overrides=(PairOverride("C_co2", "O_co2", LjParams(47.588, 2.892)),),
    molecules={"CO2": CO2},
)

PAPERS = {
    "garcia2009": {
        "doi": "10.5555/fixture.garcia.2009",
        "title": "A transferable force field for CO2 adsorption in all-silica zeolites",
        "abstract": "We fit Lennard-Jones cross interactions between carbon dioxide and framework oxygen "
                    "to experimental isotherms and show that the parameters transfer between topologies.",
        "bundle": GARCIA,
        "body": """# Introduction
Carbon dioxide capture in porous silica is governed by dispersion and electrostatics.
Earlier models disagree on the framework-adsorbate cross terms.

# Methods
Simulations used a cutoff of 12 A with Ewald summation. Framework atoms are rigid.
The CO2 molecule is rigid and linear with a C-O bond length of 1.149 A.

# Force field parameters
Partial charges: Si +0.78598 e, O -0.39299 e, C_co2 +0.6512 e, O_co2 -0.3256 e.

| site | epsilon/kB (K) | sigma (A) |
|---|---|---|
| C_co2 | 29.933 | 2.745 |
| O_co2 | 85.671 | 3.017 |

Cross interactions with the framework (all others are zero):

| pair | epsilon/kB (K) | sigma (A) |
|---|---|---|
| O-O_co2 | 78.98 | 3.017 |
| O-C_co2 | 37.595 | 3.511 |

# Results
The fitted model reproduces adsorption isotherms in MFI, DDR and FAU within experimental error.
""",
    },
    "epm2_1995": {
        "doi": "10.5555/fixture.epm2.1995",
        "title": "Carbon dioxide liquid-vapor coexistence curve and critical properties from a simple intermolecular potential",
        "abstract": "An elementary physical model with three Lennard-Jones sites and point charges "
                    "reproduces the vapor-liquid coexistence of CO2.",
        "bundle": EPM2,
        "body": """# Introduction
Simple rigid models of carbon dioxide are useful for phase equilibria.

# Model
The molecule is rigid and linear; the C-O bond length is 1.149 A.
Parameters are listed with one column per interaction; cross terms are given explicitly.

| | C-C | O-O | C-O |
|---|---|---|---|
| epsilon/kB (K) | 28.129 | 80.507 | 47.588 |
| sigma (A) | 2.757 | 3.033 | 2.892 |

Charges: q_C = +0.6512 e and q_O = -0.3256 e.

# Results
The model gives the critical temperature within one percent.
""",
    },
    "trappezeo_2013": {
        "doi": "10.5555/fixture.trappezeo.2013",
        "title": "TraPPE-zeo: transferable potentials for phase equilibria force field for all-silica zeolites",
        "abstract": "Lennard-Jones and charge parameters for framework Si and O are fitted for adsorption "
                    "of small molecules in zeolites; the adsorbate models are taken from earlier work.",
        "bundle": TRAPPEZEO,
        "body": """# Introduction
Adsorbate-framework interactions in zeolites are usually obtained by mixing rules.

# Force field
Framework parameters: Si epsilon/kB = 22.0 K, sigma = 2.30 A, q = +1.50 e;
O epsilon/kB = 53.0 K, sigma = 3.30 A, q = -0.75 e.
Lorentz-Berthelot combining rules apply to all unlike pairs.
Carbon dioxide is described by the elementary physical model (EPM2) of the earlier coexistence study.

# Validation
Isotherms for CO2 in MFI agree with experiment.
""",
    },
}


# -- example inputs ---------------------------------------------------------

EXAMPLES = {
    "isotherm_methane_mfi": """# Adsorption isotherm (GCMC) of methane in MFI at several pressures
SimulationType MonteCarlo
NumberOfCycles 10000
NumberOfInitializationCycles 2000
PrintEvery 1000
Forcefield Local
CutOffVDW 12.0
ChargeMethod None

Framework 0
FrameworkName MFI_SI
UnitCells 2 2 2
ExternalTemperature 298.0
ExternalPressure 10000.0 100000.0

Component 0 MoleculeName CH4
    MoleculeDefinition Local
    TranslationProbability 0.5
    ReinsertionProbability 0.5
    SwapProbability 1.0
    CreateNumberOfMolecules 0
""",
    "widom_co2_lta": """# Heat of adsorption of CO2 in LTA from Widom test-particle insertions (no pressure, no swap)
SimulationType MonteCarlo
NumberOfCycles 20000
NumberOfInitializationCycles 0
PrintEvery 1000
Forcefield Local
CutOffVDW 12.0
ChargeMethod Ewald

Framework 0
FrameworkName LTA_SI
UnitCells 3 3 3
ExternalTemperature 300.0

Component 0 MoleculeName CO2
    MoleculeDefinition Local
    WidomProbability 1.0
    CreateNumberOfMolecules 0
""",
    "mixture_co2_ch4_mfi": """# Binary mixture isotherm of CO2 and CH4 in MFI with identity-change moves
SimulationType MonteCarlo
NumberOfCycles 20000
NumberOfInitializationCycles 5000
PrintEvery 1000
Forcefield Local
CutOffVDW 12.0
ChargeMethod Ewald

Framework 0
FrameworkName MFI_SI
UnitCells 2 2 2
ExternalTemperature 298.0
ExternalPressure 100000.0

Component 0 MoleculeName CO2
    MoleculeDefinition Local
    TranslationProbability 0.5
    RotationProbability 0.5
    ReinsertionProbability 0.5
    SwapProbability 1.0
    IdentityChangeProbability 1.0
    CreateNumberOfMolecules 0

Component 1 MoleculeName CH4
    MoleculeDefinition Local
    TranslationProbability 0.5
    ReinsertionProbability 0.5
    SwapProbability 1.0
    IdentityChangeProbability 1.0
    CreateNumberOfMolecules 0
""",
    "isotherm_co2_cha": """# Adsorption isotherm of CO2 in a hexagonal cell (CHA) with Ewald charges
SimulationType MonteCarlo
NumberOfCycles 10000
NumberOfInitializationCycles 2000
PrintEvery 1000
Forcefield Local
CutOffVDW 12.0
ChargeMethod Ewald

Framework 0
FrameworkName CHA_SI
UnitCells 2 2 2
ExternalTemperature 298.0
ExternalPressure 1000.0 10000.0 100000.0

Component 0 MoleculeName CO2
    MoleculeDefinition Local
    TranslationProbability 0.5
    RotationProbability 0.5
    ReinsertionProbability 0.5
    SwapProbability 1.0
    CreateNumberOfMolecules 0
""",
    "nvt_methane_mfi": """# Fixed loading (NVT) run: 20 methane molecules in MFI, no insertions
SimulationType MonteCarlo
NumberOfCycles 10000
NumberOfInitializationCycles 1000
PrintEvery 1000
Forcefield Local
CutOffVDW 12.0
ChargeMethod None

Framework 0
FrameworkName MFI_SI
UnitCells 2 2 2
ExternalTemperature 298.0

Component 0 MoleculeName CH4
    MoleculeDefinition Local
    TranslationProbability 1.0
    ReinsertionProbability 1.0
    CreateNumberOfMolecules 20
""",
}


# -- dummy scaffold -----------------------------------------------------------

DUMMY = {
    "pseudo_atoms.def": """#number of pseudo atoms
2
#type print as chem oxidation mass charge polarization B-factor radii connectivity anisotropic anisotropic-type tinker-type
A yes C C 0 12.0 0.0 0.0 1.0 1.0 0 0 absolute 0
B yes O O 0 16.0 0.0 0.0 1.0 1.0 0 0 absolute 0
""",
    "force_field_mixing_rules.def": """# general rule for shifted vs truncated
shifted
# general rule tailcorrections
no
# number of defined interactions
2
# type interaction, parameters: epsilon [K] sigma [A]
A lennard-jones 10.0 3.0
B lennard-jones 20.0 3.2
# general mixing rule for Lennard-Jones
Lorentz-Berthelot
""",
    "force_field.def": """# rules to overwrite
0
# number of defined interactions
1
# type type2 interaction, parameters: epsilon [K] sigma [A]
A B lennard-jones 15.0 3.1
# mixing rules to overwrite
0
""",
    "molecule.def": """# critical constants: Temperature [T], Pressure [Pa], and Acentric factor [-]
300.0
5000000.0
0.2
# Number Of Atoms
2
# Number of groups
1
# molecule-group
rigid
# number of atoms
2
# atomic positions
0 A 0.0 0.0 0.0
1 B 0.0 0.0 1.2
# Chiral centers Bond BondDipoles Bend UrayBradley InvBend Torsion Imp.Torsion Bond/Bond Stretch/Bend Bend/Bend Stretch/Torsion Bend/Torsion IntraVDW IntraCoulomb
0 1 0 0 0 0 0 0 0 0 0 0 0 0 0
# Bond stretch: atom n1-n2, type, parameters
0 1 RIGID_BOND
# Number of config moves
0
""",
}


# -- requests, replay scripts and benchmark suites ------------------------------

PRESSURES = [1000.0, 10000.0, 100000.0]
ADS3 = ["CH4", "CO2", "CO"]
REQUESTS = {
    "isotherm_1x1": {"kind": "isotherm", "adsorbates": ["CH4"], "structures": ["MFI_SI"], "pressures": PRESSURES},
    "isotherm_1x3": {"kind": "isotherm", "adsorbates": ADS3, "structures": ["MFI_SI"], "pressures": PRESSURES},
    "hoa_allx1": {"kind": "heat-of-adsorption", "adsorbates": ["CO2"], "structure_glob": "*"},
    "hoa_allx3": {"kind": "heat-of-adsorption", "adsorbates": ADS3, "structure_glob": "*"},
    "isotherm_allx1": {"kind": "isotherm", "adsorbates": ["CH4"], "structure_glob": "*", "pressures": PRESSURES},
    "isotherm_allx3": {"kind": "isotherm", "adsorbates": ADS3, "structure_glob": "*", "pressures": PRESSURES},
    "combined_co2_mfi": {"kind": "isotherm", "adsorbates": ["CO2"], "structures": ["MFI_SI"], "pressures": PRESSURES,
                         "forcefield": "doi:10.5555/fixture.garcia.2009"},
}
LIBRARY_FFS = ["zeolite_framework", "trappe_adsorbates"]
# one seeded failure per row, in the last repetition
SEEDED = {"hoa_allx1": "no-moves", "hoa_allx3": "no-cif", "isotherm_allx3": "mixture-unnoticed"}


def write_replays_and_suites():
    for sub in ("requests", "replays", "suites"):
        shutil.rmtree(DATA / sub, ignore_errors=True)
        (DATA / sub).mkdir(parents=True)
    for name, doc in REQUESTS.items():
        (DATA / "requests" / f"{name}.yaml").write_text(yaml.safe_dump(doc, sort_keys=False))
    setup_entries, seeded_entries = [], []
    for name, doc in REQUESTS.items():
        request = TaskRequest.from_dict(doc)
        if name.startswith("combined"):
            save_script(combined_script(request, "garcia2009"), DATA / "replays" / f"{name}.jsonl")
            save_script(combined_script(request, "garcia2009", research_fails=True), DATA / "replays" / f"{name}_research_fails.jsonl")
            continue
        save_script(setup_script(request, LIBRARY_FFS), DATA / "replays" / f"setup_{name}.jsonl")
        entry = {"label": name, "request": f"../requests/{name}.yaml", "replay": f"../replays/setup_{name}.jsonl"}
        setup_entries.append(entry)
        if name in SEEDED:
            fault = SEEDED[name]
            save_script(setup_script(request, LIBRARY_FFS, fault=fault), DATA / "replays" / f"setup_{name}_{fault}.jsonl")
            reps = [f"../replays/setup_{name}.jsonl"] * 4 + [f"../replays/setup_{name}_{fault}.jsonl"]
            seeded_entries.append({"label": name, "request": f"../requests/{name}.yaml", "replays": reps})
        else:
            seeded_entries.append(entry)
    save_script(setup_script(TaskRequest.from_dict(REQUESTS["isotherm_1x3"]), LIBRARY_FFS, fault="mixture"),
                DATA / "replays" / "setup_isotherm_1x3_mixture_revised.jsonl")
    research_entries = []
    for label, pid, kw in (
        ("CO2 [garcia2009]", "garcia2009", {}),
        ("CO2 [epm2_1995]", "epm2_1995", {}),
        ("CO2 [epm2_1995, misread]", "epm2_1995", {"swap_sigmas": True}),
        ("TraPPE-zeo + CO2", "trappezeo_2013", {}),
    ):
        suffix = "_misread" if kw else ""
        save_script(research_script(pid, **kw), DATA / "replays" / f"research_{pid}{suffix}.jsonl")
        research_entries.append({
            "label": label, "target": pid, "reference": f"../corpus/{pid}/reference.json",
            "replay": f"../replays/research_{pid}{suffix}.jsonl",
        })
    for name, setup in (("clean", setup_entries), ("seeded", seeded_entries)):
        suite = {"name": name, "setup": setup, "research": research_entries}
        (DATA / "suites" / f"{name}.yaml").write_text(yaml.safe_dump(suite, sort_keys=False))


def main():
    for sub in ("structures", "library", "examples", "corpus", "dummy_ff"):
        shutil.rmtree(DATA / sub, ignore_errors=True)
        (DATA / sub).mkdir(parents=True)
    for s in STRUCTURES:
        chemio.write_cif(s, DATA / "structures" / f"{s.name}.cif")
    for b in LIBRARY:
        forcefield.render_bundle(b, DATA / "library" / b.name)
        forcefield.write_metadata(b, DATA / "library" / b.name)
    for pid, paper in PAPERS.items():
        folder = DATA / "corpus" / pid
        folder.mkdir()
        meta = {"id": pid, "doi": paper["doi"], "title": paper["title"], "abstract": paper["abstract"]}
        (folder / "meta").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (folder / "body").write_text(paper["body"])
        bundle_parameter_set(paper["bundle"]).dump(folder / "reference.json")
    for name, text in EXAMPLES.items():
        (DATA / "examples" / f"{name}.input").write_text(text)
    for name, text in DUMMY.items():
        (DATA / "dummy_ff" / name).write_text(text)
    write_replays_and_suites()


if __name__ == "__main__":
    main()
