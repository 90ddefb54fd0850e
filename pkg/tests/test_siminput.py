from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synthetic_structure
from generators import random_spec
from raspagent import chemio, siminput
from raspagent.errors import (
    PlanningError,
    SimulationInputParseError,
    StructuralError,
    UnboundPlaceholderError,
    UnknownAdsorbateError,
)
from raspagent.siminput import ComponentSpec, SimulationSpec
from raspagent.tasks import TaskRequest, log_pressure_grid

ISO = TaskRequest("isotherm", ("CH4",), pressures=(1e4, 1e5))
HOA = TaskRequest("heat-of-adsorption", ("CO2",))


def iso_template_spec():
    return SimulationSpec(
        framework_name="{FRAMEWORK}",
        unit_cells="{UNITCELLS}",
        temperature=298.0,
        pressure="{PRESSURE}",
        components=(ComponentSpec(0, "CH4", move_probabilities=dict(siminput.ISOTHERM_MOVES)),),
    )


def test_render_isotherm_template():
    text = siminput.render_simulation_input(iso_template_spec())
    assert "ExternalPressure {PRESSURE}" in text
    moves = [line.split()[0] for line in text.splitlines() if line.strip().endswith(("0.5", "1.0")) and "Probability" in line]
    assert moves == ["TranslationProbability", "ReinsertionProbability", "SwapProbability"]


def test_render_keyword_order():
    text = siminput.render_simulation_input(iso_template_spec())
    keywords = [line.split()[0] for line in text.splitlines() if line.strip()]
    expected = [
        "SimulationType", "NumberOfCycles", "NumberOfInitializationCycles", "PrintEvery", "Forcefield", "CutOff",
        "ChargeMethod", "Framework", "FrameworkName", "UnitCells", "ExternalTemperature", "ExternalPressure", "Component",
        "MoleculeDefinition", "TranslationProbability", "ReinsertionProbability", "SwapProbability", "CreateNumberOfMolecules",
    ]
    assert keywords == expected


def test_render_hoa_widom_without_pressure():
    spec = SimulationSpec(
        framework_name="MFI_SI", unit_cells=(2, 2, 3), temperature=298.0,
        components=(ComponentSpec(0, "CO2", move_probabilities={"widom": 1.0}),),
    )
    text = siminput.render_simulation_input(spec)
    assert "WidomProbability 1.0" in text
    assert "ExternalPressure" not in text


def test_render_zero_components():
    text = siminput.render_simulation_input(SimulationSpec(framework_name="MFI_SI", unit_cells=(1, 1, 1)))
    assert "Component" not in text
    assert "FrameworkName MFI_SI" in text


def test_index_gap_is_structural_error():
    text = siminput.render_simulation_input(
        SimulationSpec(components=(ComponentSpec(0, "A", move_probabilities={"widom": 1}), ComponentSpec(1, "B")))
    ).replace("Component 1", "Component 2")
    with pytest.raises(StructuralError):
        siminput.parse_simulation_input(text)


def test_non_numeric_value_reports_line():
    text = siminput.render_simulation_input(iso_template_spec()).replace("NumberOfCycles 10000", "NumberOfCycles many")
    with pytest.raises(SimulationInputParseError, match="line 2"):
        siminput.parse_simulation_input(text)


def test_unknown_keyword_kept():
    text = siminput.render_simulation_input(iso_template_spec()) + "Movies yes\n"
    spec = siminput.parse_simulation_input(text)
    assert ("Movies", "yes") in spec.extras
    assert "Movies yes" in siminput.render_simulation_input(spec)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_render_parse_round_trip(seed):
    spec = random_spec(random.Random(seed))
    text = siminput.render_simulation_input(spec)
    assert siminput.parse_simulation_input(text) == spec
    assert siminput.render_simulation_input(siminput.parse_simulation_input(text)) == text


def test_examples_catalog(config, tmp_path):
    catalog = siminput.example_inputs_catalog(config.examples_root)
    assert len(catalog) == 5
    assert all(e.description for e in catalog)
    iso = next(e for e in catalog if e.name == "isotherm_methane_mfi")
    spec = siminput.parse_simulation_input(iso.text)
    assert spec.framework_name == "MFI_SI"
    assert spec.components[0].active_moves.get("swap", 0) > 0
    assert siminput.example_inputs_catalog(tmp_path) == []
    with pytest.raises(OSError):
        siminput.example_inputs_catalog(tmp_path / "missing")


def test_plan_batch_isotherm_law(zeolite_bundle, synthetic_structures):
    task = TaskRequest("isotherm", ("CH4", "CO2", "CO"), pressures=(1e3, 1e4))
    structures = synthetic_structures[:20]
    plans = siminput.plan_batch(task, structures, bundle=zeolite_bundle)
    assert len(plans) == 60
    assert len({p.folder for p in plans}) == 60
    for plan in plans:
        assert len(plan.spec.components) == 1
        assert len(plan.framework_files) == 1
        assert plan.spec.components[0].active_moves.get("swap", 0) > 0
        assert plan.spec.pressure == (1e3, 1e4)
        assert not plan.spec.placeholders()
        molecule_files = [f.filename for f in plan.files if f.role == siminput.ROLE_MOLECULE]
        assert molecule_files == [f"{plan.spec.components[0].molecule_name}.def"]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.integers(0, 2**32))
def test_batch_size_law(zeolite_bundle, n_structures, n_adsorbates, seed):
    rng = random.Random(seed)
    structures = [synthetic_structure(rng, f"P{i}") for i in range(n_structures)]
    adsorbates = ("CH4", "CO2", "CO")[:n_adsorbates]
    task = TaskRequest(rng.choice(["isotherm", "heat-of-adsorption"]), adsorbates, pressures=(1e5,))
    plans = siminput.plan_batch(task, structures, bundle=zeolite_bundle, cutoff=rng.uniform(6, 20))
    assert len(plans) == n_structures * n_adsorbates
    by_name = {s.name: s for s in structures}
    for plan in plans:
        assert len(plan.framework_files) == 1
        widths = chemio.perpendicular_widths(by_name[plan.spec.framework_name].lattice)
        assert all(n * h >= 2 * plan.spec.cutoff for n, h in zip(plan.spec.unit_cells, widths))


def test_plan_batch_hoa_widom_only(zeolite_bundle, mfi):
    (plan,) = siminput.plan_batch(HOA, [mfi], bundle=zeolite_bundle)
    assert plan.spec.components[0].active_moves == {"widom": 1.0}
    assert plan.spec.pressure is None
    assert plan.spec.components[0].create_count == 0


def test_plan_batch_mixture_single_plan(zeolite_bundle, mfi):
    task = TaskRequest("mixture-isotherm", ("CH4", "CO2"), pressures=(1e5,))
    (plan,) = siminput.plan_batch(task, [mfi], bundle=zeolite_bundle)
    assert plan.spec.molecule_names == ["CH4", "CO2"]


def test_plan_batch_errors(zeolite_bundle, mfi):
    with pytest.raises(PlanningError):
        siminput.plan_batch(ISO, [mfi], adsorbates=[], bundle=zeolite_bundle)
    with pytest.raises(PlanningError):
        siminput.plan_batch(ISO, [], bundle=zeolite_bundle)
    with pytest.raises(UnknownAdsorbateError):
        siminput.plan_batch(ISO, [mfi], adsorbates=["Xe"], bundle=zeolite_bundle)


def test_plan_batch_unknown_kind(zeolite_bundle, mfi):
    bogus = object.__new__(TaskRequest)
    object.__setattr__(bogus, "kind", "breakthrough")
    with pytest.raises(PlanningError):
        siminput.plan_batch(bogus, [mfi], bundle=zeolite_bundle)


def template():
    files = (siminput.RequiredFile(siminput.ROLE_FRAMEWORK, "{FRAMEWORK}.cif", "/structures/{FRAMEWORK}.cif"),)
    spec = replace(iso_template_spec(), pressure=(1e5,))
    return siminput.TemplateFolder(spec=spec, files=files)


def test_instantiate_template():
    plan = siminput.instantiate_template(template(), {"FRAMEWORK": "MFI_SI", "{UNITCELLS}": (2, 2, 3)})
    assert plan.spec.framework_name == "MFI_SI"
    assert plan.spec.unit_cells == (2, 2, 3)
    assert plan.files[0].filename == "MFI_SI.cif"
    assert plan.files[0].source == "/structures/MFI_SI.cif"
    assert plan.folder == "MFI_SI_CH4_0"


def test_instantiate_missing_binding():
    with pytest.raises(UnboundPlaceholderError, match="UNITCELLS"):
        siminput.instantiate_template(template(), {"FRAMEWORK": "MFI_SI"})


def test_instantiate_extra_binding_is_not_error(caplog):
    plan = siminput.instantiate_template(template(), {"FRAMEWORK": "A", "UNITCELLS": (1, 1, 1), "TEMPERATURE": 300})
    assert plan.spec.framework_name == "A"
    assert "unused" in caplog.text


def test_instantiate_500_distinct():
    plans = [siminput.instantiate_template(template(), {"FRAMEWORK": f"S{i:03d}", "UNITCELLS": (1, 2, 3)}) for i in range(500)]
    assert len({p.folder for p in plans}) == 500


def test_materialize_and_load_template(tmp_path, zeolite_bundle, mfi, config):
    (plan,) = siminput.plan_batch(ISO, [mfi], bundle=zeolite_bundle)
    folder = siminput.materialize_plan(plan, tmp_path, zeolite_bundle, {mfi.name: mfi})
    assert sorted(p.name for p in folder.iterdir()) == sorted(
        ["simulation.input", "MFI_SI.cif", "CH4.def", "pseudo_atoms.def", "force_field_mixing_rules.def", "force_field.def"]
    )
    assert siminput.read_simulation_input(folder / "simulation.input") == plan.spec
    loaded = siminput.load_template(folder, config.structures_root)
    assert loaded.files[0].role == siminput.ROLE_FRAMEWORK


def test_log_pressure_grid():
    assert log_pressure_grid(1e3, 1e5, 3) == (1000.0, 10000.0, 100000.0)
