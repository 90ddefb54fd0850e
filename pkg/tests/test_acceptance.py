"""One test per acceptance criterion. Each prints a PASS/FAIL line and checks its runtime budget."""

from __future__ import annotations

import contextlib
import hashlib
import math
import random
import time
from fractions import Fraction

import pytest

import conftest
from generators import random_bundle, random_molecule, random_spec, random_structure
from raspagent import chemio, forcefield, siminput, simlint
from raspagent.agentcore import FINAL_ANSWER, PROVIDER_ERROR, STEP_LIMIT, AgentConfig, ReplayProvider, ToolRegistry, check_transcript, param, run_react, tool
from raspagent.crews import run_combined
from raspagent.evalbench import ParameterSet, ParameterSlot, batch_rates_exact, score_parameters
from raspagent.evalbench.scenarios import FAULT_CONSEQUENCES, combined_script, seed_fault
from raspagent.simlint import OutcomeLabel
from raspagent.tasks import TaskRequest


@contextlib.contextmanager
def criterion(number: int, title: str, budget_s: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        ok = ok and elapsed < budget_s
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({elapsed:.2f}s, budget {budget_s:g}s)"
        conftest.ACCEPTANCE_LINES.append(line)
        print(line)
    assert elapsed < budget_s, line


# --------------------------------------------------------------------------
# 1. parameter scoring


def test_criterion_1_parameter_scores(config):
    with criterion(1, "9-slot fixture with 3 misread values scores 0/3/0.667; clean fixtures 0/0/1.00", 1.0):
        reference = ParameterSet.load(config.corpus_root / "epm2_1995" / "reference.json")
        assert len(reference) == 9
        # sigma column read one row out of step: three sigma slots carry a neighbour's value
        sigma_ids = sorted(i for i in reference.identities() if i[1] == "sigma")
        assert len(sigma_ids) == 3
        shifted = [reference[i].value for i in sigma_ids[1:] + sigma_ids[:1]]
        misread = ParameterSet(reference)
        for identity, value in zip(sigma_ids, shifted):
            misread.put(ParameterSlot(identity[0], "sigma", value, "A"))
        report = score_parameters(misread, reference)
        assert (report.missed, report.wrong) == (0, 3)
        assert report.iou == pytest.approx(0.667, abs=0.001)
        for paper in ("garcia2009", "epm2_1995", "trappezeo_2013"):
            ref = ParameterSet.load(config.corpus_root / paper / "reference.json")
            clean = score_parameters(ParameterSet(ref), ref)
            assert (clean.missed, clean.wrong, clean.iou) == (0, 0, 1.0)


# --------------------------------------------------------------------------
# 2. batch rates


def test_criterion_2_batch_rate_rows():
    with criterion(2, "batch rates reproduce 100/100, 80/100 and 80/80 exactly", 1.0):
        good = OutcomeLabel(True, True)
        misconfigured = OutcomeLabel(False, True)
        broken = OutcomeLabel(False, False)
        rows = {
            (Fraction(1), Fraction(1)): [good] * 5,
            (Fraction(4, 5), Fraction(1)): [good] * 4 + [misconfigured],
            (Fraction(4, 5), Fraction(4, 5)): [good] * 4 + [broken],
        }
        for expected, outcomes in rows.items():
            rates = batch_rates_exact(outcomes)
            assert rates == expected
            assert all(isinstance(r, Fraction) for r in rates)
        assert [tuple(round(100 * r) for r in batch_rates_exact(v)) for v in rows.values()] == [(100, 100), (80, 100), (80, 80)]


# --------------------------------------------------------------------------
# 3. failure catalogue


def test_criterion_3_failure_catalogue(tmp_path):
    with criterion(3, f"{len(simlint.FAILURE_MODES)} seeded failure modes flagged with mapped rule and consequence", 5.0):
        assert len(simlint.FAILURE_MODES) >= 6
        assert set(FAULT_CONSEQUENCES) == set(simlint.FAILURE_MODES)
        for mode, rules in simlint.FAILURE_MODES.items():
            fault = seed_fault(mode, tmp_path)
            findings = simlint.validate_folder(fault.folder, fault.task)
            flagged = {f.rule for f in findings}
            assert set(rules) <= flagged, (mode, flagged)
            assert simlint.classify_outcome(findings) == OutcomeLabel(*FAULT_CONSEQUENCES[mode]), mode
        assert FAULT_CONSEQUENCES["framework CIF files not copied"] == (False, False)
        assert FAULT_CONSEQUENCES["adsorbate defined without any moves"] == (False, True)


# --------------------------------------------------------------------------
# 4. end-to-end combined replay


def tree_digest(root) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_criterion_4_combined_replay(config, tmp_path):
    with criterion(4, "combined replay: paper to bundle to isotherm folder, lint clean, byte-identical x5", 30.0):
        request = TaskRequest("isotherm", ("CO2",), structures=("MFI_SI",), pressures=(1e4, 1e5),
                              forcefield="doi:10.5555/fixture.garcia.2009")
        script = combined_script(request, "garcia2009", config)
        digests = []
        for rep in range(5):
            workspace = tmp_path / f"rep{rep}"
            outcome = run_combined(request, config, ReplayProvider(script), workspace)
            assert outcome.success, outcome.feedback
            assert outcome.setup.lint_errors == 0
            assert [p.name for p in outcome.setup.folders] == ["MFI_SI_CO2_0"]
            (workspace / "memory.jsonl").write_text(outcome.memory.to_jsonl())
            (workspace / "transcripts.jsonl").write_text("".join(o.to_jsonl() for o in outcome.all_transcripts()))
            digests.append(tree_digest(workspace))
        assert "setup/MFI_SI_CO2_0/simulation.input" in digests[0]
        assert all(d == digests[0] for d in digests)


# --------------------------------------------------------------------------
# 5. batch law at scale


def test_criterion_5_batch_law(config, zeolite_bundle, synthetic_structures):
    with criterion(5, "500 structures x 3 adsorbates give 1500 lint-clean plans with n*h >= 24 A", 60.0):
        assert len(synthetic_structures) == 500
        task = TaskRequest("isotherm", ("CH4", "CO2", "CO"), pressures=(1e4, 1e5))
        plans = siminput.plan_batch(task, synthetic_structures, bundle=zeolite_bundle, cutoff=12.0)
        assert len(plans) == 1500
        assert len({p.folder for p in plans}) == 1500
        by_name = {s.name: s for s in synthetic_structures}
        for plan in plans:
            assert len(plan.spec.components) == 1
            structure = by_name[plan.spec.framework_name]
            findings = simlint.validate_plan(plan, task, bundle=zeolite_bundle, structures=by_name)
            assert not [f for f in findings if f.is_error], findings
            widths = chemio.perpendicular_widths(structure.lattice)
            assert all(n * h >= 24.0 for n, h in zip(plan.spec.unit_cells, widths))


# --------------------------------------------------------------------------
# 6. geometry oracle


def brute_force_cells(lat: chemio.LatticeParameters, cutoff: float) -> tuple[int, int, int]:
    """Build Cartesian cell vectors, take each width as V/|u x v|, then count up."""
    al, be, ga = (math.radians(x) for x in (lat.alpha, lat.beta, lat.gamma))
    va = (lat.a, 0.0, 0.0)
    vb = (lat.b * math.cos(ga), lat.b * math.sin(ga), 0.0)
    cx = lat.c * math.cos(be)
    cy = lat.c * (math.cos(al) - math.cos(be) * math.cos(ga)) / math.sin(ga)
    vc = (cx, cy, math.sqrt(lat.c**2 - cx**2 - cy**2))

    def cross(u, v):
        return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])

    volume = abs(sum(x * y for x, y in zip(va, cross(vb, vc))))
    counts = []
    for u, v in ((vb, vc), (vc, va), (va, vb)):
        width = volume / math.sqrt(sum(x * x for x in cross(u, v)))
        n = 1
        while n * width < 2 * cutoff:
            n += 1
        counts.append(n)
    return tuple(counts)


def random_triclinic(rng: random.Random) -> chemio.LatticeParameters:
    while True:
        lat = chemio.LatticeParameters(
            rng.uniform(3, 40), rng.uniform(3, 40), rng.uniform(3, 40),
            rng.uniform(55, 125), rng.uniform(55, 125), rng.uniform(55, 125),
        )
        if lat.volume > 0.2 * lat.a * lat.b * lat.c and len({lat.alpha, lat.beta, lat.gamma}) == 3:
            return lat


def test_criterion_6_geometry_oracle():
    with criterion(6, "replication counts match the brute-force oracle on 200 triclinic cells", 5.0):
        rng = random.Random(6)
        for _ in range(200):
            lat = random_triclinic(rng)
            cutoff = rng.uniform(4.0, 20.0)
            assert chemio.replication_for_cutoff(lat, cutoff) == brute_force_cells(lat, cutoff), (lat, cutoff)


# --------------------------------------------------------------------------
# 7. round trips


def test_criterion_7_round_trips():
    with criterion(7, "CIF, pseudo_atoms, mixing rules, force_field, molecule and simulation.input round-trip x100", 10.0):
        rng = random.Random(7)
        for _ in range(100):
            structure = random_structure(rng)
            assert chemio.parse_cif(chemio.render_cif(structure)) == structure

            bundle = random_bundle(rng)
            assert forcefield.parse_pseudo_atoms(forcefield.render_pseudo_atoms(bundle.pseudo_atoms)) == bundle.pseudo_atoms

            tables = forcefield.parse_interaction_files(forcefield.render_mixing_rules(bundle), forcefield.render_force_field(bundle))
            assert tables.self_params == bundle.self_params
            assert (tables.truncation_rule, tables.tail_corrections, tables.mixing_rule_name) == (
                bundle.truncation_rule, bundle.tail_corrections, bundle.mixing_rule_name)
            assert tables.overrides == bundle.overrides

            mol = random_molecule(rng, "M", [a.name for a in bundle.pseudo_atoms])
            assert forcefield.parse_molecule(forcefield.render_molecule(mol), "M") == mol

            spec = random_spec(rng)
            assert siminput.parse_simulation_input(siminput.render_simulation_input(spec)) == spec


# --------------------------------------------------------------------------
# 8. runtime safety


@tool("echo", "Echo.", param("text"))
def _echo(text):
    return text


def adversarial_script(rng: random.Random) -> list[dict]:
    out = []
    for k in range(rng.randint(0, 60)):
        kind = rng.random()
        if kind < 0.6:
            calls = [{"id": rng.choice([f"c{k}_{j}", "dup", ""]), "name": rng.choice(["echo", "ghost"]),
                      "arguments": rng.choice([{"text": "x"}, {}, "{bad json", {"text": "x", "extra": 1}])}
                     for j in range(rng.randint(1, 4))]
            out.append({"tool_calls": calls})
        elif kind < 0.8:
            out.append({"agent": rng.choice(["worker", "intruder"]), "content": ""})
        else:
            out.append({"content": "done"})
    return out


def test_criterion_8_runtime_safety(no_network):
    with criterion(8, "adversarial replays stay within max_steps; no network I/O; suite within 2 minutes", 120.0):
        registry = ToolRegistry([_echo])
        rng = random.Random(8)
        seen = set()
        for _ in range(500):
            max_steps = rng.randint(1, 12)
            provider = ReplayProvider(adversarial_script(rng))
            outcome = run_react(AgentConfig("worker", "w", ("echo",), max_steps), "go", registry, provider)
            assert provider.calls <= max_steps
            assert outcome.provider_calls == provider.calls
            check_transcript(outcome.transcript)
            seen.add(outcome.terminated_by)
        assert seen == {FINAL_ANSWER, STEP_LIMIT, PROVIDER_ERROR}
        assert no_network == []
        assert conftest.suite_elapsed() < conftest.SUITE_BUDGET_S
