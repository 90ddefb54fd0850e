from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from raspagent.errors import ConfigurationError
from raspagent.evalbench import (
    ParameterSet,
    ParameterSlot,
    batch_rates,
    batch_rates_exact,
    bundle_parameter_set,
    canonical_key,
    score_parameters,
)
from raspagent.evalbench.benchmark import load_suite, run_benchmark
from raspagent.evalbench.scenarios import FAULT_CONSEQUENCES, seed_fault
from raspagent.simlint import FAILURE_MODES, OutcomeLabel, classify_outcome, validate_folder


def slots(*rows):
    return ParameterSet(ParameterSlot(k, n, v, u) for k, n, v, u in rows)


NINE = [
    ("C_co2", "epsilon", 27.0, "K"), ("C_co2", "sigma", 2.8, "A"), ("C_co2", "charge", 0.7, "e"),
    ("O_co2", "epsilon", 79.0, "K"), ("O_co2", "sigma", 3.05, "A"), ("O_co2", "charge", -0.35, "e"),
    ("C_co2|O_co2", "epsilon", 46.0, "K"), ("C_co2|O_co2", "sigma", 2.9, "A"), ("bond:C_co2-O_co2", "bond-length", 1.16, "A"),
]


def test_identical_sets_score_one():
    report = score_parameters(slots(*NINE), slots(*NINE))
    assert (report.missed, report.wrong, report.extra, report.matched, report.iou) == (0, 0, 0, 9, 1.0)


def test_three_wrong_values():
    bad = [(k, n, v * 1.5, u) if i < 3 else (k, n, v, u) for i, (k, n, v, u) in enumerate(NINE)]
    report = score_parameters(slots(*bad), slots(*NINE))
    assert (report.missed, report.wrong, report.matched) == (0, 3, 6)
    assert report.iou == pytest.approx(6 / 9)


def test_missing_and_extra():
    extracted = slots(*NINE[:6], ("Si", "charge", 1.0, "e"))
    report = score_parameters(extracted, slots(*NINE))
    assert (report.missed, report.extra, report.matched) == (3, 1, 6)
    assert report.iou == pytest.approx(6 / 10)


def test_disjoint_halves():
    report = score_parameters(slots(*NINE[:3]), slots(*NINE[3:6]))
    assert report.iou == 0.0
    assert (report.missed, report.extra) == (3, 3)


def test_empty_sets():
    assert score_parameters(ParameterSet(), ParameterSet()).iou == 1.0


def test_unit_mismatch_is_wrong():
    report = score_parameters(slots(("C", "sigma", 2.8, "nm")), slots(("C", "sigma", 2.8, "A")))
    assert report.wrong == 1


def test_tolerance_floor():
    # relative tolerance applies to max(1, |reference|)
    assert score_parameters(slots(("C", "charge", 0.0005, "e")), slots(("C", "charge", 0.0, "e"))).matched == 1
    assert score_parameters(slots(("C", "charge", 0.002, "e")), slots(("C", "charge", 0.0, "e"))).wrong == 1


def test_canonical_keys():
    assert canonical_key("O_co2|C_co2") == "c_co2|o_co2"
    assert canonical_key("bond:O-C") == "bond:c-o"
    assert canonical_key("angle:O-C-H") == "angle:h-c-o"
    with pytest.raises(ValueError):
        ParameterSlot("C", "mass", 1.0, "u")
    with pytest.raises(ValueError):
        ParameterSlot("C", "charge", 1.0, "")


def test_parameter_set_persistence(tmp_path):
    ps = slots(*NINE)
    ps.dump(tmp_path / "p.json")
    assert ParameterSet.load(tmp_path / "p.json") == ps
    with pytest.raises(ValueError):
        ps.add(ParameterSlot("C_co2", "charge", 0.1, "e"))


def test_bundle_parameter_set_counts(zeolite_bundle):
    ps = bundle_parameter_set(zeolite_bundle)
    names = [n for _, n in ps.identities()]
    assert names.count("charge") == len(zeolite_bundle.pseudo_atoms)
    assert names.count("epsilon") == len(zeolite_bundle.self_params) + len(zeolite_bundle.overrides)
    assert names.count("sigma") == names.count("epsilon")


slot_st = st.builds(
    ParameterSlot,
    st.sampled_from(["a", "b", "c", "a|b", "bond:a-b"]),
    st.sampled_from(["epsilon", "sigma", "charge"]),
    st.sampled_from([0.0, 1.0, 2.5, 100.0]),
    st.just("K"),
)
set_st = st.lists(slot_st, max_size=12).map(lambda xs: ParameterSet({s.identity: s for s in xs}.values()))


@given(set_st, set_st)
def test_iou_symmetric_and_bounded(a, b):
    ab, ba = score_parameters(a, b), score_parameters(b, a)
    assert ab.iou == ba.iou
    assert 0.0 <= ab.iou <= 1.0
    assert (ab.missed, ab.extra, ab.wrong) == (ba.extra, ba.missed, ba.wrong)
    assert ab.union == len(a.identities() | b.identities())


@given(set_st, set_st)
def test_iou_one_iff_no_errors(a, b):
    r = score_parameters(a, b)
    assert (r.iou == 1.0) == (r.missed == r.wrong == r.extra == 0)


labels = st.builds(OutcomeLabel, st.booleans(), st.booleans())


@given(st.lists(labels, min_size=1, max_size=1000))
def test_exact_rates_match_integer_counts(outcomes):
    n = len(outcomes)
    correct = sum(o.correctly_configured for o in outcomes)
    executable = sum(o.executable for o in outcomes)
    assert batch_rates_exact(outcomes) == (Fraction(correct, n), Fraction(executable, n))
    assert batch_rates(outcomes) == (correct / n, executable / n)


def test_batch_rates_examples():
    good, setup_bad, dead = OutcomeLabel(True, True), OutcomeLabel(False, True), OutcomeLabel(False, False)
    assert batch_rates_exact([good] * 4 + [setup_bad]) == (Fraction(4, 5), Fraction(1))
    assert batch_rates_exact([good] * 4 + [dead]) == (Fraction(4, 5), Fraction(4, 5))
    with pytest.raises(ValueError):
        batch_rates_exact([])


@pytest.mark.parametrize("mode", sorted(FAILURE_MODES))
def test_seeded_faults(mode, tmp_path):
    fault = seed_fault(mode, tmp_path)
    findings = validate_folder(fault.folder, fault.task)
    assert set(fault.rules) <= {f.rule for f in findings}
    assert classify_outcome(findings) == OutcomeLabel(*FAULT_CONSEQUENCES[mode])


def test_unknown_fault_mode(tmp_path):
    with pytest.raises(ValueError):
        seed_fault("nonsense", tmp_path)


def test_seeded_benchmark(config, tmp_path):
    suite = config.structures_root.parent / "suites" / "seeded.yaml"
    report = run_benchmark(suite, 5, tmp_path / "a")
    rows = {r.label: r.exact_rates for r in report.setup}
    assert rows["isotherm_1x1"] == (1, 1)
    assert rows["hoa_allx1"] == (Fraction(4, 5), 1)
    assert rows["hoa_allx3"] == (Fraction(4, 5), Fraction(4, 5))
    assert rows["isotherm_allx3"] == (Fraction(4, 5), 1)
    research = {r.label: (r.missed, r.wrong, round(r.iou, 3)) for r in report.research}
    assert research["CO2 [epm2_1995, misread]"] == (0, 3, 0.667)
    assert research["CO2 [garcia2009]"] == (0, 0, 1.0)
    assert report.provider_errors == 0
    summary = [json.loads(line) for line in (tmp_path / "a" / "results.jsonl").read_text().splitlines()]
    hoa = next(r for r in summary if r["kind"] == "setup-summary" and r["label"] == "hoa_allx3")
    assert (hoa["success_rate"], hoa["execution_rate"]) == ("4/5", "4/5")


def test_benchmark_is_deterministic(config, tmp_path):
    suite = config.structures_root.parent / "suites" / "clean.yaml"
    run_benchmark(suite, 2, tmp_path / "a")
    run_benchmark(suite, 2, tmp_path / "b")
    for name in ("results.jsonl", "table.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_replay_fails_before_running(config, tmp_path):
    base = config.structures_root.parent / "suites"
    doc = {
        "setup": [
            {"label": "ok", "request": "../requests/isotherm_1x1.yaml", "replay": "../replays/setup_isotherm_1x1.jsonl"},
            {"label": "gone", "request": "../requests/isotherm_1x1.yaml", "replay": "../replays/missing.jsonl"},
        ]
    }
    suite = load_suite(doc, base=base)
    with pytest.raises(ConfigurationError, match="gone"):
        run_benchmark(suite, 1, tmp_path / "out")
    assert not (tmp_path / "out" / "work").exists()
    with pytest.raises(ConfigurationError):
        run_benchmark(suite, 0, tmp_path / "out")
