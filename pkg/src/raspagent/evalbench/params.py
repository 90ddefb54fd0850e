"""Parameter sets extracted from force fields, and how they are scored."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from ..forcefield import ForceFieldBundle

PARAMETER_NAMES = ("epsilon", "sigma", "charge", "bond-length", "angle")
DEFAULT_REL_TOL = 1e-3

DEFAULT_UNITS = {"epsilon": "K", "sigma": "A", "charge": "e", "bond-length": "A", "angle": "deg"}


def canonical_key(key: str) -> str:
    """Lower-case type names; pair members and geometry atoms sorted."""
    key = key.strip().lower()
    for prefix in ("bond:", "angle:"):
        if key.startswith(prefix):
            atoms = key[len(prefix):].split("-")
            if prefix == "angle:" and len(atoms) == 3:
                # the apex stays in the middle
                ends = sorted((atoms[0], atoms[2]))
                atoms = [ends[0], atoms[1], ends[1]]
            else:
                atoms = sorted(atoms)
            return prefix + "-".join(atoms)
    if "|" in key:
        return "|".join(sorted(part.strip() for part in key.split("|")))
    return key


def _check_name(name: str) -> str:
    if name in PARAMETER_NAMES or (name.startswith("other:") and len(name) > 6):
        return name
    raise ValueError(f"unknown parameter name {name!r}")


@dataclass(frozen=True)
class ParameterSlot:
    key: str
    name: str
    value: float
    units: str

    def __post_init__(self):
        object.__setattr__(self, "key", canonical_key(self.key))
        object.__setattr__(self, "name", _check_name(self.name))
        if not self.units:
            raise ValueError(f"slot {self.key}/{self.name} has no units")
        if not math.isfinite(self.value):
            raise ValueError(f"slot {self.key}/{self.name} has a non-finite value")

    @property
    def identity(self) -> tuple[str, str]:
        return (self.key, self.name)


class ParameterSet:
    def __init__(self, slots=()):
        self._slots: dict[tuple[str, str], ParameterSlot] = {}
        for slot in slots:
            self.add(slot)

    def add(self, slot: ParameterSlot) -> None:
        if slot.identity in self._slots:
            raise ValueError(f"duplicate parameter slot {slot.identity}")
        self._slots[slot.identity] = slot

    def put(self, slot: ParameterSlot) -> None:
        """Insert or replace."""
        self._slots[slot.identity] = slot

    def __len__(self):
        return len(self._slots)

    def __iter__(self):
        return iter(self._slots.values())

    def __contains__(self, identity) -> bool:
        return identity in self._slots

    def __getitem__(self, identity) -> ParameterSlot:
        return self._slots[identity]

    def __eq__(self, other):
        return isinstance(other, ParameterSet) and self._slots == other._slots

    def identities(self) -> set[tuple[str, str]]:
        return set(self._slots)

    def to_list(self) -> list[dict]:
        return [asdict(s) for s in sorted(self._slots.values(), key=lambda s: s.identity)]

    @classmethod
    def from_list(cls, docs: list[dict]) -> ParameterSet:
        return cls(ParameterSlot(d["key"], d["name"], float(d["value"]), d.get("units") or DEFAULT_UNITS.get(d["name"], "")) for d in docs)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_list(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> ParameterSet:
        return cls.from_list(json.loads(Path(path).read_text()))


def bundle_parameter_set(bundle: ForceFieldBundle) -> ParameterSet:
    """Slots a force-field bundle defines: charges, LJ self and pair terms, bond lengths."""
    out = ParameterSet()
    for atom in bundle.pseudo_atoms:
        out.add(ParameterSlot(atom.name, "charge", atom.charge, "e"))
    for type_name, p in bundle.self_params.items():
        out.add(ParameterSlot(type_name, "epsilon", p.epsilon, "K"))
        out.add(ParameterSlot(type_name, "sigma", p.sigma, "A"))
    for ov in bundle.overrides:
        key = f"{ov.type_a}|{ov.type_b}"
        out.add(ParameterSlot(key, "epsilon", ov.params.epsilon, "K"))
        out.add(ParameterSlot(key, "sigma", ov.params.sigma, "A"))
    for mol in bundle.molecules.values():
        for i, j in mol.bonds:
            key = f"bond:{mol.atoms[i].pseudo_atom}-{mol.atoms[j].pseudo_atom}"
            slot = ParameterSlot(key, "bond-length", round(mol.bond_length(i, j), 6), "A")
            if slot.identity in out:
                # symmetric molecules repeat the same bond
                if math.isclose(out[slot.identity].value, slot.value, rel_tol=DEFAULT_REL_TOL):
                    continue
                k = 2
                while (canonical_key(key) + f"#{k}", "bond-length") in out:
                    k += 1
                slot = ParameterSlot(f"{key}#{k}", "bond-length", slot.value, "A")
            out.add(slot)
    return out


@dataclass(frozen=True)
class ScoreReport:
    missed: int
    wrong: int
    extra: int
    matched: int
    iou: float
    details: tuple[str, ...] = field(default=(), compare=False)

    @property
    def union(self) -> int:
        return self.matched + self.wrong + self.missed + self.extra


def values_match(extracted: float, reference: float, rel_tol: float) -> bool:
    return abs(extracted - reference) <= rel_tol * max(1.0, abs(reference))


def score_parameters(extracted: ParameterSet, reference: ParameterSet, rel_tol: float = DEFAULT_REL_TOL) -> ScoreReport:
    """Compare slot by slot on (key, name) identity.

    A shared identity is matched when the values agree within ``rel_tol``
    (relative, floored at an absolute scale of 1) and the units agree;
    otherwise it counts as wrong.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    ext_ids = extracted.identities()
    ref_ids = reference.identities()
    matched = wrong = 0
    details = []
    for identity in sorted(ext_ids & ref_ids):
        e, r = extracted[identity], reference[identity]
        if e.units != r.units:
            wrong += 1
            details.append(f"unit mismatch {identity}: {e.units} vs {r.units}")
        elif values_match(e.value, r.value, rel_tol):
            matched += 1
        else:
            wrong += 1
            details.append(f"wrong value {identity}: {e.value} vs {r.value}")
    missed_ids = sorted(ref_ids - ext_ids)
    extra_ids = sorted(ext_ids - ref_ids)
    details += [f"missed {i}" for i in missed_ids] + [f"extra {i}" for i in extra_ids]
    union = len(ext_ids | ref_ids)
    iou = matched / union if union else 1.0
    return ScoreReport(len(missed_ids), wrong, len(extra_ids), matched, iou, tuple(details))


def batch_rates_exact(outcomes) -> tuple[Fraction, Fraction]:
    if not outcomes:
        raise ValueError("batch_rates needs at least one outcome")
    n = len(outcomes)
    return (
        Fraction(sum(1 for o in outcomes if o.correctly_configured), n),
        Fraction(sum(1 for o in outcomes if o.executable), n),
    )


def batch_rates(outcomes) -> tuple[float, float]:
    """(success rate, execution rate) over per-run outcome labels."""
    success, execution = batch_rates_exact(outcomes)
    return (success.numerator / success.denominator, execution.numerator / execution.denominator)
