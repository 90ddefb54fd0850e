"""Characterization task requests."""

from __future__ import annotations

import fnmatch
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigurationError

ISOTHERM = "isotherm"
HEAT_OF_ADSORPTION = "heat-of-adsorption"
MIXTURE_ISOTHERM = "mixture-isotherm"
TASK_KINDS = (ISOTHERM, HEAT_OF_ADSORPTION, MIXTURE_ISOTHERM)

_ALIASES = {"hoa": HEAT_OF_ADSORPTION, "mixture": MIXTURE_ISOTHERM}


@dataclass(frozen=True)
class TaskRequest:
    kind: str
    adsorbates: tuple[str, ...]
    structures: tuple[str, ...] = ()
    structure_glob: str | None = None
    temperature: float = 298.0
    pressures: tuple[float, ...] = ()
    forcefield: str = "auto"
    cutoff: float = 12.0
    cycles: int = 10000
    init_cycles: int = 2000
    print_every: int = 1000
    notes: str = ""

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "adsorbates", tuple(self.adsorbates))
        object.__setattr__(self, "structures", tuple(self.structures))
        object.__setattr__(self, "pressures", tuple(float(p) for p in self.pressures))
        if kind not in TASK_KINDS:
            raise ConfigurationError(f"unknown task kind {self.kind!r}; expected one of {TASK_KINDS}")
        if not self.adsorbates:
            raise ConfigurationError("task request needs at least one adsorbate")
        if self.is_isotherm and not self.pressures:
            raise ConfigurationError("isotherm tasks need pressure points")

    @property
    def is_isotherm(self) -> bool:
        return self.kind in (ISOTHERM, MIXTURE_ISOTHERM)

    @property
    def is_mixture(self) -> bool:
        return self.kind == MIXTURE_ISOTHERM

    def select_structures(self, available: list[str]) -> list[str]:
        """Resolve the structure selector against the names in a structure root."""
        if self.structures:
            return list(self.structures)
        pattern = self.structure_glob or "*"
        return sorted(name for name in available if fnmatch.fnmatch(name, pattern))

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "adsorbates": list(self.adsorbates),
            "temperature": self.temperature,
            "pressures": list(self.pressures),
            "forcefield": self.forcefield,
            "cutoff": self.cutoff,
            "cycles": self.cycles,
            "init_cycles": self.init_cycles,
            "print_every": self.print_every,
        }
        if self.structures:
            doc["structures"] = list(self.structures)
        if self.structure_glob:
            doc["structure_glob"] = self.structure_glob
        if self.notes:
            doc["notes"] = self.notes
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> TaskRequest:
        doc = dict(doc)
        grid = doc.pop("pressure_range", None)
        if grid and not doc.get("pressures"):
            doc["pressures"] = log_pressure_grid(**grid)
        known = cls.__dataclass_fields__
        unknown = set(doc) - set(known)
        if unknown:
            raise ConfigurationError(f"unknown task request fields: {sorted(unknown)}")
        return cls(**doc)


def log_pressure_grid(low: float, high: float, points: int) -> tuple[float, ...]:
    """Log-spaced pressure points in Pa, rounded to 6 significant digits."""
    if not (0 < low < high) or points < 2:
        raise ConfigurationError("pressure range needs 0 < low < high and at least 2 points")
    return tuple(float(f"{p:.6g}") for p in np.geomspace(low, high, points))


def load_task(path: str | Path) -> TaskRequest:
    text = Path(path).read_text()
    doc = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    return TaskRequest.from_dict(doc)
