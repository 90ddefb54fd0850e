"""CIF reading/writing and the cell geometry needed to size simulation boxes.

Only the P1 subset used by the structure libraries is handled: a single
``data_`` block, the six cell tags and one atom-site loop.
"""

from __future__ import annotations

import math
import shlex
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeometryError, MalformedStructureError, StructureParseError

DEGENERATE_VOLUME = 1e-9

CELL_TAGS = (
    "_cell_length_a",
    "_cell_length_b",
    "_cell_length_c",
    "_cell_angle_alpha",
    "_cell_angle_beta",
    "_cell_angle_gamma",
)

SITE_LABEL = "_atom_site_label"
SITE_TYPE = "_atom_site_type_symbol"
SITE_FRACT = ("_atom_site_fract_x", "_atom_site_fract_y", "_atom_site_fract_z")
SITE_CHARGE = "_atom_site_charge"


@dataclass(frozen=True)
class LatticeParameters:
    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise MalformedStructureError(f"cell length {name} must be positive, got {value}")
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0 < value < 180):
                raise MalformedStructureError(
                    f"cell angle {name} must lie in (0, 180) degrees, got {value}"
                )

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.a, self.b, self.c, self.alpha, self.beta, self.gamma)

    @property
    def volume(self) -> float:
        ca, cb, cg = (math.cos(math.radians(x)) for x in (self.alpha, self.beta, self.gamma))
        arg = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg
        return self.a * self.b * self.c * math.sqrt(max(arg, 0.0))


@dataclass(frozen=True)
class AtomSite:
    label: str
    type_symbol: str
    fract_x: float
    fract_y: float
    fract_z: float
    charge: float | None = None

    def __post_init__(self):
        if not self.type_symbol:
            raise MalformedStructureError(f"site {self.label!r} has an empty type symbol")
        for value in (self.fract_x, self.fract_y, self.fract_z):
            if not math.isfinite(value):
                raise MalformedStructureError(f"site {self.label!r} has a non-finite coordinate")

    @property
    def fract(self) -> tuple[float, float, float]:
        return (self.fract_x, self.fract_y, self.fract_z)


@dataclass(frozen=True)
class CrystalStructure:
    name: str
    lattice: LatticeParameters
    sites: tuple[AtomSite, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.sites:
            raise MalformedStructureError(f"structure {self.name!r} has no atom sites")

    @property
    def has_charges(self) -> bool:
        return any(site.charge is not None for site in self.sites)


def wrap_fraction(value: float) -> float:
    """Map a fractional coordinate into [0, 1)."""
    wrapped = value - math.floor(value)
    # -1e-17 wraps to exactly 1.0 in floating point
    if wrapped >= 1.0:
        wrapped = 0.0
    return wrapped


def _strip_su(token: str) -> str:
    # "10.123(4)" -> "10.123"
    paren = token.find("(")
    return token[:paren] if paren > 0 else token


def _to_float(token: str, what: str, lineno: int) -> float:
    try:
        return float(_strip_su(token))
    except ValueError:
        raise StructureParseError(f"line {lineno}: {what} is not a number: {token!r}") from None


def _tokenize(line: str) -> list[str]:
    try:
        return shlex.split(line, comments=True, posix=True)
    except ValueError:
        return line.split()


def parse_cif(text: str) -> CrystalStructure:
    """Parse a single-block P1 CIF document.

    Unknown tags and loops are skipped. Fractional coordinates are wrapped
    into the unit cell.
    """
    lines = text.splitlines()
    name: str | None = None
    cell: dict[str, float] = {}
    sites: list[AtomSite] | None = None

    i = 0
    n = len(lines)
    while i < n:
        raw = lines[i]
        lineno = i + 1
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            i += 1
            continue
        lowered = stripped.lower()
        if lowered.startswith("data_"):
            if name is not None:
                raise StructureParseError(
                    f"line {lineno}: multiple data blocks are not supported"
                )
            name = stripped[5:].strip()
            i += 1
            continue
        if lowered == "loop_" or lowered.startswith("loop_ "):
            i += 1
            headers: list[str] = []
            while i < n and lines[i].strip().startswith("_"):
                headers.append(lines[i].strip().split()[0].lower())
                i += 1
            rows: list[tuple[int, list[str]]] = []
            while i < n:
                row = lines[i].strip()
                if not row or row.startswith("#"):
                    i += 1
                    continue
                if row.startswith("_") or row.lower().startswith(("loop_", "data_")):
                    break
                rows.append((i + 1, _tokenize(row)))
                i += 1
            if SITE_LABEL in headers or any(h in headers for h in SITE_FRACT):
                if sites is not None:
                    raise StructureParseError(
                        f"line {lineno}: more than one atom-site loop"
                    )
                sites = _parse_site_loop(headers, rows, lineno)
            continue
        if stripped.startswith("_"):
            parts = _tokenize(stripped)
            tag = parts[0].lower()
            if tag in CELL_TAGS:
                if len(parts) < 2:
                    raise StructureParseError(f"line {lineno}: tag {tag} has no value")
                cell[tag] = _to_float(parts[1], tag, lineno)
        i += 1

    if name is None:
        raise StructureParseError("no data_ block found")
    for tag in CELL_TAGS:
        if tag not in cell:
            raise MalformedStructureError(f"missing cell tag {tag}")
    if sites is None:
        raise StructureParseError("atom-site loop not found")
    lattice = LatticeParameters(*(cell[tag] for tag in CELL_TAGS))
    if lattice.volume < DEGENERATE_VOLUME:
        raise MalformedStructureError(f"cell of {name!r} is degenerate (volume {lattice.volume})")
    return CrystalStructure(name=name, lattice=lattice, sites=tuple(sites))


def _parse_site_loop(
    headers: list[str], rows: list[tuple[int, list[str]]], loop_line: int
) -> list[AtomSite]:
    required = (SITE_LABEL, SITE_TYPE, *SITE_FRACT)
    for tag in required:
        if tag not in headers:
            raise StructureParseError(f"line {loop_line}: atom-site loop lacks {tag}")
    col = {tag: headers.index(tag) for tag in required}
    charge_col = headers.index(SITE_CHARGE) if SITE_CHARGE in headers else None
    width = len(headers)

    sites = []
    for lineno, tokens in rows:
        if len(tokens) != width:
            raise StructureParseError(
                f"line {lineno}: atom-site row has {len(tokens)} values, expected {width}"
            )
        fract = [wrap_fraction(_to_float(tokens[col[t]], t, lineno)) for t in SITE_FRACT]
        charge = None
        if charge_col is not None and tokens[charge_col] not in ("?", "."):
            charge = _to_float(tokens[charge_col], SITE_CHARGE, lineno)
        sites.append(
            AtomSite(
                label=tokens[col[SITE_LABEL]],
                type_symbol=tokens[col[SITE_TYPE]],
                fract_x=fract[0],
                fract_y=fract[1],
                fract_z=fract[2],
                charge=charge,
            )
        )
    return sites


def read_cif(path: str | Path) -> CrystalStructure:
    return parse_cif(Path(path).read_text())


def _fmt(value: float) -> str:
    return repr(float(value))


def render_cif(structure: CrystalStructure) -> str:
    """Write the canonical CIF form; tag order is fixed so diffs stay stable."""
    lat = structure.lattice
    out = [f"data_{structure.name}", ""]
    for tag, value in zip(CELL_TAGS, lat.as_tuple()):
        out.append(f"{tag:<20} {_fmt(value)}")
    out.append("_symmetry_space_group_name_H-M 'P 1'")
    out.append("")
    with_charge = structure.has_charges
    out.append("loop_")
    out.append(SITE_LABEL)
    out.append(SITE_TYPE)
    out.extend(SITE_FRACT)
    if with_charge:
        out.append(SITE_CHARGE)
    for site in structure.sites:
        row = [site.label, site.type_symbol, *(_fmt(x) for x in site.fract)]
        if with_charge:
            row.append("?" if site.charge is None else _fmt(site.charge))
        out.append(" ".join(row))
    out.append("")
    return "\n".join(out)


def write_cif(structure: CrystalStructure, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(render_cif(structure))
    return path


def lattice_parameters(structure: CrystalStructure) -> LatticeParameters:
    return structure.lattice


def atom_type_census(structure: CrystalStructure) -> Counter:
    """Count sites per type symbol. Missing types read as 0 (it's a Counter)."""
    return Counter(site.type_symbol for site in structure.sites)


def metric_tensor(lattice: LatticeParameters) -> np.ndarray:
    a, b, c = lattice.a, lattice.b, lattice.c
    ca, cb, cg = (math.cos(math.radians(x)) for x in (lattice.alpha, lattice.beta, lattice.gamma))
    return np.array(
        [
            [a * a, a * b * cg, a * c * cb],
            [a * b * cg, b * b, b * c * ca],
            [a * c * cb, b * c * ca, c * c],
        ]
    )


def perpendicular_widths(lattice: LatticeParameters) -> tuple[float, float, float]:
    """Distances between opposite cell faces.

    Uses the reciprocal metric: the spacing of the planes spanned by the
    other two axes is ``1 / |a*|``. Orthogonal cells return the edges exactly.
    """
    angles = (lattice.alpha, lattice.beta, lattice.gamma)
    if all(x == 90.0 for x in angles):
        return (lattice.a, lattice.b, lattice.c)
    if lattice.volume < DEGENERATE_VOLUME:
        raise GeometryError(f"degenerate cell: volume {lattice.volume}")
    g = metric_tensor(lattice)
    det = float(np.linalg.det(g))
    if det <= DEGENERATE_VOLUME**2:
        raise GeometryError(f"degenerate cell: volume {math.sqrt(max(det, 0.0))}")
    inv = np.linalg.inv(g)
    return tuple(float(1.0 / math.sqrt(inv[i, i])) for i in range(3))


def replication_for_cutoff(lattice: LatticeParameters, cutoff: float) -> tuple[int, int, int]:
    """Smallest (n_a, n_b, n_c) with n * width >= 2 * cutoff on every axis."""
    if not cutoff > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    target = 2.0 * cutoff
    counts = []
    for width in perpendicular_widths(lattice):
        n = max(1, math.ceil(target / width))
        # guard against rounding in the division
        while n > 1 and (n - 1) * width >= target:
            n -= 1
        while n * width < target:
            n += 1
        counts.append(n)
    return tuple(counts)
