from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raspagent import chemio
from raspagent.errors import GeometryError, MalformedStructureError, StructureParseError

CUBIC = """data_cubic
_cell_length_a 10
_cell_length_b 10
_cell_length_c 10
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_atom_site_label
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
Si1 Si 0 0 0
"""

TRICLINIC = CUBIC.replace("data_cubic", "data_tri").replace(
    "_cell_length_a 10\n_cell_length_b 10\n_cell_length_c 10\n_cell_angle_alpha 90\n_cell_angle_beta 90\n_cell_angle_gamma 90",
    "_cell_length_a 7\n_cell_length_b 8\n_cell_length_c 9\n_cell_angle_alpha 80\n_cell_angle_beta 95\n_cell_angle_gamma 100",
)


def cell_vectors(lat: chemio.LatticeParameters):
    """Explicit Cartesian cell vectors (a along x, b in the xy plane)."""
    al, be, ga = (math.radians(x) for x in (lat.alpha, lat.beta, lat.gamma))
    va = (lat.a, 0.0, 0.0)
    vb = (lat.b * math.cos(ga), lat.b * math.sin(ga), 0.0)
    cx = lat.c * math.cos(be)
    cy = lat.c * (math.cos(al) - math.cos(be) * math.cos(ga)) / math.sin(ga)
    cz = math.sqrt(max(lat.c**2 - cx**2 - cy**2, 0.0))
    return va, vb, (cx, cy, cz)


def cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def norm(u):
    return math.sqrt(sum(x * x for x in u))


def oracle_widths(lat):
    va, vb, vc = cell_vectors(lat)
    volume = abs(sum(x * y for x, y in zip(va, cross(vb, vc))))
    return tuple(volume / norm(cross(u, v)) for u, v in ((vb, vc), (vc, va), (va, vb)))


def test_minimal_cubic():
    s = chemio.parse_cif(CUBIC)
    assert s.name == "cubic"
    assert len(s.sites) == 1
    assert s.lattice.volume == pytest.approx(1000.0)
    assert not s.has_charges


def test_fraction_wrapped_into_cell():
    s = chemio.parse_cif(CUBIC.replace("Si1 Si 0 0 0", "Si1 Si 1.25 -0.25 0.5"))
    assert s.sites[0].fract == pytest.approx((0.25, 0.75, 0.5))


def test_mfi_fixture_rows_and_types(config):
    path = config.structures_root / "MFI_SI.cif"
    # independent count: loop rows are the lines whose second token is a type symbol
    rows = [line.split() for line in path.read_text().splitlines()]
    site_rows = [r for r in rows if len(r) >= 5 and r[0][:1].isalpha() and not r[0].startswith(("_", "data_", "loop_"))]
    s = chemio.read_cif(path)
    assert len(s.sites) == len(site_rows)
    assert {site.type_symbol for site in s.sites} == {"Si", "O"}
    assert chemio.atom_type_census(s) == {"Si": 96, "O": 192}
    assert chemio.atom_type_census(s)["Zn"] == 0


def test_mfi_lattice_matches_header(config):
    path = config.structures_root / "MFI_SI.cif"
    header = {}
    for line in path.read_text().splitlines():
        parts = line.split()
        if parts and parts[0].startswith("_cell_"):
            header[parts[0]] = float(parts[1])
    lat = chemio.lattice_parameters(chemio.read_cif(path))
    assert lat.as_tuple() == tuple(header[t] for t in chemio.CELL_TAGS)


def test_lattice_pass_through():
    assert chemio.lattice_parameters(chemio.parse_cif(CUBIC)).as_tuple() == (10, 10, 10, 90, 90, 90)
    assert chemio.lattice_parameters(chemio.parse_cif(TRICLINIC)).as_tuple() == (7, 8, 9, 80, 95, 100)


def test_charge_column_optional():
    text = CUBIC.replace("_atom_site_fract_z\n", "_atom_site_fract_z\n_atom_site_charge\n").replace(
        "Si1 Si 0 0 0", "Si1 Si 0 0 0 1.5\nSi2 Si 0.5 0.5 0.5 ?"
    )
    s = chemio.parse_cif(text)
    assert s.sites[0].charge == 1.5
    assert s.sites[1].charge is None


def test_missing_cell_tag_named():
    with pytest.raises(MalformedStructureError, match="_cell_angle_beta"):
        chemio.parse_cif(CUBIC.replace("_cell_angle_beta 90\n", ""))


def test_row_arity_reports_line():
    with pytest.raises(StructureParseError, match="line 14"):
        chemio.parse_cif(CUBIC.replace("Si1 Si 0 0 0", "Si1 Si 0 0"))


def test_missing_site_loop():
    with pytest.raises(StructureParseError, match="atom-site loop"):
        chemio.parse_cif(CUBIC.split("loop_")[0])


def test_multiple_blocks_rejected():
    with pytest.raises(StructureParseError, match="multiple data blocks"):
        chemio.parse_cif(CUBIC + CUBIC)


def test_degenerate_and_invalid_lattices():
    with pytest.raises(MalformedStructureError):
        chemio.LatticeParameters(10, 10, -1, 90, 90, 90)
    with pytest.raises(MalformedStructureError):
        chemio.LatticeParameters(10, 10, 10, 90, 180, 90)
    flat = chemio.LatticeParameters(10, 10, 10, 60, 30, 30)  # alpha = beta + gamma: coplanar vectors
    with pytest.raises(GeometryError):
        chemio.perpendicular_widths(flat)


def test_comments_and_unknown_tags_ignored():
    text = "# header comment\n" + CUBIC.replace("loop_", "_chemical_name_common 'test cell'\n# note\nloop_")
    assert len(chemio.parse_cif(text).sites) == 1


def test_perpendicular_widths_orthogonal():
    assert chemio.perpendicular_widths(chemio.LatticeParameters(20, 20, 20, 90, 90, 90)) == (20, 20, 20)
    assert chemio.perpendicular_widths(chemio.LatticeParameters(10, 20, 30, 90, 90, 90)) == (10, 20, 30)


def test_perpendicular_widths_triclinic_frozen():
    lat = chemio.LatticeParameters(7, 8, 9, 80, 95, 100)
    expected = (6.88173718132494, 7.774943872022701, 8.847947804560638)  # cross-product oracle
    assert chemio.perpendicular_widths(lat) == pytest.approx(expected, rel=1e-12)
    assert oracle_widths(lat) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "a, cutoff, expected",
    [(20, 12, (2, 2, 2)), (20, 24, (3, 3, 3)), (30, 12, (1, 1, 1))],
)
def test_replication_cubic(a, cutoff, expected):
    assert chemio.replication_for_cutoff(chemio.LatticeParameters(a, a, a, 90, 90, 90), cutoff) == expected


def test_replication_rejects_bad_cutoff():
    with pytest.raises(ValueError):
        chemio.replication_for_cutoff(chemio.LatticeParameters(20, 20, 20, 90, 90, 90), 0)


lattices = st.builds(
    chemio.LatticeParameters,
    st.floats(3, 40),
    st.floats(3, 40),
    st.floats(3, 40),
    st.floats(60, 120),
    st.floats(60, 120),
    st.floats(60, 120),
).filter(lambda lat: lat.volume > 0.05 * lat.a * lat.b * lat.c)


@settings(max_examples=200, deadline=None)
@given(lattices, st.floats(1, 30))
def test_replication_is_minimal(lat, cutoff):
    counts = chemio.replication_for_cutoff(lat, cutoff)
    for n, h in zip(counts, chemio.perpendicular_widths(lat)):
        assert n >= 1
        assert n * h >= 2 * cutoff
        assert n == 1 or (n - 1) * h < 2 * cutoff


@settings(max_examples=100, deadline=None)
@given(lattices, st.floats(1, 20), st.floats(0, 10))
def test_replication_monotone_in_cutoff(lat, cutoff, extra):
    small = chemio.replication_for_cutoff(lat, cutoff)
    large = chemio.replication_for_cutoff(lat, cutoff + extra)
    assert all(s <= l for s, l in zip(small, large))


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 50), st.floats(1, 50), st.floats(1, 50))
def test_orthogonal_widths_exact(a, b, c):
    assert chemio.perpendicular_widths(chemio.LatticeParameters(a, b, c, 90, 90, 90)) == (a, b, c)


sites = st.lists(
    st.tuples(
        st.sampled_from(["Si", "O", "Al", "Zn"]),
        st.floats(-2, 2, allow_nan=False),
        st.floats(-2, 2, allow_nan=False),
        st.floats(-2, 2, allow_nan=False),
    ),
    min_size=1,
    max_size=12,
)


@settings(max_examples=100, deadline=None)
@given(lattices, sites)
def test_cif_round_trip_and_census(lat, rows):
    s = chemio.CrystalStructure(
        "rt",
        lat,
        tuple(chemio.AtomSite(f"{t}{i}", t, *map(chemio.wrap_fraction, xyz)) for i, (t, *xyz) in enumerate(rows)),
    )
    back = chemio.parse_cif(chemio.render_cif(s))
    assert back == s
    census = chemio.atom_type_census(back)
    assert sum(census.values()) == len(back.sites)
    for site in back.sites:
        assert all(0.0 <= x < 1.0 for x in site.fract)
