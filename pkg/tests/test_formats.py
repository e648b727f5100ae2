import numpy as np
import pytest

from swfdeembed import BoxSpec, ChannelMatrix, CoefficientSet, FieldTrace, FormatError, Medium, ModeSet, build_box_mesh
from swfdeembed.equivalence import angle_grid_deg, superpose_farfields
from swfdeembed.formats import (
    NFD_COLUMNS,
    format_boxspec,
    parse_boxspec,
    parse_coefficients,
    read_channel_matrix,
    read_coefficients,
    read_farfield,
    read_nfd,
    write_channel_matrix,
    write_coefficients,
    write_directivity,
    write_farfield,
    write_nfd,
)

MED = Medium.free_space(1.23456789e9)


@pytest.fixture
def trace(rng):
    mesh = build_box_mesh(BoxSpec((0.01, 0.02, -0.03), (0.5, 0.5, 0.5), 4, 1))
    assert len(mesh) == 96
    E = rng.normal(size=(96, 3)) * 10.0 ** rng.integers(-300, 300, size=(96, 3)) + 1j * rng.normal(size=(96, 3))
    H = rng.normal(size=(96, 3)) + 1j * rng.normal(size=(96, 3)) * 1e-200
    return FieldTrace(mesh, E, H, MED.frequency)


def test_nfd_round_trip_bitwise(tmp_path, trace):
    path = tmp_path / "t.nfd"
    write_nfd(path, trace)
    back = read_nfd(path)
    for name in ("E", "H"):
        assert getattr(back, name).tobytes() == getattr(trace, name).tobytes()
    for name in ("points", "normals", "weights"):
        assert getattr(back.mesh, name).tobytes() == getattr(trace.mesh, name).tobytes()
    assert back.frequency == trace.frequency
    assert back.mesh.box == trace.mesh.box


def test_nfd_layout(tmp_path, trace):
    path = tmp_path / "t.nfd"
    write_nfd(path, trace)
    data = path.read_bytes()
    head, _, block = data.partition(b"\n---\n")
    assert head.startswith(b"format: NFD1\n")
    assert len(block) == 96 * NFD_COLUMNS * 8
    row = np.frombuffer(block[: NFD_COLUMNS * 8], "<f8")
    assert row[7] == trace.E[0, 0].real and row[8] == trace.E[0, 0].imag
    assert row[13] == trace.H[0, 0].real


def test_nfd_truncated(tmp_path, trace):
    path = tmp_path / "t.nfd"
    write_nfd(path, trace)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError, match=r"expected 14592 bytes.*got 14584"):
        read_nfd(path)


def test_nfd_bad_magic_and_nonfinite(tmp_path, trace):
    path = tmp_path / "t.nfd"
    write_nfd(path, trace)
    data = bytearray(path.read_bytes())
    path.write_bytes(b"format: NFD2" + bytes(data[12:]))
    with pytest.raises(FormatError, match="offset 0"):
        read_nfd(path)
    start = data.index(b"\n---\n") + 5
    data[start + 8 * 9 : start + 8 * 10] = np.array([np.inf], "<f8").tobytes()
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match=f"offset {start + 72}"):
        read_nfd(path)


def test_nfd_unknown_keys_preserved(tmp_path, trace):
    path = tmp_path / "t.nfd"
    write_nfd(path, trace)
    data = path.read_bytes()
    path.write_bytes(data.replace(b"\n---\n", b"\nsolver: empire\nrun_id: 42\n---\n", 1))
    back = read_nfd(path)
    assert back.metadata["header"] == {"solver": "empire", "run_id": "42"}
    again = tmp_path / "u.nfd"
    write_nfd(again, back)
    assert b"solver: empire\n" in again.read_bytes()


def test_boxspec_provenance():
    box = BoxSpec((0.1, 0.2, 0.3), (0.25, 1 / 3, 0.5), ((2, 3), (4, 5), (6, 7)), 3)
    assert parse_boxspec(format_boxspec(box)) == box
    assert parse_boxspec("external") is None
    with pytest.raises(FormatError):
        parse_boxspec("sphere r=1")


def test_coefficient_round_trip(tmp_path, rng):
    ms = ModeSet(4)
    c = CoefficientSet("bprime", rng.normal(size=48) / 3 + 1j * rng.normal(size=48) * 1e-17, ms, MED)
    path = tmp_path / "c.csv"
    write_coefficients(path, c)
    text = path.read_text()
    assert "j,s,m,n,re,im" in text and "# kind: bprime" in text
    back = read_coefficients(path)
    assert back.values.tobytes() == c.values.tobytes()
    assert back.medium == MED and back.kind == "bprime" and back.modeset == ms


def test_coefficient_errors(tmp_path, rng):
    c = CoefficientSet("a", np.arange(6), ModeSet(1), MED)
    path = tmp_path / "c.csv"
    write_coefficients(path, c)
    lines = path.read_text().splitlines()
    with pytest.raises(FormatError, match="contiguous"):
        parse_coefficients("\n".join(lines[:-1]))
    with pytest.raises(FormatError, match="does not match"):
        parse_coefficients("\n".join(lines[:-1] + ["6,1,1,1,0.0,0.0"]))
    with pytest.raises(FormatError, match="missing metadata"):
        parse_coefficients("\n".join(lines[1:]))


def test_channel_matrix_round_trip(tmp_path, rng):
    M = ChannelMatrix(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)), "M11")
    path = tmp_path / "m.csv"
    write_channel_matrix(path, M)
    assert path.read_text().splitlines()[0] == "N=5,role=M11"
    back = read_channel_matrix(path)
    assert back.entries.tobytes() == M.entries.tobytes() and back.role == "M11"
    path.write_text("N=2,role=M\n1+0j,0+0j\n")
    with pytest.raises(FormatError, match="rows"):
        read_channel_matrix(path)


def test_farfield_round_trips(tmp_path, rng):
    ms = ModeSet(2)
    b = CoefficientSet("bprime", rng.normal(size=ms.count) + 1j * rng.normal(size=ms.count), ms, MED)
    th, ph = angle_grid_deg(15.0)
    pat = superpose_farfields(b, MED, th, ph, degrees=True)
    path = tmp_path / "f.csv"
    write_farfield(path, pat)
    back = read_farfield(path, MED)
    assert back.E_theta.tobytes() == pat.E_theta.tobytes()
    assert back.E_phi.tobytes() == pat.E_phi.tobytes()
    assert np.array_equal(back.theta_deg, th)
    D = rng.normal(size=(len(th), len(ph)))
    write_directivity(path, th, ph, D)
    t2, p2, D2 = read_farfield(path, MED)
    assert D2.tobytes() == D.tobytes()
    lines = path.read_text().splitlines()
    path.write_text("\n".join([lines[0], lines[2], lines[1]] + lines[3:]) + "\n")
    with pytest.raises(FormatError, match="sorted"):
        read_farfield(path, MED)
