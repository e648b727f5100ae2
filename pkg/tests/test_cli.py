import json
import subprocess
import sys

import numpy as np
import pytest

from swfdeembed import BoxSpec, ChannelMatrix, CoefficientSet, DipoleSource, Medium, ModeSet, Scene, build_box_mesh
from swfdeembed import cli
from swfdeembed.formats import read_coefficients, read_farfield, read_nfd, write_channel_matrix, write_coefficients
from swfdeembed.oracles import sample_scene_on_mesh

F = 1e9
MED = Medium.free_space(F)
LAM = MED.wavelength
DIPOLE = f"electric,{0.3 * LAM!r},0,0,0,0.001,0"


@pytest.fixture
def nfd(tmp_path):
    path = tmp_path / "trace.nfd"
    rc = cli.main(["synth", "--freq", repr(F), "--side", repr(LAM), "--cells", "16", "--nodes-per-cell", "2",
                   "--dipole", DIPOLE, "-o", str(path)])
    assert rc == 0
    return path


def test_decompose_emits_48_rows(tmp_path, nfd):
    out = tmp_path / "b.csv"
    assert cli.main(["decompose", str(nfd), "--basis", "bprime", "--nmax", "4", "-o", str(out)]) == 0
    rows = [ln for ln in out.read_text().splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == "j,s,m,n,re,im" and len(rows) - 1 == 48
    assert read_coefficients(out).kind == "bprime"


def test_frequency_mismatch_exit_2(tmp_path, nfd, capsys):
    rc = cli.main(["decompose", str(nfd), "--freq", "2e9", "-o", str(tmp_path / "x.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "2000000000.0" in err and "1000000000.0" in err
    assert not (tmp_path / "x.csv").exists()


def test_usage_errors_exit_2(tmp_path, capsys):
    assert cli.main([]) == 2
    assert cli.main(["decompose", str(tmp_path / "missing.nfd"), "-o", "x"]) == 2
    assert cli.main(["synth", "--dipole", "electric,0,0", "--freq", "1e9", "-o", str(tmp_path / "a")]) == 2
    assert cli.main(["validate", "--criteria", "9"]) == 2
    bad = tmp_path / "bad.nfd"
    bad.write_bytes(b"format: XYZ\n---\n")
    assert cli.main(["decompose", str(bad), "-o", str(tmp_path / "y.csv")]) == 2


def test_basis_choices(tmp_path, nfd):
    vals = {}
    for basis in ("b", "a", "bprime", "ls"):
        out = tmp_path / f"{basis}.csv"
        assert cli.main(["decompose", str(nfd), "--basis", basis, "--nmax", "2", "-o", str(out)]) == 0
        vals[basis] = read_coefficients(out).values
    np.testing.assert_allclose(vals["bprime"], vals["b"] - vals["a"], atol=1e-10 * np.linalg.norm(vals["b"]))
    # the dipole field has content above n = 2; LS and projection truncate differently
    assert np.linalg.norm(vals["ls"] - vals["b"]) < 0.1 * np.linalg.norm(vals["b"])


def test_deembed_identity(tmp_path, rng):
    b = CoefficientSet("b", rng.normal(size=16) + 1j * rng.normal(size=16), ModeSet(2), MED)
    write_coefficients(tmp_path / "b.csv", b)
    write_channel_matrix(tmp_path / "M.csv", ChannelMatrix(np.eye(16), "M"))
    assert cli.main(["deembed", "--coefficients", str(tmp_path / "b.csv"), "--channel", str(tmp_path / "M.csv"),
                     "-o", str(tmp_path / "a.csv")]) == 0
    out = read_coefficients(tmp_path / "a.csv")
    assert out.kind == "a" and out.values.tobytes() == b.values.tobytes()


def test_flow_report(tmp_path, rng):
    N = 6
    T = CoefficientSet("b", rng.normal(size=N) + 1j * rng.normal(size=N), ModeSet(1), MED)
    S = rng.normal(size=(N, N)) * 0.1
    M11 = rng.normal(size=(N, N)) * 0.1
    write_coefficients(tmp_path / "T.csv", T)
    write_channel_matrix(tmp_path / "S.csv", ChannelMatrix(S, "S"))
    write_channel_matrix(tmp_path / "M11.csv", ChannelMatrix(M11, "M11"))
    args = ["flow", "--T", str(tmp_path / "T.csv"), "--S", str(tmp_path / "S.csv"), "--M11", str(tmp_path / "M11.csv")]
    mism = {}
    for case in ("love", "naive", "corrected"):
        out = tmp_path / f"{case}.csv"
        assert cli.main(args + ["--case", case, "-o", str(out)]) == 0
        head = out.read_text().splitlines()
        mism[case] = float(head[1].split(":")[1])
        assert head[2].startswith("j,re_b") and len(head) == 3 + N
    assert mism["corrected"] < 1e-12 and mism["naive"] > 1e-6 and mism["love"] > 1e-6
    write_channel_matrix(tmp_path / "I.csv", ChannelMatrix(np.eye(N), "M11"))
    zero_s = tmp_path / "Z.csv"
    write_channel_matrix(zero_s, ChannelMatrix(np.zeros((N, N)), "S"))
    rc = cli.main(["flow", "--T", str(tmp_path / "T.csv"), "--S", str(zero_s), "--M11", str(tmp_path / "I.csv"),
                   "-o", str(tmp_path / "sing.csv")])
    assert rc == 1


def test_farfield_quantities(tmp_path, nfd):
    coe = tmp_path / "bp.csv"
    cli.main(["decompose", str(nfd), "-o", str(coe)])
    ff = tmp_path / "d.csv"
    assert cli.main(["farfield", str(coe), "--cut", "phi=0", "--quantity", "directivity", "-o", str(ff)]) == 0
    th, ph, D = read_farfield(ff, MED)
    assert len(th) == 181 and list(ph) == [0.0]
    assert np.max(np.abs(D - 10 * np.log10(1.5))) < 0.1
    assert cli.main(["farfield", str(coe), "--cut", "theta=0", "-o", str(ff)]) == 2


def test_mesh_metadata(tmp_path):
    out = tmp_path / "m.json"
    assert cli.main(["mesh", "--side", "1.0", "--cells", "4", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["samples"] == 96 and doc["area"] == pytest.approx(6.0)


def test_synth_from_coefficients_and_scene(tmp_path, rng):
    ms = ModeSet(2)
    b = CoefficientSet("b", rng.normal(size=16) + 0j, ms, MED)
    a = CoefficientSet("a", rng.normal(size=16) + 0j, ms, MED)
    write_coefficients(tmp_path / "b.csv", b)
    write_coefficients(tmp_path / "a.csv", a)
    out = tmp_path / "c.nfd"
    assert cli.main(["synth", "--coefficients", str(tmp_path / "b.csv"), "--incoming", str(tmp_path / "a.csv"),
                     "--side", repr(LAM), "--cells", "16", "--nodes-per-cell", "2", "-o", str(out)]) == 0
    coe = tmp_path / "bp.csv"
    cli.main(["decompose", str(out), "--nmax", "2", "-o", str(coe)])
    got = read_coefficients(coe).values
    assert np.linalg.norm(got - (b.values - a.values)) < 1e-5 * np.linalg.norm(b.values - a.values)
    scene = {"frequency": F, "sources": [{"kind": "magnetic", "position": [0, 0, 0.01], "moment": [[1, 0], 0, 0]}]}
    (tmp_path / "s.json").write_text(json.dumps(scene))
    assert cli.main(["synth", "--scene", str(tmp_path / "s.json"), "--cells", "4", "-o", str(tmp_path / "s.nfd")]) == 0
    tr = read_nfd(tmp_path / "s.nfd")
    ref = sample_scene_on_mesh(Scene([DipoleSource((0, 0, 0.01), (1, 0, 0), "magnetic")], MED),
                               build_box_mesh(BoxSpec.cube(0.3, 4)))
    assert tr.E.tobytes() == ref.E.tobytes()


def test_compare_ls_csv(tmp_path):
    out = tmp_path / "ls.csv"
    assert cli.main(["compare-ls", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[:4] == ["side_m", "kr_max", "basis", "condition"]
    assert len(lines) == 1 + 4 * 2
    rows = [dict(zip(lines[0].split(","), ln.split(","))) for ln in lines[1:]]
    assert {r["basis"] for r in rows} == {"1", "4"}
    assert all(float(r["ls_error"]) < 1e-6 for r in rows)
    assert all(float(r["orth_radiating_error"]) < float(r["orth_outgoing_error"]) for r in rows)


def test_pipeline_matches_library(tmp_path):
    from swfdeembed.validation import cli_pipeline_matches_library

    assert cli_pipeline_matches_library(str(tmp_path))


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "swfdeembed.cli", "validate", "--criteria", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "[PASS] criterion 3" in proc.stdout
