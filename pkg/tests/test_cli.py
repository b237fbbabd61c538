import csv
import io
import json
import math

import pytest

from maxlag2d import bench
from maxlag2d.cli import main
from maxlag2d.mesh import read_mesh


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "0.1.0" in capsys.readouterr().out


def test_mesh_refine_singular_pipeline(tmp_path, capsys):
    m, r, prov = tmp_path / "m.tri", tmp_path / "r.tri", tmp_path / "r.json"
    assert main(["mesh-gen", "--n", "3", "--pattern", "criss-cross", "-o", str(m)]) == 0
    assert read_mesh(m).n_triangles == 36
    assert main(["refine", "--split", "ps", "-i", str(m), "-o", str(r), "--provenance",
                 str(prov)]) == 0
    assert read_mesh(r).n_triangles == 216
    assert main(["singular", "-i", str(r), "--provenance", str(prov)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["theta_min"] >= 0
    assert main(["singular", "-i", str(m), "--report", "text"]) == 0
    assert "theta_min" in capsys.readouterr().out


def test_spectrum_stdout(capsys):
    assert main(["spectrum", "--n", "4", "--split", "ps", "--degree", "1", "--nev", "3"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert [r["index"] for r in rows] == ["1", "2", "3"]
    assert float(rows[0]["lambda"]) == pytest.approx(math.pi ** 2, rel=1e-2)


def test_spectrum_imported_with_provenance(tmp_path, capsys):
    m, r, prov, out = (tmp_path / n for n in ("m.tri", "r.tri", "r.json", "s.csv"))
    main(["mesh-gen", "--n", "3", "-o", str(m)])
    main(["refine", "--split", "ct", "-i", str(m), "-o", str(r), "--provenance", str(prov)])
    assert main(["spectrum", "-i", str(r), "--provenance", str(prov), "--degree", "2",
                 "--nev", "2", "--out", str(out)]) == 0
    rows = rows_of(out.read_text())
    assert float(rows[0]["error_vs_reference"]) < 1e-2


def test_convergence_cli(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["convergence", "--split", "ps", "--degree", "1", "--levels", "2", "4", "8",
                 "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "n,h,n_dofs,lambda,error,rate"


def test_verify_cli(tmp_path, capsys):
    m = tmp_path / "m.tri"
    main(["mesh-gen", "--n", "2", "-o", str(m)])
    assert main(["verify", "-i", str(m), "--split", "ps"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["exactness_residual"] < 1e-12 and report["infsup_beta"] > 0.2


@pytest.mark.parametrize("argv", [
    ["spectrum", "--degree", "0"],
    ["spectrum", "--split", "wf"],
    ["spectrum", "-i", "/nonexistent/mesh.tri"],
    ["convergence", "--levels", "2", "4"],
    ["refine", "--split", "ps", "-i", "/nonexistent.tri", "-o", "/tmp/x.tri"],
    ["mesh-gen", "--n", "0", "-o", "/tmp/x.tri"],
    [],
])
def test_config_errors_exit_3(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 3


def test_bad_mesh_file_exit_3(tmp_path):
    bad = tmp_path / "bad.tri"
    bad.write_text("3 1 0\n0 0\n1 0\n")
    assert main(["spectrum", "-i", str(bad), "--split", "ps"]) == 3


def test_nonconvergence_exit_2(monkeypatch, capsys):
    real = bench.lowest_nonzero

    def stalled(*args, **kwargs):
        values, res = real(*args, **kwargs)
        res.converged = False
        return values, res

    monkeypatch.setattr(bench, "lowest_nonzero", stalled)
    assert main(["spectrum", "--n", "2", "--nev", "2"]) == 2
    assert len(rows_of(capsys.readouterr().out)) == 2
