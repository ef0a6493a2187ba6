import json
import os
import subprocess
import sys

import numpy as np
import pytest

from mahler3d import shape
from mahler3d.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_product_shapes(capsys):
    code, out, _ = run(capsys, "product", "--shape", "simplex")
    assert code == 0 and json.loads(out)["product"] == pytest.approx(64 / 9, rel=1e-9)
    code, out, _ = run(capsys, "product", "--shape", "cube")
    assert code == 0 and json.loads(out)["product"] == pytest.approx(32 / 3, rel=1e-9)


def test_product_bad_off(capsys, tmp_path):
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n8 6\n")
    code, _, err = run(capsys, "product", "--in", str(bad))
    assert code == 2 and "line 2" in err


def test_product_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "product", "--in", str(tmp_path / "none.off"))
    assert code == 2


def test_product_nonconvergence(capsys, monkeypatch):
    code, _, err = run(capsys, "product", "--shape", "cube", "--tol", "1e-300")
    assert code == 3 and "converge" in err


def test_verify_tetrahedron(capsys):
    code, out, _ = run(capsys, "verify", "--shape", "tetrahedron")
    rep = json.loads(out)
    inst = rep["instances"][0]
    assert code == 0 and inst["dim"] == 4 and inst["bound"] == 4
    assert inst["checks"]["dimension_bound"]["equality"]


def test_verify_cube(capsys):
    code, out, _ = run(capsys, "verify", "--shape", "cube")
    assert code == 0 and json.loads(out)["instances"][0]["alternative"] == "PolarMoves"


def test_verify_is_deterministic(capsys):
    _, a, _ = run(capsys, "verify", "--seed", "4", "--count", "2", "--jobs", "1")
    _, b, _ = run(capsys, "verify", "--seed", "4", "--count", "2", "--jobs", "1")
    assert a == b and json.loads(a)["summary"]["pass"]


def test_descend_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "descend", "--shape", "simplex", "--out", str(tmp_path / "s"))
    assert code == 0 and json.loads(out)["terminated"] == "ReachedTetrahedron"
    code, out, _ = run(capsys, "descend", "--random", "10", "--seed", "3", "--cap-iter", "4",
                       "--out", str(tmp_path / "r"))
    p = json.loads(out)["products"]
    assert code == 0 and all(b < a for a, b in zip(p, p[1:]))
    assert (tmp_path / "r" / "trace.jsonl").exists()


def test_sweep_cube_auto(capsys):
    code, out, _ = run(capsys, "sweep", "--shape", "cube", "--theta", "1", "0", "0")
    rows = out.strip().splitlines()
    assert code == 0 and len(rows) == 10
    assert all(float(r.split(",")[1]) == pytest.approx(8.0, rel=1e-12) for r in rows[1:])


def test_sweep_simplex_shear(capsys, tmp_path):
    P = shape("simplex")
    side = tmp_path / "shear.json"
    side.write_text(json.dumps({"theta": [0, 1, 0], "alpha": P.points[:, 0].tolist()}))
    code, out, _ = run(capsys, "sweep", "--shape", "simplex", "--speed", str(side))
    prods = [float(r.split(",")[3]) for r in out.strip().splitlines()[1:]]
    assert code == 0 and np.allclose(prods, 64 / 9, rtol=1e-6)


def test_sweep_inadmissible(capsys, tmp_path):
    side = tmp_path / "bad.json"
    alpha = [0.0] * 8
    alpha[7] = 1.0  # the corner (1, 1, 1)
    side.write_text(json.dumps({"theta": [1, 0, 0], "alpha": alpha}))
    code, _, err = run(capsys, "sweep", "--shape", "cube", "--speed", str(side))
    assert code == 4 and "facet" in err and err.count("vertices") == 1


def test_sweep_bad_sidecar(capsys, tmp_path):
    side = tmp_path / "bad.json"
    side.write_text("{not json")
    code, _, _ = run(capsys, "sweep", "--shape", "cube", "--speed", str(side))
    assert code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mahler3d", "product", "--shape", "octahedron"],
                         capture_output=True, text=True, check=True, env=os.environ.copy())
    assert json.loads(out.stdout)["product"] == pytest.approx(32 / 3, rel=1e-9)
