import csv
import json

import pytest

from homflow import algebras, cli, lie


@pytest.fixture
def files(tmp_path):
    (tmp_path / "sl2.json").write_text(json.dumps(lie.algebra_to_json(algebras.sl2())))
    (tmp_path / "ss.json").write_text(json.dumps(lie.algebra_to_json(algebras.sl2_sum_sl2())))
    bad = lie.algebra_to_json(algebras.sl2())
    bad["brackets"][1]["coeffs"] = ["0", "0", "1"]  # [a, n-] = +n-
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    (tmp_path / "targets.json").write_text(json.dumps([[0, 0], ["1/5", "2/5"]]))
    (tmp_path / "f.json").write_text(json.dumps([{"k": [1, 0], "re": "1", "im": "0"}, {"k": [2, -1], "re": "1", "im": "0"}]))
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_example(files, capsys):
    code, out, _ = run(capsys, "classify", "--algebra", str(files / "sl2.json"), "--element", "1,0,0")
    rep = json.loads(out)
    assert code == 0 and rep["tag"] == "PartiallyHyperbolic" and rep["counts"] == [1, 1, 1]
    assert rep["certificate"]["charpoly"] == "t^3 - t"


def test_distributions_example(capsys):
    code, out, _ = run(capsys, "torus", "distributions", "--omega", "1,2", "--cutoff", "0")
    rep = json.loads(out)
    assert code == 0 and rep["basis"] == [[0, 0]] and rep["count"] == 1


def test_golden_distributions_report_tolerances(capsys):
    code, out, _ = run(capsys, "torus", "distributions", "--omega", "1,phi", "--cutoff", "100")
    rep = json.loads(out)
    assert code == 0 and rep["count"] == 1 and not rep["exact"]
    assert rep["atol"] == 1e-9 and rep["min_nonresonant"] > rep["rounding_bound"]


def test_exit_codes(files, capsys):
    assert run(capsys, "classify", "--algebra", str(files / "missing.json"), "--element", "1")[0] == 2
    assert run(capsys, "classify", "--algebra", str(files / "sl2.json"), "--element", "1,0")[0] == 2
    assert run(capsys, "--frobnicate")[0] == 64
    assert run(capsys, "classify", "--algebra", "x", "--element", "1", "--bogus")[0] == 64
    assert run(capsys, "sl2", "--algebra", str(files / "sl2.json"), "--nilpotent", "1,0,0")[0] == 2
    assert run(capsys, "keepaway", "--matrix", "1,1;0,1", "--targets", str(files / "targets.json"), "--window", "0.3,0.7,0.1")[0] == 2
    code, out, _ = run(capsys, "validate", "--algebra", str(files / "bad.json"))
    assert code == 2 and json.loads(out)["jacobi"][0]["labels"] == ["a", "n+", "n-"]


def test_validate_jordan_sl2(files, capsys):
    code, out, _ = run(capsys, "validate", "--algebra", str(files / "sl2.json"))
    assert code == 0 and json.loads(out)["valid"]
    code, out, _ = run(capsys, "jordan", "--algebra", str(files / "ss.json"), "--element", "1,0,0,0,1,0")
    rep = json.loads(out)
    assert code == 0 and rep["s_label"] == "a_1" and rep["n_label"] == "n+_2"
    code, out, _ = run(
        capsys, "sl2", "--algebra", str(files / "ss.json"), "--nilpotent", "0,1,0,0,0,0", "--commuting-with", "0,0,0,1,0,0"
    )
    rep = json.loads(out)
    assert code == 0 and rep["certificate"]["[n-,s]=0"]["holds"]


def test_torus_solve(files, capsys):
    code, out, _ = run(capsys, "torus", "solve", "--omega", "1,2", "--f", str(files / "f.json"), "--cutoff", "5")
    rep = json.loads(out)
    assert code == 0 and rep["u"] == [{"k": [1, 0], "re": "1", "im": "0"}] and rep["u_twopi_i_power"] == -1
    assert rep["obstructions"] == [{"k": [2, -1], "re": "1", "im": "0"}]


def test_keepaway_outputs_and_determinism(files, capsys):
    args = ["keepaway", "--matrix", "2,1;1,1", "--targets", str(files / "targets.json"), "--window", "0.3,0.7,0.1", "--tmax", "200"]
    code, out, _ = run(capsys, *args, "--output", str(files / "k1.json"))
    assert code == 0 and "epsilon" in out
    first = (files / "k1.json").read_bytes()
    run(capsys, *args, "--output", str(files / "k1.json"))
    assert (files / "k1.json").read_bytes() == first
    rep = json.loads((files / "k1.json").read_text())
    assert rep["trace"]["validation"]["ok"] and rep["trace"]["nesting"]["nested"]
    with open(files / "k1.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x0", "x1", "min_target_distance"] and len(rows) == 20002
    assert min(float(r[-1]) for r in rows[1:]) >= float(rep["epsilon"])


def test_precision_env_var(files, capsys, monkeypatch):
    monkeypatch.setenv("HOMFLOW_PRECISION", "double")
    code, out, err = run(
        capsys, "keepaway", "--matrix", "2,1;1,1", "--targets", str(files / "targets.json"),
        "--window", "0.3,0.7,0.1", "--csv", str(files / "o.csv"),
    )
    assert code == 3
    monkeypatch.setenv("HOMFLOW_PRECISION", "quad")
    assert run(capsys, "torus", "distributions", "--omega", "1,2", "--cutoff", "1")[0] == 2


def test_minimal_sets(capsys):
    code, out, _ = run(capsys, "minimal-sets", "--matrix", "2,1;1,1", "--count", "3", "--seed", "4")
    rep = json.loads(out)
    assert code == 0 and rep["count"] == 3 and rep["complete"] and rep["seed"] == 4
    assert all(o["in_oracle"] for o in rep["oracle"])
