import json

import pytest

from lipfree.cli import main
from lipfree.io import InputError, load_space, space_from_json


@pytest.fixture
def files(tmp_path):
    (tmp_path / "S.json").write_text(json.dumps(
        {"points": ["0", "a", "b"], "basepoint": "0", "dist": [[0, 1, 1], [1, 0, 2], [1, 2, 0]]}))
    (tmp_path / "M.json").write_text(json.dumps(
        {"terms": [{"point": "a", "coef": 2}, {"point": "b", "coef": -1}]}))
    (tmp_path / "N.json").write_text(json.dumps({"points": ["0", "a"]}))
    return tmp_path


def test_norm_prints_value_and_writes_certificate(files, capsys):
    cert = files / "cert.json"
    code = main(["norm", "--space", str(files / "S.json"), "--molecule", str(files / "M.json"),
                 "--cert", str(cert)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "3"
    data = json.loads(cert.read_text())
    assert data["value"] == 3 and data["gap"] == 0 and data["exact"]
    assert {p["point"] for p in data["potentials"]} == {"0", "a", "b"}


def test_quotient_norm(files, capsys):
    with pytest.warns(UserWarning, match="dropping"):
        code = main(["norm", "--space", str(files / "S.json"), "--molecule", str(files / "M.json"),
                     "--subset", str(files / "N.json")])
    assert code == 0
    # the term on "a" vanishes; -delta_b is one unit from the subset
    assert capsys.readouterr().out.strip() == "1"


def test_grid_space_file(tmp_path, capsys):
    (tmp_path / "G.json").write_text(json.dumps(
        {"grid": {"dim": 2, "norm": "l1", "points": [[0, 0], [1, 0], [0, 2]], "basepoint": [0, 0]}}))
    (tmp_path / "M.json").write_text(json.dumps(
        {"terms": [{"point": [1, 0], "coef": 1}, {"point": [0, 2], "coef": -1}]}))
    assert main(["norm", "--space", str(tmp_path / "G.json"), "--molecule", str(tmp_path / "M.json")]) == 0
    assert capsys.readouterr().out.strip() == "3"


@pytest.mark.parametrize("bad", [
    {"points": ["0", "a"], "dist": [[0, 1]]},
    {"points": ["0", "a", "b"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]},
    {"points": ["0", "0"], "dist": [[0, 1], [1, 0]]},
    {"grid": {"dim": 2, "points": [[0, 0], [1]]}},
])
def test_bad_spaces(bad):
    with pytest.raises(InputError):
        space_from_json(bad)


def test_input_errors_exit_2(files, capsys):
    assert main(["norm", "--space", str(files / "missing.json"),
                 "--molecule", str(files / "M.json")]) == 2
    (files / "X.json").write_text(json.dumps({"terms": [{"point": "zz", "coef": 1}]}))
    assert main(["norm", "--space", str(files / "S.json"), "--molecule", str(files / "X.json")]) == 2
    (files / "B.json").write_text("{not json")
    assert main(["norm", "--space", str(files / "B.json"), "--molecule", str(files / "M.json")]) == 2


def test_enumerate_csv(capsys):
    assert main(["enumerate", "--dim", "2", "--radius", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,x1,x2,parent,pred_coord,pred_threshold,pred_sign"
    assert len(lines) == 10
    assert lines[-1].startswith("9,-1,-1,")
    assert lines[2] == "2,1,0,1,1,1,>="


def test_enumerate_to_file(tmp_path):
    out = tmp_path / "steps.csv"
    assert main(["enumerate", "--dim", "1", "--radius", "2", "--emit", str(out)]) == 0
    assert out.read_bytes().count(b"\n") == 6 and b"\r" not in out.read_bytes()


def test_retract(capsys):
    assert main(["retract", "--dim", "2", "--n", "2", "--point", "5,-3"]) == 0
    assert main(["retract", "--n", "3", "--point=-2,7"]) == 0
    assert capsys.readouterr().out.split() == ["1,0", "-1,0"]


def test_retract_bad_point():
    assert main(["retract", "--n", "2", "--point", "a,b"]) == 2
    assert main(["retract", "--dim", "3", "--n", "2", "--point", "1,2"]) == 2


def test_project(tmp_path, capsys):
    (tmp_path / "M.json").write_text(json.dumps(
        {"terms": [{"point": [2, 1], "coef": 1}, {"point": [-1, 0], "coef": 2}]}))
    assert main(["project", "--n", "5", "--molecule", str(tmp_path / "M.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"terms": [{"coef": 2, "point": [-1, 0]}, {"coef": 1, "point": [1, 1]}]}


def test_verify_retractions(capsys):
    assert main(["verify", "retractions", "--box", "3"]) == 0
    assert "verdict: PASS" in capsys.readouterr().out


def test_verify_basis_emits_per_n(tmp_path, capsys):
    out = tmp_path / "basis.csv"
    assert main(["verify", "basis", "--samples", "30", "--emit", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "n,max_ratio,witness_molecule" and len(rows) == 26


def test_verify_maps_csv_to_stdout(capsys):
    assert main(["verify", "maps", "--map", "s", "--samples", "300", "--csv", "-"]) == 0
    out = capsys.readouterr()
    assert out.out.startswith("report,check,status,bound,observed,witness\n")
    assert "verdict" in out.err


def test_verify_l1sum_from_files(tmp_path, capsys):
    (tmp_path / "S.json").write_text(json.dumps(
        {"points": ["0", "a", "b"], "dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]}))
    (tmp_path / "N.json").write_text(json.dumps(["0"]))
    (tmp_path / "C.json").write_text(json.dumps({"clusters": [
        {"points": ["a"], "molecule": {"terms": [{"point": "a", "coef": 1}]}},
        {"points": ["b"], "molecule": {"terms": [{"point": "b", "coef": -1}]}}]}))
    args = ["verify", "l1sum", "--space", str(tmp_path / "S.json"), "--subset",
            str(tmp_path / "N.json"), "--clusters", str(tmp_path / "C.json")]
    assert main(args + ["--k", "0.5"]) == 0
    assert main(args + ["--k", "2"]) == 2  # hypothesis fails


def test_seed_from_environment(monkeypatch, tmp_path):
    paths = []
    for seed in ("3", "3", "4"):
        monkeypatch.setenv("LIPFREE_SEED", seed)
        p = tmp_path / f"out{len(paths)}.csv"
        assert main(["verify", "maps", "--map", "s", "--samples", "200", "--csv", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] != paths[2]
    monkeypatch.setenv("LIPFREE_SEED", "x")
    assert main(["verify", "maps", "--map", "s", "--samples", "10"]) == 2


def test_bench(capsys):
    assert main(["bench", "--repeats", "1"]) == 0
    assert capsys.readouterr().out.startswith("points,repeats,flow_seconds,brute_seconds")


def test_load_space_roundtrip(files):
    sp = load_space(files / "S.json")
    assert sp.points == ("0", "a", "b") and sp.is_integral
