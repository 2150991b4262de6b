"""CLI round trips, exit codes, and output determinism."""

import json
import os

import pytest

from sepcert.cli import main

CORPUS = os.path.join(os.path.dirname(__file__), "..", "corpus")


def corpus(name):
    return os.path.join(CORPUS, name)


def run(argv):
    return main(argv)


def test_separate_verify_roundtrip(tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert run(["separate", corpus("diag_4_vs_2.json"), "--output", str(out)]) == 0
    assert out.exists()
    assert run(["verify", str(out), corpus("diag_4_vs_2.json")]) == 0
    text = capsys.readouterr().out
    assert "verified" in text


def test_output_determinism(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run(["separate", corpus("bs12_t_vs_a.json"), "--output", str(a)])
    run(["separate", corpus("bs12_t_vs_a.json"), "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_all_corpus_files(tmp_path):
    for name in ("bs12_t_vs_a.json", "diag_4_vs_2.json",
                 "gauss_units.json", "sqrt2_diag.json"):
        out = tmp_path / (name + ".cert")
        assert run(["separate", corpus(name), "--output", str(out)]) == 0
        assert run(["verify", str(out), corpus(name)]) == 0


def test_in_subgroup_exit_code(tmp_path, capsys):
    problem = {
        "n": 2,
        "gamma": [{"label": "t", "matrix": [["2", "0"], ["0", "1"]]}],
        "subgroup": [{"label": "g", "matrix": [["4", "0"], ["0", "1"]]}],
        "h": [["4", "0"], ["0", "1"]],
    }
    path = tmp_path / "inside.json"
    path.write_text(json.dumps(problem))
    assert run(["separate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "InSubgroup" in err


def test_resource_exit_code(tmp_path, capsys):
    problem = {
        "n": 2,
        "gamma": [{"label": "t", "matrix": [["2", "0"], ["0", "1"]]},
                  {"label": "u", "matrix": [["3", "0"], ["0", "1"]]}],
        "subgroup": [{"label": "g", "matrix": [["4", "0"], ["0", "1"]]}],
        "h": [["2", "0"], ["0", "1"]],
        "config": {"search_limit": 3},
    }
    path = tmp_path / "tight.json"
    path.write_text(json.dumps(problem))
    assert run(["separate", str(path)]) == 2
    assert "ModulusNotFound" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "h": [["1"]]}')
    assert run(["separate", str(bad)]) == 3
    bad2 = tmp_path / "bad2.json"
    bad2.write_text("not json")
    assert run(["separate", str(bad2)]) == 3


def test_tampered_certificate(tmp_path, capsys):
    out = tmp_path / "cert.json"
    run(["separate", corpus("diag_4_vs_2.json"), "--output", str(out)])
    data = json.loads(out.read_text())
    data["h_image"][0][0][0] = [0]
    out.write_text(json.dumps(data))
    assert run(["verify", str(out), corpus("diag_4_vs_2.json")]) == 1
    assert "mismatch" in capsys.readouterr().out


def test_cmd_chevalley(capsys):
    assert run(["chevalley", "--units=-1,2", "--r", "2", "--avoid", "2"]) == 0
    out = capsys.readouterr().out
    assert "q=15" in out

    assert run(["chevalley", "--units", "2", "--r", "2", "--avoid", "2"]) == 0
    assert "q=3" in capsys.readouterr().out


def test_cmd_units_basis(capsys):
    assert run(["units-basis", "--units", "2,4,8"]) == 0
    out = capsys.readouterr().out
    assert "p=1" in out and "I=[0]" in out


def test_cmd_triangularize(tmp_path, capsys):
    problem = {
        "n": 2,
        "generators": [{"label": "s", "matrix": [["0", "1"], ["1", "0"]]}],
    }
    path = tmp_path / "tri.json"
    path.write_text(json.dumps(problem))
    assert run(["triangularize", str(path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    rows = payload["generators"][0]["matrix"]
    assert rows[1][0] == ["0"]  # strictly lower entry vanished


def test_cmd_demo_bs12(capsys):
    assert run(["demo-bs12", "--min", "3", "--max", "23"]) == 0
    out = capsys.readouterr().out
    assert "p=  3  order=  3" in out
    assert "odd=True" in out and "relation=True" in out
