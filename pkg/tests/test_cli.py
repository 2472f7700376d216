import json
import subprocess
import sys

import pytest

from treeprov.cli import main

EXAMPLE_INSTANCE = {
    "signature": {"R": 2},
    "facts": [
        {"rel": "R", "args": ["a", "a"], "id": "F1"},
        {"rel": "R", "args": ["b", "c"], "id": "F2"},
        {"rel": "R", "args": ["c", "b"], "id": "F3"},
    ],
}


@pytest.fixture
def instance_file(tmp_path):
    p = tmp_path / "instance.json"
    p.write_text(json.dumps(EXAMPLE_INSTANCE))
    return str(p)


def run_main(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr().out
    return code, out


def test_decompose(capsys, instance_file):
    code, out = run_main(capsys, "decompose", "--instance", instance_file)
    assert code == 0
    data = json.loads(out)
    assert "dom" in data


def test_decompose_width_exceeded(capsys, tmp_path):
    triangle = {"signature": {"E": 2},
                "facts": [{"rel": "E", "args": [a, b]}
                          for a, b in (("x", "y"), ("y", "z"), ("z", "x"))]}
    p = tmp_path / "t.json"
    p.write_text(json.dumps(triangle))
    assert main(["decompose", "--instance", str(p), "--width", "1"]) == 2


def test_encode_decode_roundtrip(capsys, instance_file, tmp_path):
    enc_path = str(tmp_path / "enc.json")
    assert main(["encode", "--instance", instance_file,
                 "--output", enc_path]) == 0
    code, out = run_main(capsys, "decode", "--encoding", enc_path)
    assert code == 0
    data = json.loads(out)
    assert len(data["facts"]) == 3
    assert data["signature"] == {"R": 2}


def test_decode_invalid(capsys, tmp_path):
    bad = {"k": 0, "tree": {
        "dom": [1], "fact": {"rel": "R", "args": [1]},
        "children": [{"dom": [1], "fact": {"rel": "R", "args": [1]}},
                     {"dom": []}]}}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert main(["decode", "--encoding", str(p)]) == 2


def test_compile_emits_automaton(capsys, instance_file):
    code, out = run_main(capsys, "compile", "--query", "R(x,x)",
                         "--width", "1", "--instance", instance_file)
    assert code == 0
    data = json.loads(out)
    assert data["states"] and data["iota"]


def test_provenance_bool(capsys, instance_file):
    code, out = run_main(capsys, "provenance", "--instance", instance_file,
                         "--query", "R(x,y),R(y,x)")
    assert code == 0
    data = json.loads(out)
    names = {g.get("name") for g in data["gates"] if g["type"] == "inp"}
    assert names == {"F1", "F2", "F3"}


def test_provenance_nx_expand(capsys, instance_file):
    code, out = run_main(capsys, "provenance", "--instance", instance_file,
                         "--query", "R(x,y),R(y,x)", "--mode", "nx",
                         "--expand")
    assert code == 0
    assert out.strip() == "F1^2 + 2*F2*F3"


def test_provenance_nx_semiring(capsys, instance_file, tmp_path):
    assign = tmp_path / "assign.json"
    assign.write_text(json.dumps({"F1": 1, "F2": 1, "F3": 1}))
    code, out = run_main(capsys, "provenance", "--instance", instance_file,
                         "--query", "R(x,y),R(y,x)", "--mode", "nx",
                         "--semiring", "N", "--assign", str(assign))
    assert code == 0
    assert out.strip() == "3"


def test_prob_pc(capsys, tmp_path):
    pc = {
        "signature": {"R": 1},
        "facts": [{"rel": "R", "args": ["a"], "id": "F1", "cond": "x & !y"}],
        "events": {"x": "1/2", "y": "1/3"},
    }
    p = tmp_path / "pc.json"
    p.write_text(json.dumps(pc))
    code, out = run_main(capsys, "prob", "--query", "R(x)", "--pc", str(p))
    assert code == 0
    assert out.strip() == "1/3"


def test_prob_bid(capsys, tmp_path):
    bid = {
        "signature": {"R": 2},
        "facts": [
            {"rel": "R", "args": ["k", "a"], "id": "F1", "prob": "3/10"},
            {"rel": "R", "args": ["k", "b"], "id": "F2", "prob": "5/10"},
        ],
        "key_positions": {"R": [0]},
    }
    p = tmp_path / "bid.json"
    p.write_text(json.dumps(bid))
    code, out = run_main(capsys, "prob", "--query", "R(x,y)", "--bid", str(p))
    assert code == 0
    assert out.strip() == "4/5"


def test_prob_prxml(capsys, tmp_path):
    doc = {"tree": {"label": "r", "children": [
        {"node": {"label": "ind", "kind": "ind",
                  "children": [{"prob": "2/7",
                                "node": {"label": "a"}}]}}]}}
    p = tmp_path / "doc.json"
    p.write_text(json.dumps(doc))
    code, out = run_main(capsys, "prob", "--query", "P_a(x)",
                         "--prxml", str(p))
    assert code == 0
    assert out.strip() == "2/7"


def test_count(capsys, instance_file):
    code, out = run_main(capsys, "count", "--query", "R(x,y)",
                         "--free", "x", "--instance", instance_file)
    assert code == 0
    assert out.strip() == "3"


def test_prxml_convert(capsys, tmp_path):
    doc = {"tree": {"label": "r", "children": [
        {"node": {"label": "mux", "kind": "mux",
                  "children": [{"prob": "3/10", "node": {"label": "a"}},
                               {"prob": "5/10", "node": {"label": "b"}}]}}]}}
    p = tmp_path / "doc.json"
    p.write_text(json.dumps(doc))
    code, out = run_main(capsys, "prxml-convert", "--input", str(p),
                         "--to", "binary")
    assert code == 0
    data = json.loads(out)
    assert data["tree"]["label"] == "r"
    code, out = run_main(capsys, "prxml-convert", "--input", str(p),
                         "--to", "fie")
    assert code == 0
    assert json.loads(out)["events"]
    code, out = run_main(capsys, "prxml-convert", "--input", str(p),
                         "--to", "pc")
    assert code == 0
    assert json.loads(out)["events"]


def test_output_deterministic(capsys, instance_file):
    _, out1 = run_main(capsys, "encode", "--instance", instance_file)
    _, out2 = run_main(capsys, "encode", "--instance", instance_file)
    assert out1 == out2


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "treeprov.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "decompose" in proc.stdout
