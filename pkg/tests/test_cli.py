import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from sopieces.cli import EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from sopieces.groups import transvections

from conftest import beta_example, space

SCHEMA = json.loads((Path(__file__).parent.parent / "docs" / "schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


def write_matrix(tmp_path, g, q, name="g.txt"):
    g = np.asarray(g)
    p = tmp_path / name
    rows = "\n".join(" ".join(str(int(x)) for x in r) for r in g)
    p.write_text(f"{g.shape[0]} {g.shape[1]} {q}\n{rows}\n")
    return str(p)


def test_labels(capsys):
    doc = run_json(capsys, "labels", "--space", "D4+", "--q", "2")
    phis = sorted(tuple(r["phi"]) for r in doc["results"])
    assert len(phis) == 4
    assert doc["space"] == {"descriptor": "D4+", "D": 4, "q": 2, "type": 1}
    assert sum(r["predicted_at_q"] for r in doc["results"]) == 16


def test_pieces_small(capsys):
    doc = run_json(capsys, "pieces", "--space", "D3", "--q", "2")
    rep = doc["results"][0]
    assert rep["passed"] and rep["total"] == 4
    assert sorted(r["observed"] for r in rep["labels"]) == [1, 3]


def test_pieces_guard(capsys):
    code, _, err = run(capsys, "pieces", "--space", "D6+", "--q", "3", "--max-group", "1000")
    assert code == EXIT_USAGE and "guard" in err


def test_classify_identity(capsys, tmp_path):
    path = write_matrix(tmp_path, np.eye(4, dtype=int), 2)
    doc = run_json(capsys, "classify", "--space", "D4+", "--q", "2", "--matrix", path)
    rec = doc["results"][0]
    # N = 0 has nilpotency index 0 by convention and the trivial label
    assert rec["dickson"] == 0 and rec["nilpotency"] == 0
    assert rec["phi"] == [4] and rec["c"] == [4, 0, 0, 0]


def test_classify_beta_example(capsys, tmp_path):
    s, N = beta_example()
    path = write_matrix(tmp_path, (np.eye(3, dtype=int) + N) % 2, 2)
    doc = run_json(capsys, "classify", "--space", "D3", "--q", "2", "--matrix", path)
    rec = doc["results"][0]
    assert rec["phi"] == [1, 0, 1, 0, 1]
    assert rec["S"] is not None


def test_classify_rejects_odd_dickson(capsys, tmp_path):
    s = space("D4+", 2)
    t = transvections(s)[0]
    path = write_matrix(tmp_path, t, 2)
    code, _, err = run(capsys, "classify", "--space", "D4+", "--q", "2", "--matrix", path)
    assert code == EXIT_USAGE
    assert "not in SO (Dickson invariant 1)" in err


def test_classify_rejects_non_isometry(capsys, tmp_path):
    g = np.eye(4, dtype=int)
    g[0, 2] = 1
    path = write_matrix(tmp_path, g, 2)
    code, _, err = run(capsys, "classify", "--space", "D4+", "--q", "2", "--matrix", path)
    assert code == EXIT_USAGE and "isometry" in err


@pytest.mark.parametrize("argv", [
    ["labels", "--space", "D4x", "--q", "2"],
    ["labels", "--space", "D3", "--q", "6"],
    ["frobnicate"],
    ["verify", "--qlist", "2,x"],
    ["classify", "--space", "D3", "--q", "2", "--matrix", "/nonexistent/m.txt"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


def test_verify_small(capsys):
    doc = run_json(capsys, "verify", "--suite", "theorem17", "--dmax", "3", "--qlist", "2,3")
    (rep,) = doc["results"]
    assert rep["passed"] and rep["failed"] == 0 and rep["results"] == []


def test_verify_full_lists_every_check(capsys):
    doc = run_json(capsys, "verify", "--suite", "theorem17", "--dmax", "3", "--qlist", "2",
                   "--full")
    assert len(doc["results"][0]["results"]) == doc["results"][0]["checks"]


def test_output_is_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.json"
        code, _, _ = run(capsys, "pieces", "--space", "D4-", "--q", "2", "--out", str(path))
        assert code == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_text_format(capsys):
    code, out, _ = run(capsys, "pieces", "--space", "D3", "--q", "2", "--format", "text")
    assert code == EXIT_OK
    assert out.startswith("space D3 over GF(2)") and "PASS" in out


def test_mismatch_exit_code(capsys, monkeypatch):
    from sopieces import cli
    from sopieces.poly import CountPolynomial
    monkeypatch.setattr(cli, "card_piece", lambda lab, kind: CountPolynomial([7]))
    code, _, _ = run(capsys, "pieces", "--space", "D3", "--q", "2")
    assert code == EXIT_MISMATCH
