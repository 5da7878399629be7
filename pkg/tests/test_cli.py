import json

import numpy as np
import pytest

from bsdforms.cli import main
from bsdforms.model import Embedding, ModelSignature, boundary_defect
from bsdforms.normalize import Certificate


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_verify_linear(tmp_path, capsys):
    f = tmp_path / "lin.json"
    assert run(["gen", "linear", "3", "1", "5", "1", "-o", str(f)], capsys)[0] == 0
    code, out, _ = run(["verify", str(f)], capsys)
    assert code == 0 and out.strip() == "residual: zero to degree 6"


def test_gen_flags(tmp_path, capsys):
    f = tmp_path / "w.json"
    assert run(["gen", "whitney", "--p", "3", "--q", "1", "--pp", "5", "--qq", "1", "-o", str(f)], capsys)[0] == 0
    E = Embedding.loads(f.read_text())
    assert E.source == ModelSignature(3, 1) and E.exact
    assert run(["verify", str(f)], capsys)[0] == 0


def test_gen_stdout_round_trip(capsys):
    code, out, _ = run(["gen", "whitney", "3", "1", "5", "1"], capsys)
    assert code == 0
    E = Embedding.loads(out)
    assert E.dumps() + "\n" == out


def test_gen_scramble_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert run(["gen", "whitney", "3", "1", "5", "1", "--scramble", "2", "--seed", "7", "-o", str(f)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    autos = tmp_path / "a.autos.json"
    assert autos.read_bytes() == (tmp_path / "b.autos.json").read_bytes()
    rec = json.loads(autos.read_text())
    assert len(rec["source"]) == 2
    c = tmp_path / "c.json"
    run(["gen", "whitney", "3", "1", "5", "1", "--scramble", "2", "--seed", "8", "-o", str(c)], capsys)
    assert c.read_bytes() != a.read_bytes()


def test_classify_scrambled(tmp_path, capsys):
    f = tmp_path / "w.json"
    run(["gen", "whitney", "3", "1", "5", "1", "--scramble", "2", "--seed", "7", "-o", str(f)], capsys)
    code, out, _ = run(["classify", str(f)], capsys)
    assert code == 0 and out.strip() == "Whitney(sigma=[1])"
    cert = Certificate.loads((tmp_path / "w.cert.json").read_text())
    assert cert.check_replay(Embedding.loads(f.read_text()))
    first = (tmp_path / "w.cert.json").read_bytes()
    run(["classify", str(f)], capsys)
    assert (tmp_path / "w.cert.json").read_bytes() == first


def test_classify_linear_output(tmp_path, capsys):
    f = tmp_path / "l.json"
    run(["gen", "linear", "3", "1", "5", "1", "-o", str(f)], capsys)
    out_cert = tmp_path / "cert.json"
    code, out, _ = run(["classify", str(f), "-o", str(out_cert)], capsys)
    assert code == 0 and out.strip() == "Linear" and out_cert.exists()


def test_verify_broken(tmp_path, capsys):
    f = tmp_path / "l.json"
    run(["gen", "linear", "3", "1", "5", "1", "-o", str(f)], capsys)
    d = json.loads(f.read_text())
    d["F"][0][0] = "(2+0i)*z1_1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run(["verify", str(bad)], capsys)
    assert code == 1
    assert "monomial z1_1*zb1_1" in out and "coefficient -3+0i" in out
    code, out, _ = run(["verify", "--json", str(bad)], capsys)
    rep = json.loads(out)
    assert code == 1 and rep["zero"] is False and rep["offender"]["monomial"] == "z1_1*zb1_1"
    code, _, err = run(["classify", str(bad)], capsys)
    assert code == 1 and "z1_1*zb1_1" in err


def test_parse_errors(tmp_path, capsys):
    junk = tmp_path / "junk.json"
    junk.write_text("{")
    assert run(["verify", str(junk)], capsys)[0] == 2
    junk.write_text(json.dumps({"source": {"p": 3, "q": 1}}))
    assert run(["verify", str(junk)], capsys)[0] == 2
    assert run(["verify", str(tmp_path / "missing.json")], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["gen", "linear", "3", "1"], capsys)[0] == 2


def test_hypothesis_violation(tmp_path, capsys):
    code, _, err = run(["gen", "linear", "3", "1", "6", "1"], capsys)
    assert code == 3 and "p' - q'" in err
    code, _, _ = run(["gen", "linear", "3", "3", "5", "1"], capsys)
    assert code == 3
    f = tmp_path / "l.json"
    run(["gen", "linear", "3", "1", "5", "1", "--degree", "3", "-o", str(f)], capsys)
    assert not f.exists()


def test_backend_env(tmp_path, capsys, monkeypatch):
    f = tmp_path / "l.json"
    monkeypatch.setenv("BSD_BACKEND", "float")
    assert run(["gen", "linear", "3", "1", "5", "1", "-o", str(f)], capsys)[0] == 0
    assert not Embedding.loads(f.read_text()).exact
    assert run(["verify", str(f)], capsys)[0] == 0


def test_sample_and_cayley(tmp_path, capsys):
    s, b, back = tmp_path / "s.csv", tmp_path / "b.csv", tmp_path / "back.csv"
    assert run(["sample", "20", "--p", "4", "--q", "2", "--seed", "3", "-o", str(s)], capsys)[0] == 0
    assert run(["cayley", "forward", str(s), "--p", "4", "--q", "2", "-o", str(b)], capsys)[0] == 0
    assert run(["cayley", "inverse", str(b), "--p", "4", "--q", "2", "-o", str(back)], capsys)[0] == 0
    x = np.loadtxt(s, delimiter=",")
    y = np.loadtxt(back, delimiter=",")
    assert x.shape == (20, 16) and np.abs(x - y).max() <= 1e-10
    for row in np.loadtxt(b, delimiter=","):
        M = (row[0::2] + 1j * row[1::2]).reshape(4, 2)
        assert np.abs(boundary_defect(M)).max() <= 1e-10
    s2 = tmp_path / "s2.csv"
    run(["sample", "20", "--p", "4", "--q", "2", "--seed", "3", "-o", str(s2)], capsys)
    assert s.read_bytes() == s2.read_bytes()


def test_sample_shilov(tmp_path, capsys):
    s = tmp_path / "b.csv"
    assert run(["sample", "5", "--kind", "shilov", "--p", "3", "--q", "1", "-o", str(s)], capsys)[0] == 0
    rows = np.loadtxt(s, delimiter=",")
    v = rows[:, 0::2] + 1j * rows[:, 1::2]
    assert np.allclose(np.linalg.norm(v, axis=1), 1)


def test_cayley_bad_rows(tmp_path, capsys):
    f = tmp_path / "x.csv"
    f.write_text("1,2,3\n")
    assert run(["cayley", "forward", str(f), "--p", "3", "--q", "1"], capsys)[0] == 2
    f.write_text("a,b\n")
    assert run(["cayley", "forward", str(f), "--p", "3", "--q", "1"], capsys)[0] == 2


def test_bad_tol(capsys):
    assert run(["sample", "3", "--p", "3", "--q", "1", "--tol", "-1"], capsys)[0] == 2
