import io
import json
import subprocess
import sys

import pytest

from maxsub.cli import run

DBL = '{"type":"rca","N":0,"m":1,"patch":[],"tails":[{"kind":"affine","a":2,"b":0}]}'
SUCC = '{"type":"rca","N":0,"m":1,"patch":[],"tails":[{"kind":"affine","a":1,"b":1}]}'
BAD = '{"type":"rca","N":0,"m":1,"patch":[],"tails":[{"kind":"affine","a":0,"b":3}]}'


@pytest.fixture
def files(tmp_path):
    for name, text in (("dbl.term", DBL), ("succ.term", SUCC), ("bad.term", BAD)):
        (tmp_path / name).write_text(text)
    (tmp_path / "fam.txt").write_text("1 2\n2 3\n")
    return tmp_path


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_classify(files):
    code, out, _ = call("classify", str(files / "dbl.term"))
    assert code == 0 and "Inj=Yes" in out and "FI=Yes" in out and "W = 10000" in out


def test_witness(files):
    code, out, _ = call("witness", "w_inj", str(files / "succ.term"), str(files / "dbl.term"), "--window", "10000")
    assert code == 0 and "verified = true" in out and "W = 10000" in out


def test_sandbox_preset():
    code, out, _ = call("sandbox", "pipeline", "--preset", "sym3")
    assert code == 0 and "H size 18" in out and "complement size 9" in out and "maximal=true" in out


def test_exit_codes(files):
    assert call("classify", str(files / "bad.term"))[0] == 3
    assert call("classify", str(files / "nope.term"))[0] == 3
    assert call("frobnicate")[0] == 3
    assert call("classify", "dbl", "--frob")[0] == 3
    assert call("witness", "w_inj", "half", "dbl")[0] == 1
    assert call("witness", "cp_square", "dbl")[0] == 1
    assert call("witness", "w_dual", "half", "half")[0] == 3
    assert call("witness", "no_such", "half")[0] == 3


def test_unverified_certificate_exit_code(monkeypatch):
    from dataclasses import replace
    from maxsub import witnesses
    real = witnesses.WITNESSES["w_inj"]
    monkeypatch.setitem(witnesses.WITNESSES, "w_inj", lambda a, b, W: replace(real(a, b, W=W), verified=False))
    assert call("witness", "w_inj", "succ", "dbl")[0] == 2


def test_json_and_determinism(files):
    args = ["--format", "json", "compose", "succ", "succ", "--seed", "7"]
    a, b = call(*args), call(*args)
    assert a == b and a[0] == 0
    data = json.loads(a[1])
    assert data["seed"] == 7 and data["window"] == 10000
    assert data["invariants"]["d"] == {"exact": 2}


def test_eval_and_invariants():
    code, out, _ = call("eval", "colproj", "0", "1", "2", "3")
    assert code == 0 and "3 -> 2" in out
    code, out, _ = call("invariants", "mix", "--window", "100")
    assert code == 0 and "W = 100" in out and "c = inf" in out


def test_jset(files):
    code, out, _ = call("jset", str(files / "fam.txt"), "--construct")
    assert code == 0 and "{2}" in out and "{1, 3}" in out and "construct_h: {1, 3}" in out
    code, out, _ = call("--format", "json", "jset", str(files / "fam.txt"), "--avoid", "2")
    assert json.loads(out)["J"] == [[1, 3]]


def test_sandbox_closure_and_maximal():
    code, out, _ = call("sandbox", "closure", "[1,2,0]")
    assert code == 0 and "3 elements" in out
    code, out, _ = call("sandbox", "maximal", "[0,0,0]", "[1,1,1]")
    assert code == 0 and "maximal=false" in out


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "maxsub", "classify", str(files / "dbl.term")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "Inj=Yes" in proc.stdout
