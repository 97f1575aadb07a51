from __future__ import annotations

import json
import subprocess
import sys

import pytest

from mpert.cli import JobSpec, job_from_args, build_parser, main, run
from mpert.errors import SchemaError

KP = [["X1^2", "X1*X2"], ["X1*X2", "X2^2"]]
SYM = [["1", "X1"], ["X1", "-1"]]


def job(matrix, **kw):
    doc = {"format": 1, "variables": ["X1", "X2"], "truncation": 6, "matrix": matrix}
    doc.update(kw)
    return doc


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def invoke(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, json.loads(out.out) if out.out else None, out.err


def test_check_on_kp_reports_violation(tmp_path, capsys):
    code, doc, _ = invoke(capsys, ["check", write(tmp_path, "kp.json", job(KP))])
    assert code == 3
    assert doc["status"] == "hypothesis-violated"
    assert doc["result"]["monomial_unit"] is False


def test_diagonalize_kp_fails_at_root(tmp_path, capsys):
    code, doc, err = invoke(capsys, ["diagonalize", write(tmp_path, "kp.json", job(KP))])
    assert code == 3
    assert doc["error"]["class"] == "HypothesisViolated" and doc["error"]["locus"] == "root"
    assert err.startswith("mpert: HypothesisViolated at root")


@pytest.mark.parametrize("backend", ["exact", "float"])
@pytest.mark.parametrize("command", ["diagonalize", "realform", "svd"])
def test_result_bundles_verify(tmp_path, capsys, backend, command):
    src = write(tmp_path, "a.json", job(SYM, backend=backend))
    out = str(tmp_path / "out.json")
    assert main([command, src, "-o", out]) == 0
    code, doc, _ = invoke(capsys, ["verify", out])
    assert code == 0 and doc["status"] == "ok"
    limit = 0 if backend == "exact" else 1e-20
    assert all(v <= limit for v in doc["report"]["residuals"].values())


def tamper(path, edit):
    doc = json.loads(open(path).read())
    edit(doc)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def test_verify_catches_tampering(tmp_path, capsys):
    src = write(tmp_path, "a.json", job(SYM))
    out = str(tmp_path / "out.json")
    assert main(["diagonalize", src, "-o", out]) == 0

    def bump(doc):
        doc["result"]["U"]["entries"][0][0]["terms"][0]["coeff"][0] = "7/5"
    tamper(out, bump)
    code, doc, _ = invoke(capsys, ["verify", out])
    assert code == 5 and doc["status"] == "residual-failure"

    assert main(["diagonalize", src, "-o", out]) == 0
    tamper(out, lambda d: d["result"]["D"].reverse())
    code, _, _ = invoke(capsys, ["verify", out])
    assert code == 5


def test_pullback_then_check(tmp_path, capsys):
    rot = [["X1", "X2"], ["-X2", "X1"]]
    src = write(tmp_path, "r.json", job(rot))
    pulled = str(tmp_path / "p.json")
    assert main(["pullback", src, "--map", "X2=X1*X2", "-o", pulled]) == 0
    code, doc, _ = invoke(capsys, ["check", pulled])
    assert code == 0 and doc["status"] == "ok"


def test_refine_exit_codes(tmp_path, capsys):
    ok = write(tmp_path, "ok.json", job([["X1*(1 + i*X2)"]]))
    bad = write(tmp_path, "bad.json", job([["X1 + i*X2"]]))
    assert invoke(capsys, ["svd", ok, "--refine"])[0] == 0
    code, doc, _ = invoke(capsys, ["svd", bad, "--refine"])
    assert code == 3 and doc["error"]["class"] == "RefinementHypothesisViolated"


def test_field_limitation_exit_code(tmp_path, capsys):
    real = write(tmp_path, "r.json", job([["2*X1", "3*X1"], ["-3*X1", "2*X1"]]))
    code, doc, _ = invoke(capsys, ["svd", real, "--real", "--refine"])
    assert code == 4 and doc["error"]["family"] == "field-limitation"
    assert invoke(capsys, ["svd", real, "--real", "--refine", "--backend", "float"])[0] == 0


@pytest.mark.parametrize("bad", [
    job([["X1 +"]]),
    job(SYM, backend="ball"),
    job(SYM, colour="red"),
    {"format": 2, "variables": 1, "truncation": 2, "matrix": [["1"]]},
])
def test_parse_errors_exit_2(tmp_path, capsys, bad):
    code, doc, _ = invoke(capsys, ["diagonalize", write(tmp_path, "b.json", bad)])
    assert code == 2 and doc["error"]["family"] == "parse"


def test_not_normal_input(tmp_path, capsys):
    src = write(tmp_path, "n.json", job([["1", "X1"], ["0", "-1"]]))
    code, doc, _ = invoke(capsys, ["diagonalize", src])
    assert code == 3 and doc["error"]["class"] == "NotNormal"


def test_algebra_error_exit_code(tmp_path, capsys):
    src = write(tmp_path, "n.json", job([["1", "X1"]]))
    code, doc, _ = invoke(capsys, ["diagonalize", src])
    assert code == 6 and doc["error"]["family"] == "algebra"


def test_bad_environment_variable(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MPERT_THREADS", "many")
    code, _, _ = invoke(capsys, ["check", write(tmp_path, "a.json", job(SYM))])
    assert code == 2


def test_precedence_flag_env_file_default(monkeypatch):
    parser = build_parser()
    doc = job(SYM, backend="float", precision_bits=128)
    args = parser.parse_args(["svd", "x.json"])
    assert job_from_args(args, dict(doc)).precision_bits == 128
    assert job_from_args(args, job(SYM)).precision_bits == 256
    monkeypatch.setenv("MPERT_PRECISION_BITS", "192")
    assert job_from_args(args, dict(doc)).precision_bits == 192
    args = parser.parse_args(["svd", "x.json", "--precision-bits", "320"])
    assert job_from_args(args, dict(doc)).precision_bits == 320


def test_jobspec_round_trip():
    js = JobSpec.from_dict(dict(job(SYM, command="svd", refine=True), backend="float"))
    assert JobSpec.from_dict(js.to_dict()) == js
    with pytest.raises(SchemaError):
        JobSpec.from_dict(job(SYM, command="svd", colour="red"))
    with pytest.raises(SchemaError):
        JobSpec.from_dict(job(SYM, command="factor"))


def test_output_is_deterministic():
    js = JobSpec.from_dict(job(SYM, command="diagonalize"))
    first, _ = run(js)
    second, _ = run(JobSpec.from_dict(job(SYM, command="diagonalize")))
    assert json.dumps(first) == json.dumps(second)


def test_module_entry_point(tmp_path):
    src = write(tmp_path, "a.json", job(SYM))
    a = subprocess.run([sys.executable, "-m", "mpert", "diagonalize", src],
                       capture_output=True, text=True, check=True).stdout
    b = subprocess.run([sys.executable, "-m", "mpert", "diagonalize", src],
                       capture_output=True, text=True, check=True,
                       env={"MPERT_PURE_PYTHON": "1", "PATH": ""}).stdout
    assert a == b
