import json
import os

import numpy as np
import pytest

from fields import beltrami_x3
from lambda_mhd import PeriodicField, write_pfld
from lambda_mhd.cli import main
from lambda_mhd.threads import max_workers, parallel_map


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


def test_cone_2d_member(tmp_path, capsys):
    p = write_json(tmp_path / "s.json", {"alpha": [6, 0], "beta": [4, 0], "M": [0, 6, 4, 0]})
    code, out = run(["cone", p, "--expect", "member"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["agree"] and rep["structural"]["member"]
    xi = rep["structural"]["witness"]["xi_unit"]
    assert xi[0] == 0.0 and abs(abs(xi[1]) - 1.0) < 1e-15


def test_cone_identity_nonmember(tmp_path, capsys):
    p = write_json(tmp_path / "s.json", {"alpha": [1, 0, 0], "beta": [0, 1, 0],
                                         "M": [1, 0, 0, 0, 1, 0, 0, 0, 1]})
    code, out = run(["cone", p], capsys)
    rep = json.loads(out)
    assert code == 0 and not rep["structural"]["member"] and not rep["numeric"]["member"]
    assert run(["cone", p, "--expect", "member"], capsys)[0] == 1
    assert run(["cone", p, "--dim", "2"], capsys)[0] == 2


def test_cone_malformed(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["cone", p], capsys)[0] == 2
    q = write_json(tmp_path / "q.json", {"alpha": [1, 0]})
    assert run(["cone", q], capsys)[0] == 2
    assert run(["cone", tmp_path / "missing.json"], capsys)[0] == 2


def test_hull_decompose_and_verify(tmp_path, capsys):
    lam = tmp_path / "lam.json"
    code, out = run(["hull", "decompose", "--zero", "--out", lam,
                     "--report", tmp_path / "rep.json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "verified" and rep["report"]["depth"] <= 12
    assert json.loads((tmp_path / "rep.json").read_text())["status"] == "verified"
    code, out = run(["hull", "verify", lam], capsys)
    assert code == 0 and json.loads(out)["report"]["ok"]
    # corrupt the root weight and re-verify
    obj = json.loads(lam.read_text())
    obj["tree"]["lambda"] = "1/3"
    write_json(lam, obj)
    code, out = run(["hull", "verify", lam], capsys)
    assert code == 1 and json.loads(out)["status"] == "verification_failed"


def test_hull_decompose_float_backend(tmp_path, capsys):
    st = {"u": [1e-27, 0.0, 0.0], "b": [0.0, 1e-27, 0.0],
          "S": [1e-28, 0.0, 0.0, 1e-28, 0.0, -2e-28], "a": [0.0, 0.0, 1e-28]}
    p = write_json(tmp_path / "s.json", st)
    code, out = run(["hull", "decompose", p, "--backend", "float"], capsys)
    assert code == 0 and json.loads(out)["status"] == "verified"


def test_hull_decompose_errors(tmp_path, capsys):
    st = {"u": ["1/10", 0, 0], "b": [0, "1/10", 0], "S": [0] * 6, "a": [0, "1/10", 0]}
    p = write_json(tmp_path / "s.json", st)
    code, out = run(["hull", "decompose", p], capsys)
    assert code == 3 and json.loads(out)["status"] == "ConstraintViolated"
    big = {"u": [1, 0, 0], "b": [0, 0, 0], "S": [0] * 6, "a": [0, 0, 0]}
    code, out = run(["hull", "decompose", write_json(tmp_path / "b.json", big)], capsys)
    assert code == 3 and json.loads(out)["status"] == "PreconditionViolated"
    assert run(["hull", "decompose"], capsys)[0] == 2
    assert run(["hull", "decompose", "--zero", "--r", "x"], capsys)[0] == 2
    two = write_json(tmp_path / "t.json", {"alpha": [1, 0], "beta": [0, 1], "M": [0] * 4})
    assert run(["hull", "decompose", two], capsys)[0] == 2


def test_subsol_generate_and_audit(tmp_path, capsys):
    # a 16-point grid is pre-asymptotic: relax the residual bound, skip refinement
    cfg = write_json(tmp_path / "cfg.json", {"grid": {"n": 16, "nt": 8},
                                             "tolerances": {"residual_rel": 0.5}})
    out_dir = tmp_path / "sub"
    code, out = run(["subsol", "generate", "--config", cfg, "--out", out_dir, "--certify",
                     "--no-refine"], capsys)
    summary = json.loads(out)
    assert code == 0 and summary["status"] == "ok" and summary["certificate"]["verified"]
    assert sorted(os.listdir(out_dir)) == ["S.pfld", "a.pfld", "b.pfld", "summary.json", "u.pfld"]
    report = tmp_path / "audit.json"
    code, out = run(["audit", out_dir, "--checks", "helicity,balance", "--report", report], capsys)
    assert code == 0, out
    rep = json.loads(report.read_text())
    assert rep["ok"] and [c["name"] for c in rep["checks"]] == ["helicity", "balance"]
    csv = (out_dir / "diagnostics.csv").read_text().splitlines()
    assert csv[0].startswith("t,energy") and len(csv) == 9
    # energy is not conserved by a subsolution, and the audit says so
    assert run(["audit", out_dir, "--checks", "energy"], capsys)[0] == 1


def test_subsol_trivial_and_bad_config(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"grid": {"n": 8, "nt": 4}, "eta_prime": [0, 0, 0]})
    code, out = run(["subsol", "generate", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 4 and json.loads(out)["status"] == "NontrivialityFailed"
    bad = write_json(tmp_path / "b.json", {"grid": {"n": 12}})
    assert run(["subsol", "generate", "--config", bad, "--out", tmp_path / "o"], capsys)[0] == 2


def _steady(tmp_path, T=4):
    b = np.stack([beltrami_x3(8)] * T)
    for name, data in (("u", np.zeros_like(b)), ("b", b), ("a", np.zeros_like(b))):
        write_pfld(tmp_path / f"{name}.pfld", PeriodicField(data, 0.25))


def test_audit_steady_beltrami(tmp_path, capsys):
    _steady(tmp_path)
    code, out = run(["audit", tmp_path, "--csv", tmp_path / "d.csv"], capsys)
    lines = out.splitlines()
    assert code == 0 and [ln.split()[0] for ln in lines] == ["energy", "cross", "helicity"]
    assert all(ln.split()[1] == "pass" for ln in lines)
    code, out = run(["audit", tmp_path, "--checks", "msmp,ohm,balance"], capsys)
    assert code == 0 and out.split()[1] == "skip"


def test_audit_errors(tmp_path, capsys):
    assert run(["audit", tmp_path], capsys)[0] == 2
    _steady(tmp_path)
    assert run(["audit", tmp_path, "--checks", "bogus"], capsys)[0] == 2
    write_pfld(tmp_path / "a.pfld", PeriodicField(np.zeros((3, 3, 8, 8, 8)), 0.25))
    assert run(["audit", tmp_path, "--checks", "ohm"], capsys)[0] == 2
    (tmp_path / "b.pfld").write_bytes(b"PFLD1\n")
    assert run(["audit", tmp_path], capsys)[0] == 2


def test_audit_detects_divergence(tmp_path, capsys):
    _steady(tmp_path)
    rng = np.random.default_rng(0)
    b = rng.standard_normal((4, 3, 8, 8, 8))
    write_pfld(tmp_path / "b.pfld", PeriodicField(b, 0.25))
    assert run(["audit", tmp_path, "--checks", "helicity"], capsys)[0] == 1


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("LAMBDA_MHD_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("LAMBDA_MHD_THREADS", "zero")
    assert max_workers() == max(1, os.cpu_count() or 1)
    monkeypatch.setenv("LAMBDA_MHD_THREADS", "2")
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as err:
        main(["hull"])
    assert err.value.code == 2
