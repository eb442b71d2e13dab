import csv
import json
import math

import pytest

from rdsthermo import cli

from conftest import FIXTURES, LOG2, LOG3


def run(tmp_path, cmd, name, *extra):
    out = tmp_path / cmd
    code = cli.main([cmd, "--config", str(FIXTURES / f"{name}.json"), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_pressure_full2(tmp_path):
    code, out = run(tmp_path, "pressure", "full2_zero")
    assert code == 0
    rows = read_csv(out / "pressure.csv")
    assert rows and all(abs(float(r["A_n_over_n"]) - LOG2) <= 1e-12 for r in rows)
    doc = json.loads((out / "pressure.json").read_text())
    assert doc["header"]["tool"] == "rdsthermo" and doc["command"] == "pressure"
    assert set(doc["header"]) == {"tool", "version", "config_sha256", "seed"}


def test_varprinciple_bernoulli(tmp_path):
    code, out = run(tmp_path, "varprinciple", "bernoulli_log2")
    assert code == 0
    res = json.loads((out / "varprinciple.json").read_text())["result"]
    assert abs(res["gap"]) <= 1e-4 and abs(res["objective"] - LOG3) <= 1e-4
    assert read_csv(out / "trace.csv")


def test_verify_s2(tmp_path):
    code, out = run(tmp_path, "verify", "s2_goldmean")
    assert code == 0
    assert json.loads((out / "verify.json").read_text())["result"]["ok"]


@pytest.mark.parametrize("cmd", ["entropy", "phistar", "power"])
def test_other_commands(tmp_path, cmd):
    code, out = run(tmp_path, cmd, "s2_goldmean", "--format", "both")
    assert code == 0
    assert (out / f"{cmd}.json").exists() and (out / f"{cmd}.csv").exists()


def test_neg_inf_serialized(tmp_path):
    code, out = run(tmp_path, "pressure", "zero_cocycle", "--format", "json")
    doc = json.loads((out / "pressure.json").read_text())
    assert code == 0 and doc["result"]["reported"] == "-inf"
    assert not (out / "pressure.csv").exists()


def test_config_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"system": {"perm": [0], "alphabet": 2}, "potential": {"kind": "constant"}}))
    assert cli.main(["pressure", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "potential" in capsys.readouterr().err


def test_syntax_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n\n  oops")
    assert cli.main(["pressure", "--config", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_file_exit(tmp_path):
    assert cli.main(["pressure", "--config", str(tmp_path / "nope.json")]) == 2


def test_argparse_exit():
    with pytest.raises(SystemExit) as exc:
        cli.main(["pressure"])
    assert exc.value.code == 2


def test_bad_threads(tmp_path):
    assert run(tmp_path, "pressure", "full2_zero", "--threads", "0")[0] == 2


def test_budget_exit(tmp_path):
    cfg = json.loads((FIXTURES / "full2_zero.json").read_text())
    cfg["schedules"]["pressure"] = [30]
    p = tmp_path / "big.json"
    p.write_text(json.dumps(cfg))
    assert cli.main(["pressure", "--config", str(p), "--out", str(tmp_path)]) == 3


def test_verify_violation_exit(tmp_path, monkeypatch):
    from rdsthermo import verify
    real = verify.run_suite
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: {**real(*a, **k), "ok": False})
    assert run(tmp_path, "verify", "full2_zero")[0] == 1


def test_determinism_across_threads(tmp_path):
    outs = []
    for th in ("1", "8"):
        code, out = run(tmp_path / th, "verify", "diag_cocycle", "--threads", th, "--seed", "5")
        assert code == 0
        outs.append((out / "verify.json").read_bytes())
    assert outs[0] == outs[1]


def test_seed_in_header(tmp_path):
    _, out = run(tmp_path, "phistar", "full2_zero", "--seed", "18446744073709551615")
    assert json.loads((out / "phistar.json").read_text())["header"]["seed"] == 2**64 - 1


def test_backends_byte_identical(tmp_path):
    import os
    import subprocess
    import sys
    blobs = []
    for pure in ("0", "1"):
        out = tmp_path / pure
        env = {**os.environ, "RDSTHERMO_PURE": pure}
        subprocess.run([sys.executable, "-m", "rdsthermo.cli", "pressure", "--config",
                        str(FIXTURES / "diag_cocycle.json"), "--out", str(out)], env=env, check=True)
        blobs.append((out / "pressure.json").read_bytes())
    assert blobs[0] == blobs[1]
