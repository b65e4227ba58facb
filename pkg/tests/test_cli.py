import json

import pytest

from vargame.cli import main
from vargame.scenarios import bundled, dumps


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_summary(capsys):
    code, out, _ = run(capsys, "solve", "two_customer", "--mode", "eut")
    assert code == 0
    js = json.loads(out)
    assert js["modes"] == ["eut"]
    assert js["results"]["eut"]["converged"]
    assert js["ne_report"]["regime"] == "TwoByTwoStraddle"
    assert js["ne_report"]["eut"]["mixed"][0][0] == pytest.approx(0.424557, abs=1e-6)


def test_solve_writes_files(tmp_path, capsys):
    code, _, _ = run(capsys, "solve", "two_customer", "--mode", "eut", "--trace", "--tables",
                     "--max-iters", "50", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "summary.json").exists()
    trace = (tmp_path / "trace_eut.csv").read_text().splitlines()
    assert trace[0] == "m,customer,action,f0,f1"
    assert trace[1].startswith("1,0,0,") and trace[2].startswith("1,1,1,")
    assert len(trace) == 1 + 2 * 50
    assert (tmp_path / "tables.csv").read_text().startswith("profile_id,")


def test_strict_nonconvergence(capsys):
    code, _, _ = run(capsys, "solve", "two_customer", "--max-iters", "5", "--strict")
    assert code == 3
    code, _, _ = run(capsys, "solve", "two_customer", "--max-iters", "5")
    assert code == 0


def test_invalid_scenario_exit(tmp_path, capsys):
    s = bundled("two_customer")
    bad = dumps(s).replace('"tau": 0.7', '"tau": 1.4', 1)
    path = tmp_path / "bad.json"
    path.write_text(bad)
    code, _, err = run(capsys, "solve", str(path))
    assert code == 2
    assert "tau out of [0,1]: 1.4" in err
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 2 and "tau" in out
    code, _, _ = run(capsys, "solve", "two_customer", "--tau", "-0.1")
    assert code == 2


def test_parse_error_exit(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    assert run(capsys, "validate", str(path))[0] == 2
    assert run(capsys, "solve", str(path))[0] == 2


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", "three_customer")
    assert code == 0 and "valid" in out


def test_capacity_exit(monkeypatch, capsys):
    monkeypatch.setenv("VARGAME_PROFILE_CAP", "100")
    code, _, err = run(capsys, "oracle", "seven_customer")
    assert code == 4 and "capacity" in err


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "seven_customer", "--tau", "0.5")
    assert code == 0
    js = json.loads(out)
    assert js["ne_report"]["eut"]["pure_pf"] == [[0.88] * 7]


def test_sweep_byte_identical(tmp_path, capsys):
    args = ["sweep", "two_customer", "--param", "beta", "--grid", "0.6,1.0", "--mode", "pt",
            "--seedless"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    a = (tmp_path / "a" / "sweep_beta.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep_beta.csv").read_bytes()
    assert a.count(b"\n") == 3


def test_seedless_blocks_rng(monkeypatch):
    import numpy as np

    import vargame.cli as cli

    def uses_rng(args):
        np.random.default_rng(0)
        return 0

    monkeypatch.setattr(cli, "cmd_validate", uses_rng)
    assert main(["validate", "two_customer"]) == 0
    with pytest.raises(RuntimeError, match="seedless"):
        main(["validate", "two_customer", "--seedless"])
    np.random.default_rng(0)  # restored afterwards


def test_threshold_identity(capsys):
    code, out, _ = run(capsys, "threshold", "two_customer", "--alpha", "1", "--beta", "1",
                       "--reference", "zero", "--tol", "0.01")
    assert code == 0
    assert abs(json.loads(out)["threshold"]["k0"] - 1.0) <= 0.01


def test_threshold_no_sign_change(capsys):
    code, _, err = run(capsys, "threshold", "two_customer", "--reference", "-10", "--tol", "0.1")
    assert code == 1 and "PT-EUT" in err


def test_reproduce_writes_checks(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "fig2", "--out", str(tmp_path))
    assert code == 0
    checks = (tmp_path / "checks.csv").read_text().splitlines()
    assert checks[0].split(",")[:2] == ["experiment", "check"]
    assert len(checks) > 1
    assert "fig2:" in out
