"""Command line surface: exit codes, JSON shapes, stream separation."""

import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kappakepler.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_verify_brackets_green(capsys):
    code, out, err = run(capsys, "verify", "--suite", "brackets")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 8
    assert all(r["pass"] for r in rows)
    assert all(r["config"]["a"] == 0.0 for r in rows)
    assert "[PASS]" in err


def test_verify_deformed_warns_on_stderr(capsys):
    code, _, err = run(capsys, "verify", "--suite", "brackets", "--a", "0.1")
    assert code == 0
    assert "WARN" in err


def test_verify_out_file(tmp_path, capsys):
    target = tmp_path / "reports.json"
    code, out, _ = run(capsys, "verify", "--suite", "stereo",
                       "--out", str(target))
    assert code == 0
    assert out == ""
    rows = json.loads(target.read_text())
    assert all(r["pass"] for r in rows)


def test_map_realize_oracle(capsys):
    code, out, _ = run(capsys, "map", "--transform", "realize",
                       "--a", "0.1", "--alpha", "1", "--p0", "1",
                       "--q", "1,0,0", "--p", "0,0,0")
    assert code == 0
    payload = json.loads(out)
    assert payload["chart"] == "kappa"
    assert_allclose(payload["position"], [1.1, 0.0, 0.0], atol=1e-15)


def test_map_stereo_forward_oracle(capsys):
    code, out, _ = run(capsys, "map", "--transform", "stereo-fwd",
                       "--u", "0,0,-1", "--v", "0,1,0")
    assert code == 0
    payload = json.loads(out)
    assert payload["chart"] == "commutative"
    assert_allclose(payload["position"], [0.0, 0.0], atol=1e-15)
    assert_allclose(payload["momentum"], [0.0, 2.0], atol=1e-15)


def test_ls_pipe_round_trip(capsys, monkeypatch):
    code, fwd, _ = run(capsys, "map", "--transform", "ls-forward",
                       "--q", "1,0,0", "--p", "0,1,0")
    assert code == 0
    parsed = json.loads(fwd)
    assert parsed["chart"] == "delaunay"
    assert {"x", "y", "nu", "theta"} <= parsed.keys()
    monkeypatch.setattr("sys.stdin", io.StringIO(fwd))
    code, back, _ = run(capsys, "map", "--transform", "ls-inverse")
    assert code == 0
    payload = json.loads(back)
    assert payload["chart"] == "kepler"
    assert_allclose(payload["position"], [1.0, 0.0, 0.0], atol=1e-10)
    assert_allclose(payload["momentum"], [0.0, 1.0, 0.0], atol=1e-10)


def test_ls_inverse_negative_vector_flag(capsys):
    code, out, _ = run(capsys, "map", "--transform", "ls-inverse",
                       "--x", "0,1,0,0", "--y", "-1,0,0,0")
    assert code == 0
    payload = json.loads(out)
    assert_allclose(payload["position"], [1.0, 0.0, 0.0], atol=1e-10)
    assert_allclose(payload["momentum"], [0.0, 1.0, 0.0], atol=1e-10)


def test_simulate_kepler_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--system", "kepler",
                       "--q", "1,0,0", "--p", "0,1.1,0",
                       "--duration", "0.1", "--step", "0.01")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# chart: kepler"
    assert lines[1] == "t,q1,q2,q3,p1,p2,p3,H,L1,L2,L3,A1,A2,A3"
    first = np.array(lines[2].split(","), dtype=float)
    assert first[0] == 0.0
    assert_allclose(first[1:4], [1.0, 0.0, 0.0], atol=1e-15)
    assert first[7] == pytest.approx(-0.395)
    assert first[10] == pytest.approx(1.1)
    assert first[11] == pytest.approx(0.21)


def test_simulate_delaunay_json(capsys):
    code, out, _ = run(capsys, "simulate", "--system", "delaunay",
                       "--x", "0,1,0,0", "--y", "-1,0,0,0",
                       "--duration", "0.5", "--step", "0.01",
                       "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["chart"] == "delaunay"
    assert "unit_constraint" in payload["invariants"]


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": 0.05, "seed": 7}))
    code, out, _ = run(capsys, "verify", "--suite", "brackets",
                       "--config", str(cfg), "--a", "0.1")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["config"]["a"] == 0.1
    assert rows[0]["config"]["seed"] == 7


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"a": 0.05, "tilt": 3}))
    code, _, err = run(capsys, "verify", "--suite", "brackets",
                       "--config", str(cfg))
    assert code == 2
    tail = json.loads(err.strip().splitlines()[-1])
    assert tail["error"] == "InvalidParams"


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, "map", "--transform", "ls-forward",
                       "--q", "1,0,0", "--p", "0,2,0")
    assert code == 2
    tail = json.loads(err.strip().splitlines()[-1])
    assert tail["error"] == "PositiveEnergy"


def test_bad_vector_literal(capsys):
    code, _, err = run(capsys, "map", "--transform", "realize",
                       "--q", "1,zz,0", "--p", "0,0,0")
    assert code == 2
    assert "error" in err


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "x.json"
    code, _, _ = run(capsys, "verify", "--suite", "stereo",
                     "--out", str(target))
    assert code == 3


def test_usage_error_is_argparse_convention(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nope"])
    assert exc.value.code == 2


def test_pipeline_command(capsys):
    code, out, _ = run(capsys, "pipeline",
                       "--q", "0.7,0,0", "--p", "0,1.363,0",
                       "--duration", "2", "--step", "0.001")
    assert code == 0
    assert out.splitlines()[0] == "# chart: kepler"


def test_map_requires_point(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    code, _, err = run(capsys, "map", "--transform", "realize")
    assert code == 2
    assert "error" in err
