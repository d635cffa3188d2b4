import json

import pytest

from mcflow import cli, verify


def write_config(path, **overrides):
    cfg = {
        "domain": {"kind": "ellipse", "a": 1.0, "b": 1.0},
        "problem": {"kind": "power_mc", "alpha": 2.0},
        "h": 0.1,
        "betas": [1.0, 1.5, 2.0],
        "output_dir": str(path.parent / "out"),
        "radial": {"R": 1.0, "n": 2000},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return cfg


def test_solve_writes_outputs(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path)
    code = cli.main(["solve", "--config", str(cfg_path)])
    assert code == 0
    out = tmp_path / "out"
    for name in ("solution.csv", "mesh_vertices.csv", "mesh_triangles.csv",
                 "solver_log.jsonl"):
        assert (out / name).exists(), name
    log_lines = (out / "solver_log.jsonl").read_text().strip().splitlines()
    entries = [json.loads(line) for line in log_lines]
    assert all({"iter", "residual", "damping"} <= set(e) for e in entries)
    assert entries[-1]["residual"] <= 1e-10


def test_invalid_h_exits_3(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, h=-0.1)
    assert cli.main(["solve", "--config", str(cfg_path)]) == 3
    assert "h" in capsys.readouterr().err


def test_missing_config_exits_3(tmp_path):
    assert cli.main(["solve", "--config", str(tmp_path / "nope.json")]) == 3


def test_beta_outside_range_needs_explore(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, betas=[1.0, 3.0])
    assert cli.main(["solve", "--config", str(cfg_path)]) == 3
    assert "betas" in capsys.readouterr().err
    assert cli.main(["solve", "--config", str(cfg_path), "--explore"]) == 0


def test_blowup_exits_2(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, problem={"kind": "constant_forcing", "mu": 50.0},
                 radial={"R": 2.0, "n": 2000})
    assert cli.main(["radial", "--config", str(cfg_path)]) == 2
    assert "blew up" in capsys.readouterr().err


def test_nonconvergence_exit_2_with_trace(tmp_path, capsys):
    # strong forcing on a disk too large for a classical solution: the
    # damped Newton iteration stalls and the trace is echoed
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, domain={"kind": "ellipse", "a": 2.0, "b": 2.0},
                 problem={"kind": "constant_forcing", "mu": 50.0}, h=0.15)
    code = cli.main(["solve", "--config", str(cfg_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "residual" in err


def test_radial_writes_profile_and_fixture(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, problem={"kind": "constant_forcing", "mu": 1.0})
    assert cli.main(["radial", "--config", str(cfg_path)]) == 0
    fx = json.loads((tmp_path / "out" / "radial_fixture.json").read_text())
    assert fx["R"] == 1.0
    # the boundary slope dominates the curvature lower bound (1+mu)/2
    assert fx["q"] >= 1.0
    assert (tmp_path / "out" / "radial.csv").exists()


def test_verify_disk_passes_and_round_trips(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, h=0.08)
    assert cli.main(["verify", "--config", str(cfg_path)]) == 0
    text = (tmp_path / "out" / "report.json").read_text()
    report = verify.report_from_json(text)
    assert report.checks_pass
    assert report.to_json() == text
    stdout = capsys.readouterr().out
    assert "Eq1_9" in stdout and "Thm6_1" in stdout


def test_verify_exit_1_when_a_bound_fails(tmp_path):
    # mu = 1 on the unit disk violates the log-secant depth cap
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, problem={"kind": "constant_forcing", "mu": 1.0},
                 h=0.08)
    assert cli.main(["verify", "--config", str(cfg_path)]) == 1
    report = verify.report_from_json(
        (tmp_path / "out" / "report.json").read_text())
    failing = [b.name for b in report.bounds if b.applicable and not b.holds]
    assert failing == ["Eq6_11"]


def test_verify_explore_beta_notes_not_asserted(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, betas=[1.5, 3.0], h=0.08)
    assert cli.main(["verify", "--config", str(cfg_path), "--explore"]) == 0
    report = verify.report_from_json(
        (tmp_path / "out" / "report.json").read_text())
    outside = [p for p in report.pfunc_results if p.beta == 3.0]
    assert len(outside) == 1
    assert not outside[0].within_theorem_range
    assert "not asserted" in outside[0].note


def test_cli_overrides(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path)
    code = cli.main(["radial", "--config", str(cfg_path), "--mu", "1.0",
                     "--out", str(tmp_path / "alt")])
    assert code == 0
    fx = json.loads((tmp_path / "alt" / "radial_fixture.json").read_text())
    assert fx["problem"] == {"kind": "constant_forcing", "mu": 1.0}


def test_reports_byte_identical_across_runs(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path, h=0.1)
    cli.main(["verify", "--config", str(cfg_path)])
    first = (tmp_path / "out" / "report.json").read_bytes()
    cli.main(["verify", "--config", str(cfg_path)])
    second = (tmp_path / "out" / "report.json").read_bytes()
    assert first == second


def test_threads_env_validation(tmp_path, monkeypatch, capsys):
    cfg_path = tmp_path / "run.json"
    write_config(cfg_path)
    monkeypatch.setenv("MCFLOW_THREADS", "zero")
    assert cli.main(["radial", "--config", str(cfg_path)]) == 3
    monkeypatch.setenv("MCFLOW_THREADS", "2")
    assert cli.main(["radial", "--config", str(cfg_path)]) == 0
