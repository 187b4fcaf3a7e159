import os

import pytest

from ergolab.cli import FAST_SUITE, main, scenario_dir, shipped_scenarios

PASSING = """
name = cli_pass
space.kind = circle
flow.kind = rotation
flow.theta = golden
function.kind = sawtooth
vector_norm = euclidean
filtration.direction = decreasing
filtration.max_level = 3
t_grid = 1.0, 2.0
s_grid = 0.0, 1.0
p = 2.0
epsilon = 0.5
checks = defining_property, contraction
seed = 2
"""

FAILING = PASSING.replace("name = cli_pass", "name = cli_fail") \
                 .replace("flow.kind = rotation\nflow.theta = golden",
                          "flow.kind = identity") \
                 .replace("checks = defining_property, contraction",
                          "checks = ergodic_envelope")


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_exit_zero_and_artifacts(tmp_path, capsys):
    cfg = _write(tmp_path, "pass.cfg", PASSING)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "PASS: 2 checks, 0 failures" in printed
    assert (out / "cli_pass.json").exists()
    assert (out / "cli_pass.csv").exists()


def test_run_exit_one_on_failing_check(tmp_path, capsys):
    cfg = _write(tmp_path, "fail.cfg", FAILING)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 1
    printed = capsys.readouterr().out
    assert "FAIL: 1 checks, 1 failures" in printed


def test_run_exit_two_on_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, "broken.cfg", PASSING + "bogus_key = 1\n")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "bogus_key" in err


def test_run_missing_file_is_config_error(tmp_path, capsys):
    missing = str(tmp_path / "nope.cfg")
    assert main(["run", "--config", missing, "--out",
                 str(tmp_path / "o")]) == 2


def test_seed_override_changes_echo(tmp_path):
    cfg = _write(tmp_path, "pass.cfg", PASSING)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out),
                 "--seed", "31"]) == 0
    assert '"seed": 31' in (out / "cli_pass.json").read_text()


def test_list_prints_registry(capsys):
    assert main(["list"]) == 0
    printed = capsys.readouterr().out
    assert "decomposition" in printed
    assert "martingale_surrogate" in printed
    assert "sawtooth" in printed


def test_shipped_scenario_discovery():
    everything = shipped_scenarios("all")
    assert len(everything) == 7
    assert all(path.endswith(".cfg") for path in everything)
    fast = shipped_scenarios("fast")
    assert [os.path.basename(p)[:-4] for p in fast] == list(FAST_SUITE)
    assert set(fast) <= set(everything)
    assert os.path.isdir(scenario_dir())
