import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from heunhs import cli
from heunhs.experiments import ConfigError, ExperimentConfig, run, sample_couplings
from heunhs.couplings import membership
from heunhs.report import CSV_HEADER, Comparison, Criterion, MalformedReport, Report


def test_report_validation():
    rep = Report("x", {})
    rep.add(Comparison("E", 0, 1.0, 1.0, None, "closed-form"))
    with pytest.raises(MalformedReport):
        rep.validate()
    rep = Report("x", {})
    rep.add(Comparison("E", 0, 1.0, 1.0, "E[x]", "bogus"))
    with pytest.raises(MalformedReport):
        rep.validate()
    rep = Report("x", {})
    rep.check(Criterion("c", "", "pass"))
    with pytest.raises(MalformedReport):
        rep.validate()


def test_report_status_and_exit_codes():
    rep = Report("x", {})
    rep.check(Criterion("a", "f", "pass"))
    rep.check(Criterion("b", "f", "info"))
    assert rep.exit_code == 0
    rep.check(Criterion("c", "f", "inconclusive"))
    assert rep.exit_code == 3
    rep.check(Criterion("d", "f", "fail"))
    assert rep.exit_code == 1
    assert Criterion.threshold("t", "f", float("nan"), 1.0).status == "fail"


def test_csv_schema():
    rep = Report("x", {})
    rep.add(Comparison("nu", 0, 2.0, 1.0, "nu[x]", "closed-form"))
    rep.add(Comparison("nu", 1, 3.0))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1] == ["0", "2.0", "1.0", "1.0", "1.0", "true"]
    assert rows[2][2:5] == ["", "", ""]
    rep.add(Comparison("mu", 0, 1.0))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[3][0] == "mu:0"


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="nope").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(r=-1).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(alpha=0.01).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="spectrum").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(preset="missing").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(g=(1, 2, 3)).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(g=(1, 0, 0, 0), preset="1001").validate()
    cfg = ExperimentConfig(preset="1000-dual").validate()
    assert cfg.g == (0.5, 0.5, -0.5, 0.5)
    # validation is idempotent
    assert cfg.validate().g == (0.5, 0.5, -0.5, 0.5)


def test_sampler_is_seeded_and_in_region():
    a = sample_couplings(np.random.default_rng(7), 5, "pi_g")
    b = sample_couplings(np.random.default_rng(7), 5, "pi_g")
    assert [g.g for g in a] == [g.g for g in b]
    assert all(membership(g).in_pi_g for g in a)
    for g in sample_couplings(np.random.default_rng(1), 5, "rank-one"):
        assert abs(g.s_g) < 1e-14 and membership(g).in_pi


def test_reports_are_deterministic():
    cfg = dict(experiment="tau-probe", samples=2, seed=3, k=4)
    a = run(ExperimentConfig(**cfg)).to_json()
    b = run(ExperimentConfig(**cfg)).to_json()
    for rep in (a, b):
        rep.pop("wall_time")
    assert a == b
    assert a["config"]["seed"] == 3


def test_main_json_stdout(capsys):
    code = cli.main(["svd", "--preset", "1001"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["status"] == "pass"
    assert out["config"]["g"] == [1.0, 0.0, 0.0, 1.0]
    refs = [c for c in out["comparisons"] if c["reference"] is not None]
    assert refs and all(c["source"] == "nu[1001]" for c in refs)


def test_main_csv_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code = cli.main(["spectrum", "--preset", "1101-dual", "--format", "csv", "--out", str(path)])
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert "PASS" in capsys.readouterr().out


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('preset = "1001"\nbasis-size = 32\nk = 3\n')
    assert cli.main(["svd", "--config", str(cfg), "--k", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["basis_size"] == 32
    assert out["config"]["k"] == 4
    # a flag-level g replaces the file preset
    assert cli.main(["spectrum", "--config", str(cfg), "--g", "1,1,0,1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["g"] == [1.0, 1.0, 0.0, 1.0] and out["config"]["preset"] is None


def test_usage_errors(tmp_path, capsys):
    assert cli.main(["spectrum"]) == 2
    assert cli.main(["spectrum", "--preset", "nope"]) == 2
    assert cli.main(["svd", "--g", "1,-0.6,0,0"]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[section]\nr = 1\n")
    assert cli.main(["special-cases", "--config", str(bad)]) == 2
    bad.write_text("unknown_key = 1\n")
    assert cli.main(["special-cases", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["spectrum", "--g", "1,2"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
    capsys.readouterr()


def test_orbit_outside_pi_g_is_inconclusive(capsys):
    assert not membership((0.0, 0.0, 1.8, 1.8)).in_pi_g
    assert cli.main(["orbit", "--g", "0,0,1.8,1.8"]) == 3
    out = json.loads(capsys.readouterr().out)
    assert "outside Pi_G" in out["criteria"][0]["detail"]


def test_orbit_identity_has_zero_deviation():
    rep = run(ExperimentConfig(experiment="orbit", preset="generic"))
    ident = [c for c in rep.comparisons if c.quantity == "E[0123]"]
    assert ident and all(c.abs_err == 0 for c in ident)
    assert len(rep.extra["members"]) == 24


def test_special_cases_all_pass():
    rep = run(ExperimentConfig(experiment="special-cases"))
    assert rep.status == "pass"
    ids = {c.formula for c in rep.criteria}
    assert {"nu[0011]", "nu[1100]", "nu[1111]", "nu[1001]", "nu[1010]"} <= ids
    assert {"E[(3,1,1,1)/2]", "E[(1,1,1,3)/2]", "E[(1,1,-1,1)/2]", "E0[rank-one]"} <= ids


@pytest.mark.parametrize("preset", ["0011", "1111"])
def test_tau_probe_known_cases(preset):
    rep = run(ExperimentConfig(experiment="tau-probe", preset=preset))
    assert rep.extra["points"][0]["verdict"] == "evidence"


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "heunhs.cli", "rank-one", "--samples", "2", "--format", "csv"],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert out.stdout.splitlines()[0] == ",".join(CSV_HEADER)
