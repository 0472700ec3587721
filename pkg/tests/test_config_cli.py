import csv
import json

import pytest

from rtnls import cli
from rtnls.config import DEFAULTS, ENV_VAR, ConfigError, RunConfig


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_defaults_validate_and_roundtrip():
    cfg = RunConfig.from_dict()
    assert json.loads(cfg.dumps()) == DEFAULTS
    assert cfg.params().g == DEFAULTS["model"]["g"]
    assert cfg.quadrature().M == DEFAULTS["quadrature"]["M"]


@pytest.mark.parametrize("bad", [
    {"model": {"gg": 1.0}},
    {"nonsense": 1},
    {"model": 3},
    {"seed": -1},
    {"seed": 2 ** 64},
    {"N": 7},
    {"quadrature": {"M": 128}},
    {"model": {"g": -0.1}},
    {"fock": {"f1": [1.0, 0.0, 1.0]}},
    {"scatter": {"residual_packet": [2.0, 1.0]}},
    {"tolerances": {"kernels": 0.0}},
])
def test_invalid_config_is_rejected(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(bad)


def test_override_and_file_loading(tmp_path, monkeypatch):
    cfg = RunConfig.from_dict().override(**{"model.g": 0.1, "classical.times": [0.0]})
    assert cfg.params().g == 0.1 and cfg["classical"]["times"] == [0.0]
    with pytest.raises(ConfigError):
        cfg.override(**{"model.q": 1})
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"eta": 2.0}}))
    assert RunConfig.load(str(path)).params().eta == 2.0
    monkeypatch.setenv(ENV_VAR, str(path))
    assert RunConfig.load().params().eta == 2.0
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(str(path))


def test_exit_code_for_config_errors(tmp_path, capsys):
    assert cli.main(["run", "kernels", "--out", str(tmp_path), "--M", "64"]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"kernals": {}}))
    assert cli.main(["run", "kernels", "--config", str(path)]) == cli.EXIT_CONFIG


def test_exit_code_for_module_errors(tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("broken")
    monkeypatch.setitem(cli.RUNNERS, "kernels", boom)
    assert cli.main(["run", "kernels", "--out", str(tmp_path)]) == cli.EXIT_MODULE


def test_kernels_run_writes_reports(tmp_path):
    assert cli.main(["run", "kernels", "--out", str(tmp_path)]) == cli.EXIT_OK
    summary = read_csv(tmp_path / "kernels_summary.csv")
    assert summary[0] == ["name", "value", "tolerance", "relation", "pass"]
    assert all(row[-1] == "pass" for row in summary[1:])
    rows = read_csv(tmp_path / "kernels_residuals.csv")
    assert rows[0] == ["g", "eta", "identity", "residual"]
    assert max(float(r[3]) for r in rows[1:]) < 1e-12


def test_defaults_command(capsys):
    assert cli.main(["defaults"]) == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out) == DEFAULTS


def test_check_relations():
    assert cli.Check("a", 0.5, 1.0).passed
    assert not cli.Check("a", 1.0, 1.0).passed
    assert cli.Check("a", 1.0, 1.0, "<=").passed
    assert cli.Check("a", 3.1, 3.0, ">=").passed
    assert cli.Check("a", 0.0, 0.0, "==").passed
    assert cli.Check("a", 4.6, 1.0, "band", 4.0).passed
    assert not cli.Check("a", 2.0, 1.0, "band", 4.0).passed
    assert not cli.Check("a", float("nan"), 1.0).passed


def test_algebra_goldens_are_byte_identical():
    assert cli.golden_text() == cli.load_goldens()


@pytest.mark.slow
def test_classical_boundary_rows(tmp_path):
    # six boundary rows, two per time; the order-1 residuals are above 1e-6
    # (see the decisions ledger), so this run exits with status 1
    code = cli.main(["run", "classical", "--N", "1", "--t", "0,0.5,1", "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "classical_boundary.csv")
    assert rows[0] == ["t", "kind", "residual", "est_error", "richardson_ratio"]
    assert len(rows) == 7
    assert sorted({float(r[0]) for r in rows[1:]}) == [0.0, 0.5, 1.0]
    assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
    assert all(float(r[2]) < 1e-6 for r in rows[1:])
