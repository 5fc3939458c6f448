import json
import os

import pytest

from app.cli import commands
from app.cli.commands import EXIT_CHECK_FAILED, build_parser, load_config_dir, main
from app.models.run_models import OrderReport
from app.services.sweep_service import SUMMARY_FILE


def _write(path, payload) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)
    return str(path)


def test_run_prints_summary(tmp_path, capsys, gaussian_config):
    config = _write(tmp_path / "small.json", gaussian_config())
    code = main(["--output-dir", str(tmp_path / "runs"), "run", config])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["status"] == "ok"
    assert os.path.isfile(os.path.join(summary["run_dir"], "diagnostics.csv"))


def test_seed_override_changes_run_dir(tmp_path, capsys, gaussian_config):
    config = _write(tmp_path / "small.json", gaussian_config())
    main(["--output-dir", str(tmp_path), "run", config])
    main(["--output-dir", str(tmp_path), "--seed", "7", "run", config])
    dirs = [json.loads(line)["run_dir"] for line in capsys.readouterr().out.splitlines()]
    assert dirs[0] != dirs[1]


def test_simulation_failure_exit_code(tmp_path, gaussian_config):
    payload = gaussian_config(initial_data={"type": "gaussian", "amplitude": 0.2, "width": 1.0, "center": 19.0})
    assert main(["--output-dir", str(tmp_path), "run", _write(tmp_path / "edge.json", payload)]) == 2


@pytest.mark.parametrize(
    "contents",
    ["{not json", json.dumps({"name": "x"}), json.dumps({"grid": {"length": 40.0, "n": 100}})],
)
def test_bad_config_exit_code(tmp_path, contents):
    path = tmp_path / "bad.json"
    path.write_text(contents, encoding="utf-8")
    assert main(["--output-dir", str(tmp_path), "run", str(path)]) == 3


def test_missing_config_exit_code(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 3


def test_sweep_directory(tmp_path, capsys, gaussian_config):
    configs = tmp_path / "configs"
    configs.mkdir()
    for n in (32, 64):
        _write(configs / f"n{n}.json", gaussian_config(name=f"grid-n{n}", grid={"length": 40.0, "n": n}))
    code = main(["--output-dir", str(tmp_path / "runs"), "sweep", str(configs), "--workers", "1"])
    assert code == 0
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert os.path.isfile(tmp_path / "runs" / SUMMARY_FILE)


def test_preset_writes_configs(tmp_path, capsys):
    out = tmp_path / "preset"
    assert main(["preset", "kdv-soliton", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == str(out / "kdv-soliton.json")
    (config,) = load_config_dir(str(out), seed=5)
    assert config.seed == 5


def test_empty_sweep_directory(tmp_path):
    assert main(["sweep", str(tmp_path)]) == 3


def test_unknown_preset_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        build_parser().parse_args(["preset", "nope", "--out", str(tmp_path)])
    assert excinfo.value.code == 2


@pytest.mark.slow
def test_check_reports_every_item(capsys):
    code = main(["check"])
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(lines) == 16
    assert all(line["pass"] for line in lines), [line for line in lines if not line["pass"]]
    assert code == 0


def test_check_exits_nonzero_on_a_failed_report(monkeypatch, capsys):
    failing = OrderReport(1.0, 2.0, [(4.0, 1.0), (8.0, 4.0)], False, 0.3)
    monkeypatch.setattr(commands, "run_check_suite", lambda seed: [("stub", failing)])
    assert main(["check"]) == EXIT_CHECK_FAILED
    assert json.loads(capsys.readouterr().out)["pass"] is False
