import json

import pytest

from app.cli import EXIT_OK, EXIT_USAGE, main


def test_complexity_command(capsys):
    code = main(["complexity", "--n", "20", "--m", "20", "--c", "8", "--s", "100", "--nprime", "2"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "167218" in out and "27952513" in out and "651977700" in out


def test_cqpoints_command(capsys):
    assert main(["cqpoints", "--dim", "2", "--order", "1"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["M"] == 2 and len(payload["points"]) == 4


@pytest.mark.parametrize("argv", [
    ["run", "--bogus"],
    ["complexity", "--n", "0", "--m", "1", "--c", "1", "--s", "1", "--nprime", "1"],
    [],
])
def test_usage_errors_exit_with_two(argv):
    assert main(argv) == EXIT_USAGE


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE
    assert "config file not found" in capsys.readouterr().err


def test_invalid_config_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"mu": 0.1,\n "S": }', encoding="utf-8")
    assert main(["run", "--config", str(path)]) == EXIT_USAGE


def test_run_writes_artifacts(tmp_path, small_config_dict, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    out = tmp_path / "out"
    code = main(["run", "--config", str(path), "--scheduler", "montecarlo", "--out", str(out), "--filter-trace"])
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["scheduler"] == "montecarlo"
    assert (out / "filter_trace.csv").exists()
    printed = json.loads(capsys.readouterr().out)
    assert "config_echo" not in printed


def test_run_replications(tmp_path, small_config_dict):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    out = tmp_path / "reps"
    code = main(["run", "--config", str(path), "--seeds", "2", "--n-jobs", "1", "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "aggregate.json").exists()
    assert len(list(out.glob("seed_*"))) == 2
