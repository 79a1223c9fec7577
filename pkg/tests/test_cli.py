import json
import subprocess
import sys

import pytest

from advfuzz.cli import main


def test_run_report_export(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["--road", "urban2", "--budget", "6", "--tau", "3", "--seed", "2", "--out", str(out), "-q"]) == 0
    live = json.loads(capsys.readouterr().out)
    assert live["scenario_num"] == 6
    assert main(["report", str(out)]) == 0
    assert json.loads(capsys.readouterr().out) == live
    assert main(["report", str(out), "--clock", "wall"]) == 0
    assert json.loads(capsys.readouterr().out)["clock"] == "wall"
    assert main(["export", str(out), "--kind", "histogram"]) == 0
    assert (out / "histogram.csv").exists()


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"road": "urban2", "budget": 50, "seed": 1, "tau": 3}))
    assert main(["run", "--config", str(cfg), "--budget", "3", "--out", str(tmp_path / "o"), "-q"]) == 0
    assert json.loads(capsys.readouterr().out)["scenario_num"] == 3


@pytest.mark.parametrize("argv", [
    ["--budget", "0"],
    ["--budget", "5", "--road", "motorway9"],
    ["--road", "urban2"],                                   # no budget at all
    ["export", "somewhere", "--kind", "pie"],
    ["--budget", "5", "--ego", "nobody"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_one(argv, tmp_path):
    with pytest.raises(SystemExit) as exc:
        code = main(argv + (["--out", str(tmp_path / "x")] if argv[:1] == ["--budget"] else []))
        raise SystemExit(code)
    assert exc.value.code == 1


def test_missing_report_dir_exits_two(tmp_path):
    assert main(["report", str(tmp_path / "missing")]) == 2


def test_missing_config_file_exits_two(tmp_path):
    assert main(["--config", str(tmp_path / "nope.json"), "--budget", "2"]) == 2


def test_unwritable_output_exits_two(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--budget", "2", "--out", str(blocker / "sub"), "-q"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "advfuzz", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "report" in proc.stdout
