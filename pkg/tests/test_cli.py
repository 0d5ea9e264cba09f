"""CLI shell: commands, exit codes, report files, stimuli handling."""

import json

import pytest

from sectionhdl.cli import main


def test_list_names_every_design(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("add_sub", "matmul", "fft8", "pipeline_demo", "my_tb"):
        assert name in out


def test_sim_add_sub_prints_result(capsys):
    assert main(["sim", "add_sub", "--a", "21", "--b", "34", "--c", "5"]) == 0
    out = capsys.readouterr().out
    assert "result: 50" in out
    assert "Done after 3 cycles" in out


def test_sim_my_tb(capsys):
    assert main(["sim", "my_tb"]) == 0
    assert "Result = [50]" in capsys.readouterr().out


def test_sim_pipeline_reports_stage_block(capsys):
    assert main(["sim", "pipeline_demo", "N=8"]) == 0
    assert "section stages: 10 cycles" in capsys.readouterr().out


def test_sim_matmul_random_passes_oracle(capsys):
    assert main(["sim", "matmul", "N=4", "--stimuli", "random", "--seed", "7"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_sim_writes_json_report(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert main(["sim", "add_sub", "--a", "1", "--b", "2", "--report", str(report_path)]) == 0
    capsys.readouterr()
    data = json.loads(report_path.read_text())
    assert data["design"] == "add_sub"
    assert data["done"] is True
    assert data["outputs"]["d"] == 3
    assert data["sections"]["root"]["cycles"] == 2


def test_sim_stimuli_file(tmp_path, capsys):
    stim = tmp_path / "stim.json"
    stim.write_text(json.dumps({"fin": [1, 2, 3]}))
    assert main(["sim", "pipeline_demo", "N=3", "--stimuli", str(stim)]) == 0
    out = capsys.readouterr().out
    assert "fifo fout: [4, 7, 10]" in out


def test_emit_writes_expected_file_set(tmp_path, capsys):
    outdir = tmp_path / "out"
    assert main(["emit", "matmul", "N=4", "-o", str(outdir)]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in outdir.iterdir())
    assert names == ["matmul.v", "simple_bram.v", "simple_fifo.v"]
    assert main(["emit", "add_sub", "-o", str(tmp_path / "out2")]) == 0
    capsys.readouterr()
    assert [p.name for p in (tmp_path / "out2").iterdir()] == ["add_sub.v"]


def test_check_command(capsys):
    assert main(["check", "add_sub"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out and "FAIL" not in out


def test_unknown_design_is_usage_error(capsys):
    assert main(["emit", "nosuch"]) == 2
    err = capsys.readouterr().err
    assert "registered:" in err
    assert main(["sim", "nosuch"]) == 2
    capsys.readouterr()


def test_malformed_parameter_is_usage_error(capsys):
    assert main(["sim", "matmul", "N:4"]) == 2
    capsys.readouterr()


def test_deadlock_is_simulation_failure(capsys):
    # my_tb needs no stimuli; starve matmul instead (empty input FIFOs).
    assert main(["sim", "matmul", "N=2", "--stimuli", "random", "--seed", "1",
                 "--max-cycles", "5"]) == 1
    err = capsys.readouterr().err
    assert "watchdog" in err


def test_bad_stimuli_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sim", "pipeline_demo", "--stimuli", str(bad)]) == 2
    capsys.readouterr()
    bad.write_text(json.dumps({"fin": "zzz"}))
    assert main(["sim", "pipeline_demo", "--stimuli", str(bad)]) == 2
    capsys.readouterr()
