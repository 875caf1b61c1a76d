import json
import subprocess
import sys

import pytest

from harmonic_stretch.cli import main

from conftest import fig1b_document


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_classify_output(capsys):
    code, out, _ = run_cli(capsys, "classify", "--size", "3/5",
                           "--eta", "2", "--f", "2")
    assert code == 0
    assert out.splitlines()[0] == "i=1 j=2"
    assert "sr_primary_capacity=4/13" in out


def test_classify_requires_config(capsys):
    code, _, err = run_cli(capsys, "classify", "--size", "3/5")
    assert code == 2
    assert "required" in err


def test_malformed_rational_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "classify", "--size", "3//5",
                           "--eta", "2", "--f", "2")
    assert code == 2


def test_unknown_flag_exits_2(capsys):
    assert main(["classify", "--bogus", "x"]) == 2


def test_gen_pack_validate_audit_pipeline(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    snap = tmp_path / "snap.json"
    log = tmp_path / "place.jsonl"

    code, _, _ = run_cli(capsys, "gen", "--mode", "random", "--n", "25",
                         "--seed", "7", "--f", "2", "--eta", "2",
                         "--recover-all", "--out", str(trace))
    assert code == 0
    assert trace.read_text().strip()

    code, out, _ = run_cli(capsys, "pack", "--trace", str(trace),
                           "--f", "2", "--eta", "2", "--check",
                           "--out", str(snap), "--log", str(log))
    assert code == 0
    assert "bins=" in out
    snapshot = json.loads(snap.read_text())
    assert snapshot["config"] == {"f": 2, "eta": "2/1"}
    assert all(json.loads(line) for line in log.read_text().splitlines())

    code, out, _ = run_cli(capsys, "validate", "--packing", str(snap))
    assert code == 0 and out.strip() == "valid"

    code, out, _ = run_cli(capsys, "audit", "--packing", str(snap))
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True


def test_pack_empty_trace(tmp_path, capsys):
    trace = tmp_path / "empty.jsonl"
    trace.write_text("")
    code, out, _ = run_cli(capsys, "pack", "--trace", str(trace),
                           "--f", "1", "--eta", "3/2")
    assert code == 0
    assert "bins=0" in out


def test_validate_invalid_fixture(tmp_path, capsys):
    packing = tmp_path / "fig1b.json"
    packing.write_text(json.dumps(fig1b_document()))
    code, out, _ = run_cli(capsys, "validate", "--packing", str(packing),
                           "--f", "2", "--eta", "2")
    assert code == 1
    assert "witness={1,2}" in out


def test_validate_config_mismatch(tmp_path, capsys):
    packing = tmp_path / "fig1b.json"
    packing.write_text(json.dumps(fig1b_document()))
    code, _, err = run_cli(capsys, "validate", "--packing", str(packing),
                           "--f", "1", "--eta", "2")
    assert code == 2
    assert "conflicts" in err


def test_opt_subcommand(capsys):
    code, out, _ = run_cli(capsys, "opt", "--sizes", "3/5,1/2",
                           "--f", "1", "--eta", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "opt_bins=3"
    doc = json.loads(lines[1])
    assert len(doc["bins"]) == 3


def test_compare_csv(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    run_cli(capsys, "gen", "--mode", "random", "--n", "3", "--seed", "1",
            "--f", "1", "--eta", "2", "--out", str(trace))
    code, out, _ = run_cli(capsys, "compare", "--trace", str(trace),
                           "--f", "1", "--eta", "2",
                           "--algos", "hs,dedicated", "--opt")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("algo,bins,")
    algos = [line.split(",")[0] for line in lines[1:]]
    assert algos == ["hs", "dedicated", "opt"]
    assert all(line.endswith("True") for line in lines[1:])


def test_config_file_supplies_flags(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"f": 2, "eta": "2"}))
    code, out, _ = run_cli(capsys, "classify", "--size", "1/2",
                           "--config", str(cfgfile))
    assert code == 0
    assert out.splitlines()[0] == "i=2 j=3"


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "harmonic_stretch.cli", "classify",
         "--size", "1/10", "--eta", "2", "--f", "2"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "i=7 j=13"
