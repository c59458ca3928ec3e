import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from qsdc.cli import load_scenario, main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_scenario(path, **overrides):
    doc = {
        "version": 1,
        "family": "epr",
        "message": "01",
        "errors": [{"qubit": 0, "kind": "phase_shift", "theta": 1.0471975511965976}],
        "stages": "matching",
        "shots": 256,
        "seed": 11,
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc))
    return path


def read_tree(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_scenario_parsing(tmp_path):
    sc = load_scenario(write_scenario(tmp_path / "s.json"))
    assert sc.family.label == "epr"
    assert sc.stages.names() == ("arbitrary_phase", "phase_flip")
    assert sc.shots == 256 and sc.seed == 11
    assert sc.histogram_name == "histogram.json"
    assert not sc.tomography

    sc = load_scenario(write_scenario(
        tmp_path / "s2.json", errors=None, stages="none",
        outputs={"histogram": "h.json", "tomography": True}))
    assert sc.stages.names() == ()
    assert sc.histogram_name == "h.json"
    assert sc.tomography


def test_scenario_rejections(tmp_path):
    cases = [
        dict(version=2),
        dict(extra_field=1),
        dict(message="010"),
        dict(family="bell"),
        dict(shots=0),
        dict(errors=[{"qubit": 0, "kind": "bit_flip", "oops": 1}]),
        dict(errors="bit_flip"),
        dict(stages="most"),
        dict(outputs={"plot": True}),
    ]
    for i, overrides in enumerate(cases):
        path = write_scenario(tmp_path / f"bad{i}.json", **overrides)
        with pytest.raises(ValueError):
            load_scenario(path)
    bad = tmp_path / "notjson.json"
    bad.write_text("{")
    with pytest.raises(ValueError, match="invalid JSON"):
        load_scenario(bad)


def test_run_noiseless(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "family: epr" in stdout
    assert "decoded: 01" in stdout

    doc = json.loads((out / "histogram.json").read_text())
    assert doc == {"shots": 256, "counts": {"01": 256}, "decoded": "01"}
    assert (out / "histogram.png").exists()


def test_run_plain_sdc_single_peak(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json", message="01", errors=None,
                              stages="none", shots=1024)
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out),
                 "--no-figures"]) == 0
    capsys.readouterr()
    doc = json.loads((out / "histogram.json").read_text())
    assert doc == {"shots": 1024, "counts": {"01": 1024}, "decoded": "01"}


def test_run_single_stage_list(tmp_path, capsys):
    # a plus-sign message needs no sign restoration, so the fold stage
    # alone decodes it under a pure phase error
    scenario = write_scenario(
        tmp_path / "s.json", message="00",
        errors=[{"qubit": 0, "kind": "phase_shift", "theta": 1.0471975511965976}],
        stages=["arbitrary_phase"])
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out),
                 "--no-figures"]) == 0
    assert "decoded: 00" in capsys.readouterr().out
    doc = json.loads((out / "histogram.json").read_text())
    assert doc["decoded"] == "00"


def test_run_no_figures(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out), "--no-figures"]) == 0
    capsys.readouterr()
    names = {p.name for p in out.iterdir()}
    assert names == {"histogram.json"}


def test_run_with_tomography(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json", shots=512,
                              outputs={"tomography": True})
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out)]) == 0
    capsys.readouterr()
    names = {p.name for p in out.iterdir()}
    assert names == {"histogram.json", "histogram.png", "tomography.json",
                     "tomography.csv", "tomography.png"}
    doc = json.loads((out / "tomography.json").read_text())
    assert doc["shots_per_setting"] == 512
    assert doc["fidelity_vs_ideal"] > 0.9


def test_run_rejects_bad_scenario_without_writing(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json", message="0")
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err
    assert not out.exists()


def test_run_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_flag_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "s.json", "--fast"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_reruns_are_byte_identical(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json",
                              outputs={"tomography": True})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(scenario), "--out", str(out1)]) == 0
    assert main(["run", str(scenario), "--out", str(out2)]) == 0
    capsys.readouterr()
    tree1, tree2 = read_tree(out1), read_tree(out2)
    assert set(tree1) == set(tree2)
    for rel in tree1:
        assert tree1[rel] == tree2[rel], rel


def test_seed_override_changes_noisy_counts(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "s.json", noise_profile="nairobi",
                              shots=128)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(scenario), "--out", str(out1),
                 "--no-figures"]) == 0
    assert main(["run", str(scenario), "--out", str(out2), "--seed", "99",
                 "--no-figures"]) == 0
    capsys.readouterr()
    doc1 = json.loads((out1 / "histogram.json").read_text())
    doc2 = json.loads((out2 / "histogram.json").read_text())
    assert doc1["shots"] == doc2["shots"] == 128
    assert doc1["counts"] != doc2["counts"]


def test_profile_path_resolution(tmp_path, capsys):
    # a bare file name resolves relative to the scenario file
    profile = {"name": "local", "qubits": {str(q): {} for q in range(5)},
               "default_cnot_error": 0.0}
    (tmp_path / "dev.json").write_text(json.dumps(profile))
    scenario = write_scenario(tmp_path / "s.json", noise_profile="dev.json")
    out = tmp_path / "out"
    assert main(["run", str(scenario), "--out", str(out),
                 "--no-figures"]) == 0
    capsys.readouterr()
    doc = json.loads((out / "histogram.json").read_text())
    assert doc["decoded"] == "01"


def test_threads_env(tmp_path, capsys, monkeypatch):
    scenario = write_scenario(tmp_path / "s.json",
                              outputs={"tomography": True})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(scenario), "--out", str(out1),
                 "--no-figures"]) == 0
    monkeypatch.setenv("QSDC_THREADS", "4")
    assert main(["run", str(scenario), "--out", str(out2),
                 "--no-figures"]) == 0
    capsys.readouterr()
    assert (out1 / "tomography.json").read_bytes() == \
        (out2 / "tomography.json").read_bytes()
    monkeypatch.setenv("QSDC_THREADS", "many")
    assert main(["run", str(scenario), "--out", str(tmp_path / "c"),
                 "--no-figures"]) == 2
    assert "QSDC_THREADS" in capsys.readouterr().err


def test_sweep_noiseless(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["sweep", "--family", "epr", "--shots", "64",
                 "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "rows: 20" in stdout          # 4 messages x 5 grid cases
    assert "row successes: 20/20" in stdout
    assert "success rate: 1.000000" in stdout

    with open(out / "sweep_epr.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 20
    assert all(r["success"] == "1" for r in rows)
    assert all(float(r["fidelity"]) >= 1 - 1e-9 for r in rows)
    assert {r["error_case"] for r in rows} == {
        "none", "bit_flip@0", "phase_flip@0",
        "phase_shift(1.0472)@0", "combined(1.0472)@0"}
    assert rows[0]["stages"] == "arbitrary_phase+phase_flip+bit_flip"
    assert (out / "sweep_epr.png").exists()


def test_sweep_noisy(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["sweep", "--family", "epr", "--noise", "nairobi",
                 "--shots", "128", "--seed", "3",
                 "--out", str(out), "--no-figures"]) == 0
    stdout = capsys.readouterr().out
    rate = float(stdout.split("success rate: ")[1].split()[0])
    assert 0.0 < rate < 1.0
    with open(out / "sweep_epr.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 20
    assert all(r["syndromes"] == "" for r in rows)


def test_sweep_rejects_unknown_profile(tmp_path, capsys):
    assert main(["sweep", "--family", "epr", "--noise", "warszawa",
                 "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_console_script_end_to_end(tmp_path):
    # the installed entry point, against a shipped scenario file
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "qsdc.cli", "run",
         str(SCENARIOS / "epr_bit_flip.json"), "--out", str(out),
         "--no-figures"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "decoded: 01" in proc.stdout
    doc = json.loads((out / "histogram.json").read_text())
    assert doc["decoded"] == "01"


def test_shipped_scenarios_parse():
    for path in sorted(SCENARIOS.glob("*.json")):
        sc = load_scenario(path)
        assert sc.shots >= 1
