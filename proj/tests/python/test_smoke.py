import json
import math
import os
import shutil
import subprocess
from pathlib import Path

import pytest


def cli():
    exe = os.environ.get("MISSION_CLI") or shutil.which("mission-profiler")
    if not exe:
        pytest.skip("mission-profiler binary not found")
    return exe


def test_cli_synth_and_run(tmp_path):
    exe = cli()
    bundle = tmp_path / "bundle"
    subprocess.run([exe, "synth", "--seed", "3", "--on-mission", "8", "--genuine", "8", "--out", str(bundle)],
                   check=True)
    out = tmp_path / "out"
    subprocess.run([exe, "run", "--config", str(bundle / "pipeline.json"), "--out", str(out)], check=True)
    report = json.loads((out / "report.json").read_text())
    assert report["schema"] == "mission-profiler/report"
    assert report["ingest"]["profiles"] == 16
    assert len(report["classifier"]["ablation"]) == 4
    assert (out / "plots" / "fig1_entropy_cdf.csv").read_text().startswith("# config_hash=")


def test_cli_reports_stage_exit_codes(tmp_path):
    exe = cli()
    (tmp_path / "t.jsonl").write_text("not json\n")
    (tmp_path / "c.json").write_text(json.dumps({"inputs": {"tweets": "t.jsonl"}, "strict": True}))
    r = subprocess.run([exe, "run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")],
                       capture_output=True, text=True)
    assert r.returncode == 3
    assert "ingest" in r.stderr


def test_core_functions():
    core = pytest.importorskip("mission_profiler._core")
    assert core.assign_group(0.69) == "II"
    assert core.assign_group(math.log(2.5)) == "III"
    assert core.group_boundaries()[0] == pytest.approx(math.log(1.5), abs=1e-12)
    assert core.gini_index([0, 0, 0, 1]) == pytest.approx(0.75)
    assert core.normalized_burstiness(1.0, 10) == pytest.approx(0.0733, abs=1e-4)
    assert core.burstiness([0, 10, 20, 30, 40])["b"] == pytest.approx(-1.0)
    assert core.burstiness([1, 2]) is None
    lex = core.readability(["The cat sat on the mat."])
    assert lex["flesch_reading_ease"] == pytest.approx(116.145, abs=1e-6)
    assert core.fleiss_kappa([["a", "a"], ["b", "b"], ["a", "a"]]) == 1.0
    assert core.normalize_tweet("hi @bob see https://x.co/a") == "hi @USER see HTTPURL"


def test_python_pipeline(tmp_path):
    mp = pytest.importorskip("mission_profiler")
    pytest.importorskip("mission_profiler._core")
    mp.synth(str(tmp_path / "b"), seed=4, on_mission=6, genuine=6)
    report = mp.run_pipeline(tmp_path / "b" / "pipeline.json", out=tmp_path / "o")
    assert report["seed"] == 4
    assert sum(1 for _ in (tmp_path / "o" / "plots").iterdir()) >= 10
    with pytest.raises(mp.MissionError) as err:
        mp.run_pipeline(tmp_path / "b" / "pipeline.json", out=tmp_path / "o", until="nowhere")
    assert err.value.stage == "config"
    assert err.value.exit_code == 2
