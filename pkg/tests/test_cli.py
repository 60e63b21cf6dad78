import csv
import json
import subprocess
import sys

import pytest

from helpers import mini_manifest, run_pipeline, tree_hashes
from prosody_gesture.cli import main
from prosody_gesture.midi import read_phrase


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    codes = run_pipeline(out)
    return out, codes


def test_pipeline_exit_codes(pipeline):
    _, codes = pipeline
    assert codes == [0] * len(codes)


def test_validate_report(pipeline):
    out, _ = pipeline
    r = json.loads((out / "validate" / "validation_report.json").read_text())
    assert r["n_accepted"] == 36 and r["n_rejected"] == 3


def test_generated_phrase_in_bounds(pipeline):
    out, _ = pipeline
    p = read_phrase(out / "gen" / "happy_seed7.mid")
    assert 100 <= p.total_duration_ms <= 6000


def test_simulation_passes(pipeline):
    out, _ = pipeline
    assert json.loads((out / "sim" / "happy_seed7.sim.json").read_text())["pass"] is True


def test_stimuli_layout(pipeline):
    out, _ = pipeline
    s = json.loads((out / "stimuli" / "stimuli.json").read_text())
    assert len(s["stimuli"]) == 40
    assert len(list((out / "stimuli" / "gestures").glob("*.json"))) == 32
    assert len(list((out / "stimuli" / "renders").glob("*.json"))) == 24


def test_deterministic_artifacts(pipeline, tmp_path):
    out, _ = pipeline
    run_pipeline(tmp_path)
    assert tree_hashes(tmp_path) == tree_hashes(out)


def test_generate_same_seed_same_bytes(pipeline, tmp_path):
    out, _ = pipeline
    for d in ("a", "b"):
        assert main(["generate", "--model", str(out / "models" / "sad.model"), "--seed", "5", "--duration", "2500",
                     "--count", "3", "--out", str(tmp_path / d)]) == 0
    assert tree_hashes(tmp_path / "a") == tree_hashes(tmp_path / "b")
    assert len(tree_hashes(tmp_path / "a")) == 3


def test_stochastic(tmp_path):
    assert main(["stochastic", "--stimulus-id", "SGA-sad-2", "--duration", "4000", "--csv", "--out", str(tmp_path)]) == 0
    plan = json.loads((tmp_path / "SGA-sad-2.gesture.json").read_text())
    assert plan["source"] == "stochastic" and plan["duration_ms"] == 4000


def test_gesture_from_coordinates(pipeline, tmp_path):
    out, _ = pipeline
    assert main(["gesture", "--phrase", str(out / "gen" / "happy_seed7.mid"), "--valence", "-0.8",
                 "--arousal", "0.9", "--out", str(tmp_path)]) == 0
    plan = json.loads((tmp_path / "happy_seed7.gesture.json").read_text())
    assert plan["emotion"] == {"valence": -0.8, "arousal": 0.9}


def test_analyze(pipeline, tmp_path):
    out, _ = pipeline
    stim = json.loads((out / "stimuli" / "stimuli.json").read_text())["stimuli"]
    with open(tmp_path / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant", "stimulus", "true", "predicted"])
        for p in range(3):
            for s in stim:
                w.writerow([f"p{p}", s["id"], s["quadrant"], s["quadrant"] if p else "happy"])
    assert main(["analyze", "--trials", str(tmp_path / "trials.csv"), "--stimuli", str(out / "stimuli" / "stimuli.json"),
                 "--out", str(tmp_path / "a")]) == 0
    r = json.loads((tmp_path / "a" / "analysis.json").read_text())
    assert r["overall"]["n_trials"] == 120
    assert (tmp_path / "a" / "confusion.csv").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["generate", "--out", "x"],
    ["simulate", "--gesture", "g.json"],
    ["render", "--phrase", "p.mid", "--seed", "1", "--sample-rate", "8000", "--out", "x"],
    ["analyze", "--out", "x"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_missing_file_exits_1(tmp_path, capsys):
    assert main(["features", "--phrase", str(tmp_path / "nope.mid"), "--out", str(tmp_path)]) == 1
    assert capsys.readouterr().err


def test_bad_model_exits_1(tmp_path, capsys):
    (tmp_path / "m.model").write_text('{"kind": "lstm"}')
    assert main(["generate", "--model", str(tmp_path / "m.model"), "--seed", "1", "--duration", "1000",
                 "--out", str(tmp_path)]) == 1


def test_strict_failure_exits_1(tmp_path, capsys):
    plan = {"source": "generated", "duration_ms": 100.0, "emotion": {"valence": 0, "arousal": 0},
            "trajectories": [{"dof": "torso", "keyframes": [[0, 0], [100, 0.4]], "interpolation": ["linear"]}]}
    (tmp_path / "g.json").write_text(json.dumps(plan))
    assert main(["simulate", "--gesture", str(tmp_path / "g.json"), "--strict", "--out", str(tmp_path)]) == 1
    assert main(["simulate", "--gesture", str(tmp_path / "g.json"), "--out", str(tmp_path)]) == 0


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "prosody_gesture.cli", "validate", "--manifest", mini_manifest(),
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
