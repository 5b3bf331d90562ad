import json
import math

import numpy as np
import pytest

import mouseleak


def test_mfcc_shape_and_determinism():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 44100)
    a = mouseleak.mfcc(x, 44100)
    assert a.shape[1] == 13
    assert np.array_equal(a, mouseleak.mfcc(x, 44100))


def test_wav_round_trip(tmp_path):
    x = np.linspace(-0.5, 0.5, 800).reshape(2, 400)
    path = tmp_path / "t.wav"
    mouseleak.write_wav(path, x, 8000)
    y, rate = mouseleak.read_wav(path)
    assert rate == 8000
    assert y.shape == (2, 400)
    assert np.max(np.abs(y - x)) <= 1.0 / 32768


def test_angles():
    assert mouseleak.bin_angle(0) == "Up"
    assert mouseleak.bin_angle(315) == "Up"
    assert mouseleak.bin_angle(45) == "Right"
    assert mouseleak.angular_error(350, 10) == pytest.approx(20)
    assert mouseleak.displacement_to_angle(1, 0) == pytest.approx(90)


def test_simulated_session_pipeline():
    scene = {
        "sample_rate": 16000,
        "seed": 3,
        "noise_floor_db": -50,
        "duration_s": 20,
        "events": [
            {"type": "movement", "waypoints": [{"t": 5.0, "at": "TL"}, {"t": 5.6, "at": "BR"}]},
        ],
    }
    samples, rate, labels = mouseleak.simulate(json.dumps(scene))
    assert rate == 16000
    assert samples.shape == (2, 20 * 16000)
    assert [l["kind"] for l in labels] == ["movement"]
    assert labels[0]["label"] == "TL→BR"

    found = mouseleak.detect_activity(samples, rate)
    assert len(found) == 1
    assert found[0]["start_s"] == pytest.approx(5.0, abs=0.05)
    assert found[0]["end_s"] == pytest.approx(5.6, abs=0.05)

    moving = samples[:, int(5.0 * rate) : int(5.6 * rate)]
    diff = mouseleak.difference_amplitude_line(moving)
    assert len(diff) == 50
    slope, _ = mouseleak.fit_trend(diff)
    assert slope < 0  # the source moves from the top mic towards the bottom one


def test_click_detection():
    events = [{"type": "click", "at_s": 1.0 + i, "gap_ms": 30 + 20 * i} for i in range(5)]
    scene = {"sample_rate": 44100, "seed": 5, "noise_floor_db": -40, "events": events}
    samples, rate, _ = mouseleak.simulate(json.dumps(scene))
    clicks = mouseleak.detect_clicks(samples, rate)
    assert len(clicks) == 5
    for i, (press, release) in enumerate(clicks):
        assert press == pytest.approx(1.0 + i, abs=0.002)
        assert (release - press) * 1000 == pytest.approx(30 + 20 * i, abs=2)


def test_forest_round_trip():
    rng = np.random.default_rng(1)
    x = np.vstack([rng.normal(0, 0.1, (30, 3)), rng.normal(1, 0.1, (30, 3))])
    y = ["low"] * 30 + ["high"] * 30
    model = mouseleak.RandomForest.train(x, y, n_trees=15, seed=4)
    assert model.classes == ["low", "high"]
    assert model.predict(x) == y
    clone = mouseleak.RandomForest.from_json(model.to_json())
    assert clone.to_json() == model.to_json()
    assert math.fsum(clone.predict_proba(list(x[0]))) == pytest.approx(1.0)


def test_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(mouseleak.MouseleakError, match="unknown key"):
        mouseleak.simulate(json.dumps({"loudness": 3}))
    with pytest.raises(mouseleak.MouseleakError):
        mouseleak.read_wav(tmp_path / "missing.wav")


def test_run_cli(tmp_path):
    code, out, err = mouseleak.run_cli(["--seed", "9", "--dump-config"])
    assert code == 0, err
    assert json.loads(out)["seed"] == 9
    code, _, _ = mouseleak.run_cli(["no-such-command"])
    assert code == 2
