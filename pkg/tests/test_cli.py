import json
import math

import numpy as np
import pytest
from PIL import Image

from opconsole import config as config_store
from opconsole.cli import main
from opconsole.harness import SimHarness, TraceRecorder

from conftest import build_demo_config


def synthetic_clicks():
    # panel photographed under a mild projective tilt
    m = np.array([[1.1, 0.08, 40.0], [-0.05, 0.95, 25.0], [2e-4, -1e-4, 1.0]])
    inv = np.linalg.inv(m)

    def to_image(u_cm, v_cm, scale=4.0):
        x, y, w = inv @ (u_cm * scale, v_cm * scale, 1.0)
        return [x / w, y / w]

    return {
        "corners": [to_image(0, 0), to_image(90, 0), to_image(90, 60), to_image(0, 60)],
        "panel_cm": [90.0, 60.0],
        "target_px_per_cm": 4.0,
        "scale_mark": {"p1": to_image(10, 50), "p2": to_image(80, 50), "length_cm": 70.0},
        "polylines": [[to_image(10, 10), to_image(50, 30), to_image(80, 20)]],
    }


class TestMeasureCli:
    def test_measure_writes_session(self, tmp_path, capsys):
        clicks_path = tmp_path / "clicks.json"
        clicks_path.write_text(json.dumps(synthetic_clicks()))
        out_path = tmp_path / "session.json"
        code = main(["measure", "--clicks", str(clicks_path), "--out", str(out_path)])
        assert code == 0
        session = json.loads(out_path.read_text())
        truth = (
            math.dist((10, 10), (50, 30)) + math.dist((50, 30), (80, 20))
        )
        assert session["measurements"][0]["length_cm"] == pytest.approx(truth, rel=1e-6)

    def test_measure_rectified_png(self, tmp_path):
        clicks_path = tmp_path / "clicks.json"
        clicks_path.write_text(json.dumps(synthetic_clicks()))
        image_path = tmp_path / "snap.png"
        Image.fromarray(np.full((480, 640, 3), 128, dtype=np.uint8)).save(image_path)
        rectified_path = tmp_path / "rect.png"
        code = main([
            "measure", "--clicks", str(clicks_path), "--image", str(image_path),
            "--out", str(tmp_path / "s.json"), "--rectified", str(rectified_path),
        ])
        assert code == 0
        out = Image.open(rectified_path)
        assert out.size == (360, 240)  # 90x60 cm at 4 px/cm

    def test_degenerate_clicks_fail_cleanly(self, tmp_path, capsys):
        clicks = synthetic_clicks()
        clicks["corners"] = [[0, 0], [1, 0], [2, 0], [0, 5]]
        clicks_path = tmp_path / "clicks.json"
        clicks_path.write_text(json.dumps(clicks))
        code = main(["measure", "--clicks", str(clicks_path)])
        assert code == 1
        assert "failed" in capsys.readouterr().err


class TestReplayCli:
    def test_replay_reports_shared_state(self, tmp_path, capsys):
        config = build_demo_config()
        config_path = tmp_path / "console.json"
        config_store.save(config, config_path)
        recorder = TraceRecorder()
        harness = SimHarness(config=config, seed=3, recorder=recorder)
        client = harness.add_client()
        harness.run_for(0.5)
        client.call("actions/execute", {"action_id": "led"})
        harness.run_for(0.5)
        client.request("estop/trigger")
        harness.run_for(1.0)
        trace_path = tmp_path / "trace.jsonl"
        recorder.dump(trace_path)

        code = main(["replay", str(trace_path), "--config", str(config_path), "--seed", "3"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["events_replayed"] == len(recorder.entries)
        states = list(summary["clients"].values())
        assert states[0]["toggles"] == {"led": 1}
        assert states[0]["estop"]["any_pressed"] is True


def test_parser_covers_spec_flags():
    from opconsole.cli import build_parser

    parser = build_parser()
    args = parser.parse_args([
        "serve", "--config", "x.json", "--listen", "0.0.0.0:9000",
        "--robot", "embedded-sim", "--role", "enduser", "--record", "t.jsonl",
        "--latency", "0.05", "--jitter", "0.01", "--drop", "0.1", "--seed", "7",
        "--tick-rate", "50",
    ])
    assert args.robot == "embedded-sim"
    assert args.role == "enduser"
    args = parser.parse_args(["sim", "--connect", "localhost:9001", "--scenario", "s.json"])
    assert args.fn is not None
