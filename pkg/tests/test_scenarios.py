"""End-to-end scenarios: console core + simulated robot over an impaired
link under virtual time."""

import math

import pytest

from opconsole.harness import SimHarness, TraceRecorder, replay_trace
from opconsole.sim import CameraSpec
from opconsole.wire import EnvelopeKind


def gamepad(left=(0.0, 0.0), right=(0.0, 0.0), triggers=(0.0, 0.0), **buttons):
    return {
        "left": list(left),
        "right": list(right),
        "triggers": list(triggers),
        "buttons": {k: bool(v) for k, v in buttons.items()},
    }


def drive(harness, client, seconds, left=(0.0, 1.0), **buttons):
    """Stream gamepad frames at 30 Hz for a stretch of virtual time."""
    frames = int(seconds * 30)
    for _ in range(frames):
        client.publish("input/gamepad", gamepad(left=left, **buttons))
        harness.run_for(1.0 / 30.0)


class TestTelemetryMetrics:
    def test_latency_and_fps_on_impaired_link(self, demo_config):
        harness = SimHarness(
            config=demo_config,
            base_latency=0.050,
            jitter=0.0,
            drop=0.0,
            cameras=[CameraSpec(id="front", fps=10.0)],
        )
        client = harness.add_client()
        client.subscribe("camera/front/frame")
        harness.run_for(5.0)
        stats = harness.core.stream_stats("camera/front/frame")
        assert stats is not None
        assert abs(stats.latency - 0.050) < 0.001
        assert abs(stats.fps - 10.0) < 0.1
        # the dashboard overlay sees the same numbers
        assert client.model.camera_stats["front"]["fps"] == pytest.approx(stats.fps)

    def test_clock_skew_handshake(self, demo_config):
        # without the offset handshake, latency would be off by the skew
        harness = SimHarness(config=demo_config, base_latency=0.02, robot_clock_skew=500.0)
        harness.run_for(3.0)
        stats = harness.core.stream_stats("camera/front/frame")
        assert stats is not None
        assert abs(stats.latency - 0.02) < 0.001

    def test_connection_degrades_within_two_heartbeats(self, demo_config):
        harness = SimHarness(config=demo_config)
        client = harness.add_client()
        harness.run_for(3.0)
        assert client.model.connection["alive"] is True
        assert client.model.connection["loss_fraction"] == 0.0
        cut_at = harness.clock.mono()
        harness.uplink.drop_probability = 1.0
        harness.downlink.drop_probability = 1.0
        harness.run_for(1.2)  # 2 x 0.5 s heartbeat period, plus one tick
        assert client.model.connection["alive"] is False
        degraded_at = next(
            t for t, env in client.inbox
            if env.channel == "robot/connection" and env.payload["alive"] is False
        )
        assert degraded_at - cut_at <= 1.0 + 0.1


class TestEStopEndToEnd:
    def test_healthy_link_zeroes_velocity_within_a_tick_and_acks(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        harness.run_for(1.0)
        drive(harness, client, 1.0)
        assert harness.robot.robot.x > 0.5  # the robot was actually moving
        client.request("estop/trigger")
        harness.run_for(0.01 + 0.011)  # command flight time + one sim tick
        x_at_stop = harness.robot.robot.x
        assert harness.robot.robot.estop_latched is True
        drive(harness, client, 0.5)
        assert harness.robot.robot.x == pytest.approx(x_at_stop, abs=1e-9)
        harness.run_for(1.0)
        assert harness.core._estop_wait["acked"] is True
        names = [i["name"] for i in client.model.diagnostics["items"]]
        assert "console/estop_link" not in names
        assert client.model.estop["any_pressed"] is True

    def test_dead_link_latches_locally_and_warns(self, demo_config):
        harness = SimHarness(config=demo_config, drop=1.0)
        client = harness.add_client()
        harness.run_for(1.0)
        client.request("estop/trigger")
        harness.run_for(1.3)
        assert client.model.estop["any_pressed"] is True          # local latch
        assert harness.robot.robot.estop_latched is False          # command never arrived
        names = [i["name"] for i in client.model.diagnostics["items"]]
        assert "console/estop_link" in names
        assert client.model.diagnostics["aggregate"] == "WARNING"

    def test_release_restores_motion(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        harness.run_for(0.5)
        client.request("estop/trigger")
        harness.run_for(0.5)
        client.request("estop/release")
        harness.run_for(0.5)
        assert client.model.estop["any_pressed"] is False
        assert harness.robot.robot.estop_latched is False
        x0 = harness.robot.robot.x
        drive(harness, client, 0.5)
        assert harness.robot.robot.x > x0

    def test_hardware_estop_triggers_independently_and_reports(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        harness.run_for(0.5)
        harness.robot.set_hardware_estop("hw_rear", True)
        assert harness.robot.robot.estop_latched is True  # latched before any report lands
        harness.run_for(0.5)
        pressed = {c["name"]: c["pressed"] for c in client.model.estop["channels"]}
        assert pressed["hw_rear"] is True
        assert client.model.estop["any_pressed"] is True


class TestMissionSupervision:
    def mission_doc(self):
        return {
            "mission": {
                "name": "inspection run",
                "tasks": [
                    {"label": "Drive to door", "action_id": "drive_to",
                     "context": {}},
                    {"label": "Unfold arm", "action_id": "unfold"},
                    {"label": "Confirm victim", "action_id": "inspect"},
                ],
            }
        }

    def test_full_mission_with_confirmation(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        client.publish("tool/waypoint", {"x": 0.5, "y": 0.0})
        harness.run_for(0.5)
        client.call("mission/load", self.mission_doc())
        client.call("mission/start")
        harness.run_for(4.0)  # drive_to completes, arm unfolds, inspect asks
        assert client.model.mission["phase"] == "awaiting_confirmation"
        assert client.model.mission["pending_prompt"] == "Victim detected?"
        client.call("mission/confirm", {"option": "Confirm"})
        harness.run_for(1.0)
        assert client.model.mission["phase"] == "finished"
        assert client.model.mission["results"] == ["succeeded", "succeeded", "succeeded"]

    def test_pause_resume_and_stop(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        client.publish("tool/waypoint", {"x": 3.0, "y": 0.0})
        harness.run_for(0.5)
        client.call("mission/load", self.mission_doc())
        client.call("mission/start")
        harness.run_for(0.5)
        client.call("mission/control", {"cmd": "pause_resume"})
        harness.run_for(0.2)
        assert client.model.mission["phase"] == "paused"
        x_paused = harness.robot.robot.x
        harness.run_for(0.5)
        # pausing canceled the drive command; robot coasts to a stop
        assert harness.robot.robot.x == pytest.approx(x_paused, abs=0.05)
        client.call("mission/control", {"cmd": "stop"})
        harness.run_for(0.2)
        assert client.model.mission["phase"] == "idle"
        assert client.model.mission["current_index"] == 0

    def test_look_at_action_moves_ee(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        client.publish("tool/lookat", {"point": [0.6, 0.1, 0.5], "direction": [1.0, 0.0, 0.0]})
        harness.run_for(0.2)
        client.call("actions/execute", {"action_id": "look_at"})
        harness.run_for(0.5)
        ee = harness.robot.robot.ee
        assert ee.position == pytest.approx((0.3, 0.1, 0.5))
        final = client.model.executions[max(client.model.executions)]
        assert final["state"] == "succeeded"

    def test_unreachable_look_at_fails_action(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        client.publish("tool/lookat", {"point": [20.0, 0.0, 0.5], "direction": [1.0, 0.0, 0.0]})
        harness.run_for(0.2)
        client.call("actions/execute", {"action_id": "look_at"})
        harness.run_for(0.5)
        final = [e for e in client.model.executions.values() if e["action_id"] == "look_at"][-1]
        assert final["state"] == "failed"
        assert "reach" in final["status_text"]


class TestDirectControl:
    def test_doorway_drive_and_mode_switches(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        harness.run_for(0.5)
        drive(harness, client, 2.0)  # forward through the doorway
        assert harness.robot.robot.x > 1.2
        # reverse mode: R badge state propagates
        client.publish("input/gamepad", gamepad(reverse=True))
        harness.run_for(0.1)
        client.publish("input/gamepad", gamepad())
        harness.run_for(0.2)
        assert client.model.control_mode == "drive_reversed"
        x0 = harness.robot.robot.x
        drive(harness, client, 0.5)
        assert harness.robot.robot.x < x0  # forward stick now drives backward
        # manipulation mode via gamepad button
        client.publish("input/gamepad", gamepad(mode=True))
        harness.run_for(0.2)
        assert client.model.control_mode == "manipulation"

    def test_operation_mode_switch_reaches_theme_data(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        harness.run_for(0.5)
        assert client.model.mode == "teleoperation"
        client.call("actions/execute", {"action_id": "manip_mode"})
        harness.run_for(0.5)
        assert client.model.mode == "manipulation"


class TestMultiClientConvergence:
    def scripted_session(self, harness, driver):
        driver.publish("tool/waypoint", {"x": 0.4, "y": 0.0})
        harness.run_for(0.5)
        driver.call("actions/execute", {"action_id": "led"})
        harness.run_for(0.5)
        driver.call("actions/execute", {"action_id": "led"})
        harness.run_for(0.5)
        driver.call("mission/load", {
            "mission": {"name": "m", "tasks": [
                {"label": "drive", "action_id": "drive_to"},
                {"label": "arm", "action_id": "unfold"},
            ]},
        })
        driver.call("mission/start")
        harness.run_for(2.0)
        driver.request("estop/trigger")
        harness.run_for(1.5)
        driver.request("estop/release")
        harness.run_for(1.0)

    def test_two_clients_identical_streams_and_late_joiner_converges(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.02)
        a = harness.add_client()
        b = harness.add_client()
        harness.run_for(0.5)
        self.scripted_session(harness, a)
        shared_channels = ("actions/toggles", "mission/state", "estop/summary")

        def stream(client):
            return [
                (env.channel, env.payload)
                for _, env in client.inbox
                if env.kind is EnvelopeKind.PUBLISH and env.channel in shared_channels
            ]

        assert stream(a) == stream(b)
        assert a.model.shared_state() == b.model.shared_state()
        late = harness.add_client()
        harness.run_for(0.5)
        assert late.model.shared_state() == a.model.shared_state()

    def test_every_event_keeps_models_identical(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.02)
        a = harness.add_client()
        b = harness.add_client()
        harness.run_for(0.2)
        self.scripted_session(harness, a)
        # replaying both inboxes event by event never diverges
        from opconsole.harness import ClientModel

        model_a, model_b = ClientModel(), ClientModel()
        events_a = [e for _, e in a.inbox if e.kind is EnvelopeKind.PUBLISH]
        events_b = [e for _, e in b.inbox if e.kind is EnvelopeKind.PUBLISH]
        shared = ("actions/toggles", "mission/state", "estop/summary", "robot/mode")
        pairs = [
            (ea, eb)
            for ea, eb in zip(events_a, events_b)
            if ea.channel in shared or eb.channel in shared
        ]
        for ea, eb in pairs:
            model_a.apply(ea)
            model_b.apply(eb)
            assert model_a.shared_state() == model_b.shared_state()


class TestRecordReplay:
    def test_replayed_session_reaches_identical_shared_state(self, demo_config, tmp_path):
        recorder = TraceRecorder()
        harness = SimHarness(config=demo_config, base_latency=0.02, seed=5, recorder=recorder)
        client = harness.add_client()
        harness.run_for(0.5)
        client.call("actions/execute", {"action_id": "led"})
        harness.run_for(0.5)
        client.call("mission/load", {
            "mission": {"name": "m", "tasks": [{"label": "arm", "action_id": "unfold"}]},
        })
        client.call("mission/start")
        harness.run_for(1.0)
        client.request("estop/trigger")
        harness.run_for(1.5)
        end_time = harness.clock.mono()
        trace_path = tmp_path / "trace.jsonl"
        recorder.dump(trace_path)

        replay = SimHarness(config=demo_config, base_latency=0.02, seed=5)
        entries = TraceRecorder.load(trace_path)
        replay_trace(replay, entries, settle=end_time - max(e["t"] for e in entries))
        assert replay.clients[0].model.shared_state() == client.model.shared_state()
        assert replay.robot.robot.estop_latched == harness.robot.robot.estop_latched


class TestSettingsDuringMission:
    def test_setting_change_while_running_warns(self, demo_config):
        harness = SimHarness(config=demo_config, base_latency=0.01)
        client = harness.add_client()
        client.publish("tool/waypoint", {"x": 5.0, "y": 0.0})
        harness.run_for(0.3)
        client.call("mission/load", {
            "mission": {"name": "m", "tasks": [{"label": "drive", "action_id": "drive_to"}]},
        })
        client.call("mission/start")
        harness.run_for(0.3)
        client.call("settings/set", {"path": "planner/max_vel_x", "value": 0.2})
        harness.run_for(0.2)
        assert any("active mission" in e.get("text", "") for e in client.model.events)
