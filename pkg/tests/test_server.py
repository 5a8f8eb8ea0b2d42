import json

import pytest
from fastapi.testclient import TestClient

from opconsole.core import Role
from opconsole.server import ServerState, build_app
from opconsole.sim import LinkModel


@pytest.fixture
def app_state(demo_config):
    return ServerState(
        config=demo_config,
        config_path=None,
        robot_mode="embedded-sim",
        link=LinkModel(),
        tick_rate=100.0,
        default_role=Role.DEVELOPER,
    )


def ws_send(ws, kind, channel, payload=None, rid=None):
    ws.send_text(json.dumps({
        "v": 1, "kind": kind, "channel": channel, "payload": payload,
        "id": rid, "stamp_wall": 0.0, "stamp_mono": 0.0,
    }))


def read_until(ws, predicate, limit=100):
    for _ in range(limit):
        doc = json.loads(ws.receive_text())
        if predicate(doc):
            return doc
    raise AssertionError("expected message never arrived")


class TestServer:
    def test_fallback_page_served_without_bundle(self, app_state):
        app = build_app(app_state, frontend_dir=None)
        with TestClient(app) as client:
            response = client.get("/")
            assert response.status_code == 200
            assert "operator console" in response.text

    def test_websocket_snapshot_and_service(self, app_state):
        app = build_app(app_state, frontend_dir=None)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                ws_send(ws, "subscribe", "mission/state")
                snapshot = read_until(ws, lambda d: d["channel"] == "mission/state")
                assert snapshot["payload"]["phase"] == "idle"
                ws_send(ws, "service_request", "session/info", {}, rid="r1")
                info = read_until(ws, lambda d: d.get("id") == "r1")
                assert info["payload"]["role"] == "developer"

    def test_role_from_query_param(self, app_state):
        app = build_app(app_state, frontend_dir=None)
        with TestClient(app) as client:
            with client.websocket_connect("/ws?role=enduser") as ws:
                ws_send(ws, "service_request", "session/info", {}, rid="r1")
                info = read_until(ws, lambda d: d.get("id") == "r1")
                assert info["payload"]["role"] == "enduser"
                assert info["payload"]["can_configure"] is False

    def test_execute_action_against_embedded_sim(self, app_state):
        app = build_app(app_state, frontend_dir=None)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                ws_send(ws, "subscribe", "actions/executions")
                ws_send(ws, "service_request", "actions/execute",
                        {"action_id": "unfold"}, rid="r2")
                done = read_until(
                    ws,
                    lambda d: d["channel"] == "actions/executions"
                    and d["payload"].get("state") == "succeeded",
                )
                assert done["payload"]["action_id"] == "unfold"

    def test_telemetry_flows_to_websocket(self, app_state):
        app = build_app(app_state, frontend_dir=None)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                ws_send(ws, "subscribe", "robot/mode")
                mode = read_until(ws, lambda d: d["channel"] == "robot/mode")
                assert mode["payload"]["mode"] == "teleoperation"
