"""The console gateway: one process owning the action registry, the
execution manager, the mission runner, the e-stop manager, settings, and
camera configuration, speaking the wire protocol to any number of operator
clients and exactly one robot link.

Concurrency model: one writer. Every mutation enters through
on_client_message / on_robot_message / tick on a single thread (the
server funnels all I/O onto one event loop; the harness is synchronous),
so ordering is total and snapshots are plain values.

Clients converge through snapshot-then-delta: subscribing to a stateful
channel first replays the retained state, then ordered broadcasts follow.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

from . import config as config_store
from .actions import (
    ActionRegistry,
    ActionSpec,
    ActionTree,
    ToggleAction,
    action_multiset,
    add_folder,
    insert_reference,
    move_node,
    remove_node,
)
from .config import ConsoleConfig, valid_camera_channel
from .errors import (
    BusyError,
    ConsoleError,
    FeedbackError,
    NotFoundError,
    ParseError,
    PermissionDeniedError,
    ServiceUnavailableError,
    StateError,
    ValidationError,
    wire_code,
)
from .estop import EStopManager, EStopSource, EStopSummary
from .executor import ActionExecutor, ExecState, ExecutionRecord
from .mission import (
    ConfirmationRequest,
    Mission,
    MissionCommand,
    MissionRunner,
    MissionState,
    MissionTask,
)
from .params import SettingsStore
from .telemetry import (
    DiagnosticLevel,
    SensorReading,
    StreamStats,
    ThresholdDirection,
    classify,
    update_stream_stats,
)
from .wire import ChannelRegistry, Envelope, EnvelopeKind, decode, encode, route

ROBOT_CONN = "robot"
CORE_CONN = "core"

HEARTBEAT_PERIOD = 0.5
PING_TIMEOUT = 1.0
PING_WINDOW = 10
ESTOP_ACK_WINDOW = 1.0
EXECUTION_HISTORY = 200

SOFTWARE_ESTOP = "ui"
ESTOP_LINK_DIAGNOSTIC = "console/estop_link"


class Role(Enum):
    DEVELOPER = "developer"
    END_USER = "enduser"


DEVELOPER_ONLY = frozenset(
    {"actions/register", "cameras/add", "config/save", "config/reload"}
)


@dataclass
class _Client:
    conn_id: str
    send: Callable[[bytes], None]
    role: Role


def exec_record_payload(record: ExecutionRecord) -> dict:
    return {
        "exec_id": record.exec_id,
        "action_id": record.action_id,
        "state": record.state.value,
        "status_text": record.status_text,
        "indeterminate": record.indeterminate,
        "started": record.started,
        "ended": record.ended,
        "parent": record.parent,
        "children": list(record.children),
    }


def mission_state_payload(state: MissionState) -> dict:
    return {
        "mission_name": state.mission_name,
        "phase": state.phase.value,
        "current_index": state.current_index,
        "task_labels": list(state.task_labels),
        "results": list(state.results),
        "pending_prompt": state.pending_prompt,
        "prompt_options": list(state.prompt_options),
        "failure": state.failure,
        "last_answer": state.last_answer,
    }


def estop_summary_payload(summary: EStopSummary) -> dict:
    return {
        "any_pressed": summary.any_pressed,
        "channels": [
            {
                "name": c.name,
                "pressed": c.pressed,
                "source": c.source.value,
                "last_update": c.last_update,
            }
            for c in summary.channels
        ],
    }


class ConsoleCore:
    def __init__(
        self,
        config: ConsoleConfig | None = None,
        mono: Callable[[], float] = None,
        wall: Callable[[], float] = None,
        config_path: str | None = None,
        recorder: Callable[[float, str, Envelope], None] | None = None,
    ):
        if mono is None or wall is None:
            raise ValidationError("core needs mono and wall clocks")
        self._mono = mono
        self._wall = wall
        self._config_path = config_path
        self._recorder = recorder
        self.registry = ChannelRegistry()
        self._clients: dict[str, _Client] = {}
        self._robot_send: Callable[[bytes], None] | None = None
        self._conn_seq = 0
        self._fwd_seq = 0
        self._ping_seq = 0
        self._estop_seq = 0
        self._forwarded: dict[str, tuple[str, str]] = {}  # fwd id -> (conn, original id)
        self._apply_config(config or config_store.default_config())
        # link monitoring
        self._clock_offset: float | None = None
        self._pending_pings: dict[str, float] = {}
        self._ping_results: deque[bool] = deque(maxlen=PING_WINDOW)
        self._next_ping = 0.0
        self._last_heard: float | None = None
        self._connection_alive = False
        self._next_connection_broadcast = 0.0
        # software e-stop ack watch
        self._estop_wait: dict[str, Any] | None = None
        # latest 3D tool inputs, exposed to scripts as the `tool` binding
        self._tool_inputs: dict[str, Any] = {}
        self._console_diagnostics: dict[str, tuple[DiagnosticLevel, str]] = {}
        self._robot_diag_items: list[dict] = []
        self._seen_channels: set[str] = set()

    # -- configuration ---------------------------------------------------------

    def _apply_config(self, config: ConsoleConfig) -> None:
        config_store.validate_config(config)
        config = copy.deepcopy(config)
        self.config = config
        self.actions = ActionRegistry.from_specs(config.actions)
        self.tree: ActionTree = config.action_tree
        self.settings = SettingsStore(config.settings)
        self.cameras = config.cameras
        self.camera_pairs = config.camera_pairs
        self._active_pair: str | None = None
        self._feedback_channels = {
            spec.feedback_channel: spec.id
            for spec in config.actions
            if isinstance(spec, ToggleAction) and spec.feedback_channel
        }
        self.executor = ActionExecutor(
            self.actions,
            _ExecutorSink(self),
            self._mono,
            on_event=self._on_execution_event,
            on_toggle=self._on_toggle_event,
            bindings=self._script_bindings,
        )
        self.mission = MissionRunner(
            self.executor,
            self._mono,
            on_state=self._on_mission_state,
            on_answer=self._on_confirmation_answer,
        )
        self.estop = EStopManager(self._mono, on_summary=self._on_estop_summary)
        self.estop.register_channel(SOFTWARE_ESTOP, EStopSource.SOFTWARE)
        self._stream_stats: dict[str, StreamStats] = {}
        self._retained: dict[str, Any] = {}
        self._sensor_configs = {s.name: s for s in config.sensors}
        self._executions: deque[dict] = deque(maxlen=EXECUTION_HISTORY)

    def current_config(self) -> ConsoleConfig:
        """Live state folded back into a persistable config."""
        return ConsoleConfig(
            cameras=copy.deepcopy(self.cameras),
            camera_pairs=copy.deepcopy(self.camera_pairs),
            actions=copy.deepcopy(self.actions.all_sorted()),
            action_tree=copy.deepcopy(self.tree),
            settings=self.settings.list(),
            sensors=copy.deepcopy(self.config.sensors),
            view=copy.deepcopy(self.config.view),
            extras=copy.deepcopy(self.config.extras),
        )

    # -- connections -------------------------------------------------------------

    def attach_client(self, send: Callable[[bytes], None], role: Role = Role.DEVELOPER) -> str:
        self._conn_seq += 1
        conn_id = f"c{self._conn_seq}"
        self._clients[conn_id] = _Client(conn_id=conn_id, send=send, role=role)
        return conn_id

    def detach_client(self, conn_id: str) -> None:
        self._clients.pop(conn_id, None)
        self.registry.drop_connection(conn_id)
        self._forwarded = {
            fwd: (conn, original)
            for fwd, (conn, original) in self._forwarded.items()
            if conn != conn_id
        }

    def attach_robot(self, send: Callable[[bytes], None]) -> None:
        if self._robot_send is not None:
            raise BusyError("a robot link is already attached")
        self._robot_send = send
        self._clock_offset = None
        self._pending_pings.clear()
        self._ping_results.clear()
        self._next_ping = self._mono()  # handshake on the next tick

    def detach_robot(self) -> None:
        self._robot_send = None
        self.registry.drop_connection(ROBOT_CONN)
        self._pending_pings.clear()

    # -- outbound helpers ----------------------------------------------------------

    def _envelope(self, kind: EnvelopeKind, channel: str, payload: Any, id: str | None = None) -> Envelope:
        return Envelope(
            kind=kind, channel=channel, payload=payload, id=id,
            stamp_wall=self._wall(), stamp_mono=self._mono(),
        )

    def _deliver(self, conn_id: str, envelope: Envelope) -> None:
        data = encode(envelope)
        if conn_id == ROBOT_CONN:
            if self._robot_send is not None:
                self._robot_send(data)
            return
        client = self._clients.get(conn_id)
        if client is not None:
            client.send(data)

    def _broadcast(self, channel: str, payload: Any, retain: bool = True) -> None:
        if retain:
            self._retained[channel] = payload
        envelope = self._envelope(EnvelopeKind.PUBLISH, channel, payload)
        for dest in route(envelope, self.registry):
            self._deliver(dest, envelope)

    def _send_error(self, conn_id: str, channel: str, request_id: str | None, exc: Exception) -> None:
        envelope = self._envelope(
            EnvelopeKind.ERROR,
            channel if channel else "gateway",
            {"error": wire_code(exc), "message": str(exc)},
            id=request_id,
        )
        self._deliver(conn_id, envelope)

    # -- inbound: clients -----------------------------------------------------------

    def on_client_message(self, conn_id: str, data: bytes | str) -> None:
        client = self._clients.get(conn_id)
        if client is None:
            return
        try:
            envelope = decode(data)
        except ConsoleError as exc:
            self._send_error(conn_id, "gateway", None, exc)
            return
        if self._recorder is not None:
            self._recorder(self._mono(), conn_id, envelope)
        if envelope.kind is EnvelopeKind.SUBSCRIBE:
            self.registry.subscribe(envelope.channel, conn_id)
            self._send_channel_snapshot(conn_id, envelope.channel)
        elif envelope.kind is EnvelopeKind.UNSUBSCRIBE:
            self.registry.unsubscribe(envelope.channel, conn_id)
        elif envelope.kind is EnvelopeKind.PUBLISH:
            self._on_client_publish(client, envelope)
        elif envelope.kind is EnvelopeKind.SERVICE_REQUEST:
            self._on_client_request(client, envelope)
        # client-originated responses/errors have no consumers in this artifact

    def _on_client_publish(self, client: _Client, envelope: Envelope) -> None:
        if envelope.channel.startswith("tool/"):
            self._tool_inputs[envelope.channel.split("/", 1)[1]] = envelope.payload
        for dest in route(envelope, self.registry):
            self._deliver(dest, envelope)

    def _on_client_request(self, client: _Client, envelope: Envelope) -> None:
        channel = envelope.channel
        handler = self._service_handlers().get(channel)
        try:
            if handler is not None:
                if channel in DEVELOPER_ONLY and client.role is not Role.DEVELOPER:
                    raise PermissionDeniedError(f"{channel} requires the developer role")
                payload = handler(client, envelope.payload or {})
                self._deliver(
                    client.conn_id,
                    self._envelope(EnvelopeKind.SERVICE_RESPONSE, channel, payload, id=envelope.id),
                )
                return
            provider = self.registry.services.get(channel)
            if provider is None:
                raise ServiceUnavailableError(channel)
            self._fwd_seq += 1
            fwd_id = f"fwd{self._fwd_seq}"
            self._forwarded[fwd_id] = (client.conn_id, envelope.id)
            self._deliver(
                provider,
                self._envelope(EnvelopeKind.SERVICE_REQUEST, channel, envelope.payload, id=fwd_id),
            )
        except ConsoleError as exc:
            self._send_error(client.conn_id, channel, envelope.id, exc)

    # -- inbound: robot ---------------------------------------------------------------

    def on_robot_message(self, data: bytes | str) -> None:
        try:
            envelope = decode(data)
        except ConsoleError:
            return  # a corrupt frame from the link is dropped silently
        self._last_heard = self._mono()
        if envelope.kind is EnvelopeKind.PUBLISH:
            self._on_robot_publish(envelope)
        elif envelope.kind in (EnvelopeKind.SERVICE_RESPONSE, EnvelopeKind.ERROR):
            self._on_robot_response(envelope)

    def _on_robot_publish(self, envelope: Envelope) -> None:
        channel = envelope.channel
        self._seen_channels.add(channel)
        payload = envelope.payload
        if channel == "gateway/advertise":
            self._on_robot_advertise(payload or {})
            return
        if channel == "robot/estop_ack":
            self._on_estop_ack(payload or {})
            return
        if channel == "estop/report":
            name = (payload or {}).get("name")
            if name is not None:
                if name not in self.estop.channel_names():
                    self.estop.register_channel(name, EStopSource.HARDWARE_REPORTED)
                self.estop.report_state(name, bool(payload.get("pressed")))
            return
        if channel == "mission/request_confirmation":
            self._on_confirmation_request(payload or {})
            return
        if channel == "robot/diagnostics":
            self._robot_diag_items = list((payload or {}).get("items", []))
            self._broadcast_diagnostics()
            return
        if channel in self._feedback_channels:
            try:
                self.executor.on_feedback(self._feedback_channels[channel], payload)
            except FeedbackError as exc:
                self._broadcast("gateway/events", {"level": "warning", "text": str(exc)}, retain=False)
            # feedback channels still fan out to subscribed clients below
        if channel.startswith("camera/") and channel.endswith("/frame"):
            payload = self._augment_frame(channel, envelope, payload)
            envelope = self._envelope(EnvelopeKind.PUBLISH, channel, payload)
        elif channel.startswith("robot/sensor/"):
            payload = self._augment_sensor(payload or {})
            envelope = self._envelope(EnvelopeKind.PUBLISH, channel, payload)
            self._retained[channel] = payload
        elif channel in ("robot/mode", "robot/control_mode", "robot/battery", "robot/posture"):
            self._retained[channel] = payload
        for dest in route(envelope, self.registry):
            self._deliver(dest, envelope)

    def _on_robot_advertise(self, payload: dict) -> None:
        for channel in payload.get("services", []):
            self.registry.advertise(channel, ROBOT_CONN)
        for channel in payload.get("subscriptions", []):
            self.registry.subscribe(channel, ROBOT_CONN)
        for name in payload.get("estop_channels", []):
            if name not in self.estop.channel_names():
                self.estop.register_channel(name, EStopSource.HARDWARE_REPORTED)
        self._broadcast("estop/summary", estop_summary_payload(self.estop.summary()))

    def _on_robot_response(self, envelope: Envelope) -> None:
        rid = envelope.id
        if rid is None:
            return
        if rid in self._forwarded:
            conn_id, original = self._forwarded.pop(rid)
            kind = envelope.kind
            self._deliver(conn_id, self._envelope(kind, envelope.channel, envelope.payload, id=original))
            return
        if rid in self._pending_pings:
            self._on_ping_response(rid, envelope.payload or {})
            return
        if rid in self.executor.records:
            if envelope.kind is EnvelopeKind.SERVICE_RESPONSE:
                self.executor.on_service_result(rid, True, _result_text(envelope.payload))
            else:
                message = (envelope.payload or {}).get("message", "service error")
                self.executor.on_service_result(rid, False, message)

    # -- service handlers ----------------------------------------------------------------

    def _service_handlers(self) -> dict[str, Callable[[_Client, dict], Any]]:
        return {
            "actions/register": self._svc_actions_register,
            "actions/execute": self._svc_actions_execute,
            "actions/cancel": self._svc_actions_cancel,
            "actions/move_node": self._svc_actions_move,
            "actions/insert": self._svc_actions_insert,
            "actions/add_folder": self._svc_actions_add_folder,
            "actions/remove_node": self._svc_actions_remove,
            "mission/load": self._svc_mission_load,
            "mission/start": self._svc_mission_start,
            "mission/control": self._svc_mission_control,
            "mission/confirm": self._svc_mission_confirm,
            "estop/trigger": self._svc_estop_trigger,
            "estop/release": self._svc_estop_release,
            "estop/report": self._svc_estop_report,
            "settings/list": self._svc_settings_list,
            "settings/set": self._svc_settings_set,
            "cameras/list": self._svc_cameras_list,
            "cameras/discover": self._svc_cameras_discover,
            "cameras/add": self._svc_cameras_add,
            "cameras/save_pair": self._svc_cameras_save_pair,
            "cameras/select_pair": self._svc_cameras_select_pair,
            "config/save": self._svc_config_save,
            "config/reload": self._svc_config_reload,
            "session/info": self._svc_session_info,
        }

    def _svc_actions_register(self, client: _Client, payload: dict) -> dict:
        spec = config_store._action_from_dict(payload.get("spec", {}))
        action_id = self.actions.register(spec)
        if isinstance(spec, ToggleAction) and spec.feedback_channel:
            self._feedback_channels[spec.feedback_channel] = action_id
        self._broadcast("actions/list", self._actions_list_payload())
        return {"action_id": action_id}

    def _svc_actions_execute(self, client: _Client, payload: dict) -> dict:
        exec_id = self.executor.execute(payload.get("action_id", ""), payload.get("context") or {})
        return {"exec_id": exec_id}

    def _svc_actions_cancel(self, client: _Client, payload: dict) -> dict:
        self.executor.cancel(payload.get("exec_id", ""))
        return {}

    def _svc_actions_move(self, client: _Client, payload: dict) -> dict:
        self.tree = move_node(
            self.tree, payload.get("path", []), payload.get("dest", []), int(payload.get("position", 0))
        )
        self._broadcast("actions/tree", self._tree_payload())
        return {}

    def _svc_actions_insert(self, client: _Client, payload: dict) -> dict:
        action_id = payload.get("action_id", "")
        if action_id not in self.actions:
            raise NotFoundError(f"unknown action {action_id!r}")
        self.tree = insert_reference(
            self.tree, payload.get("folder", []), int(payload.get("position", 0)), action_id
        )
        self._broadcast("actions/tree", self._tree_payload())
        return {}

    def _svc_actions_add_folder(self, client: _Client, payload: dict) -> dict:
        self.tree = add_folder(
            self.tree, payload.get("folder", []), int(payload.get("position", 0)), payload.get("name", "")
        )
        self._broadcast("actions/tree", self._tree_payload())
        return {}

    def _svc_actions_remove(self, client: _Client, payload: dict) -> dict:
        self.tree = remove_node(self.tree, payload.get("path", []))
        self._broadcast("actions/tree", self._tree_payload())
        return {}

    def _svc_mission_load(self, client: _Client, payload: dict) -> dict:
        doc = payload.get("mission", {})
        tasks = [
            MissionTask(
                label=t.get("label", t.get("action_id", "task")),
                action_id=t.get("action_id", ""),
                context=t.get("context") or {},
            )
            for t in doc.get("tasks", [])
        ]
        self.mission.load(Mission(name=doc.get("name", "mission"), tasks=tasks))
        return {}

    def _svc_mission_start(self, client: _Client, payload: dict) -> dict:
        self.mission.start()
        return {}

    def _svc_mission_control(self, client: _Client, payload: dict) -> dict:
        try:
            cmd = MissionCommand(payload.get("cmd", ""))
        except ValueError:
            raise ValidationError(f"unknown mission command {payload.get('cmd')!r}") from None
        self.mission.control(cmd)
        return {}

    def _svc_mission_confirm(self, client: _Client, payload: dict) -> dict:
        self.mission.answer(payload.get("option", ""))
        return {}

    def _svc_estop_trigger(self, client: _Client, payload: dict) -> dict:
        self.estop.report_state(SOFTWARE_ESTOP, True)
        self._estop_seq += 1
        token = f"estop{self._estop_seq}"
        self._estop_wait = {"token": token, "deadline": self._mono() + ESTOP_ACK_WINDOW, "acked": False}
        self._broadcast("robot/estop_cmd", {"pressed": True, "token": token}, retain=False)
        return {"token": token}

    def _svc_estop_release(self, client: _Client, payload: dict) -> dict:
        self.estop.report_state(SOFTWARE_ESTOP, False)
        self._estop_seq += 1
        self._estop_wait = None
        self._clear_console_diagnostic(ESTOP_LINK_DIAGNOSTIC)
        self._broadcast(
            "robot/estop_cmd", {"pressed": False, "token": f"estop{self._estop_seq}"}, retain=False
        )
        return {}

    def _svc_estop_report(self, client: _Client, payload: dict) -> dict:
        summary = self.estop.report_state(payload.get("name", ""), bool(payload.get("pressed")))
        return estop_summary_payload(summary)

    def _svc_settings_list(self, client: _Client, payload: dict) -> dict:
        return {"parameters": [config_store._param_to_dict(p) for p in self.settings.list()]}

    def _svc_settings_set(self, client: _Client, payload: dict) -> dict:
        param = self.settings.set(payload.get("path", ""), payload.get("value"))
        doc = config_store._param_to_dict(param)
        self._broadcast("settings/updates", doc, retain=False)
        if self.mission.state().phase.value == "running":
            self._broadcast(
                "gateway/events",
                {"level": "warning", "text": f"parameter {param.path} changed during an active mission"},
                retain=False,
            )
        return doc

    def _svc_cameras_list(self, client: _Client, payload: dict) -> dict:
        return self._cameras_payload()

    def _svc_cameras_discover(self, client: _Client, payload: dict) -> dict:
        return {"channels": sorted(c for c in self._seen_channels if valid_camera_channel(c))}

    def _svc_cameras_add(self, client: _Client, payload: dict) -> dict:
        config = self.current_config()
        updated = config_store.add_camera(config, payload.get("name", ""), payload.get("channel", ""))
        self.cameras = updated.cameras
        self._broadcast("cameras/list", self._cameras_payload())
        return {"id": updated.cameras[-1].id}

    def _svc_cameras_save_pair(self, client: _Client, payload: dict) -> dict:
        name = payload.get("name", "")
        left, right = payload.get("left", ""), payload.get("right", "")
        if not name:
            raise ValidationError("camera pair needs a name")
        ids = {c.id for c in self.cameras}
        for side, cam in (("left", left), ("right", right)):
            if cam not in ids:
                raise NotFoundError(f"{side} camera {cam!r} unknown")
        existing = next((p for p in self.camera_pairs if p.name == name), None)
        overwrote = existing is not None
        if existing is not None:
            existing.left, existing.right = left, right
        else:
            self.camera_pairs.append(config_store.CameraPair(name=name, left=left, right=right))
        self._broadcast("cameras/pairs", self._pairs_payload())
        return {"overwrote": overwrote}

    def _svc_cameras_select_pair(self, client: _Client, payload: dict) -> dict:
        name = payload.get("name", "")
        pair = next((p for p in self.camera_pairs if p.name == name), None)
        if pair is None:
            raise NotFoundError(f"unknown camera pair {name!r}")
        ids = {c.id for c in self.cameras}
        if pair.left not in ids or pair.right not in ids:
            pair.extras["stale"] = True
            self._broadcast("cameras/pairs", self._pairs_payload())
            raise NotFoundError(f"camera pair {name!r} references a removed camera")
        self._active_pair = name
        self._broadcast("cameras/active_pair", {"name": name, "left": pair.left, "right": pair.right})
        return {}

    def _svc_config_save(self, client: _Client, payload: dict) -> dict:
        path = payload.get("path") or self._config_path
        if not path:
            raise ValidationError("no config path configured")
        config_store.save(self.current_config(), path)
        return {"path": str(path)}

    def _svc_config_reload(self, client: _Client, payload: dict) -> dict:
        path = payload.get("path") or self._config_path
        if not path:
            raise ValidationError("no config path configured")
        self._apply_config(config_store.load(path))
        for channel in list(self.registry.subscriptions):
            for conn_id in self.registry.subscriptions.get(channel, set()):
                if conn_id != ROBOT_CONN:
                    self._send_channel_snapshot(conn_id, channel)
        return {"path": str(path)}

    def _svc_session_info(self, client: _Client, payload: dict) -> dict:
        return {
            "conn_id": client.conn_id,
            "role": client.role.value,
            "can_configure": client.role is Role.DEVELOPER,
        }

    # -- events from owned state machines ---------------------------------------------

    def _on_execution_event(self, record: ExecutionRecord) -> None:
        doc = exec_record_payload(record)
        self._executions.append(doc)
        self._broadcast("actions/executions", doc, retain=False)
        self.mission.on_execution_event(record)

    def _on_toggle_event(self, action_id: str, index: int) -> None:
        self._broadcast("actions/toggles", self._toggles_payload())

    def _on_mission_state(self, state: MissionState) -> None:
        self._broadcast("mission/state", mission_state_payload(state))

    def _on_confirmation_answer(self, prompt: str, option: str, timed_out: bool) -> None:
        self._broadcast(
            "mission/confirm_answer",
            {"prompt": prompt, "option": option, "timed_out": timed_out},
            retain=False,
        )

    def _on_estop_summary(self, summary: EStopSummary) -> None:
        self._broadcast("estop/summary", estop_summary_payload(summary))

    def _on_confirmation_request(self, payload: dict) -> None:
        try:
            request = ConfirmationRequest(
                prompt=payload.get("prompt", "Confirm?"),
                options=list(payload.get("options") or ["OK"]),
                deadline_s=payload.get("deadline_s"),
            )
            self.mission.request_confirmation(request)
        except (StateError, ValidationError) as exc:
            self._broadcast("gateway/events", {"level": "warning", "text": str(exc)}, retain=False)

    def _on_estop_ack(self, payload: dict) -> None:
        wait = self._estop_wait
        if wait is not None and payload.get("token") == wait["token"]:
            wait["acked"] = True
            self._clear_console_diagnostic(ESTOP_LINK_DIAGNOSTIC)

    # -- telemetry processing -------------------------------------------------------------

    def _augment_frame(self, channel: str, envelope: Envelope, payload: Any) -> dict:
        now = self._mono()
        stats = self._stream_stats.get(channel, StreamStats())
        stats = update_stream_stats(
            stats,
            frame_stamp=envelope.stamp_mono,
            receive_mono=now,
            sender_clock_offset=self._clock_offset or 0.0,
        )
        self._stream_stats[channel] = stats
        doc = dict(payload or {})
        doc["stats"] = {"fps": stats.fps, "latency": stats.latency}
        return doc

    def stream_stats(self, channel: str) -> StreamStats | None:
        return self._stream_stats.get(channel)

    def _augment_sensor(self, payload: dict) -> dict:
        name = payload.get("name", "")
        sensor = self._sensor_configs.get(name)
        doc = dict(payload)
        if sensor is not None:
            reading = SensorReading(
                name=name,
                value=float(payload.get("value", 0.0)),
                unit=sensor.unit,
                warn_threshold=sensor.warn_threshold,
                danger_threshold=sensor.danger_threshold,
                direction=sensor.direction,
            )
            doc["unit"] = sensor.unit
            doc["status"] = classify(reading).value
        else:
            doc["status"] = "safe"
        return doc

    def _broadcast_diagnostics(self) -> None:
        items = list(self._robot_diag_items)
        for name, (level, message) in sorted(self._console_diagnostics.items()):
            items.append({"name": name, "level": level.name, "message": message})
        aggregate = DiagnosticLevel.OK
        for item in items:
            level = DiagnosticLevel[item.get("level", "OK")]
            if level > aggregate:
                aggregate = level
        self._broadcast("robot/diagnostics", {"items": items, "aggregate": aggregate.name})

    def _set_console_diagnostic(self, name: str, level: DiagnosticLevel, message: str) -> None:
        self._console_diagnostics[name] = (level, message)
        self._broadcast_diagnostics()

    def _clear_console_diagnostic(self, name: str) -> None:
        if self._console_diagnostics.pop(name, None) is not None:
            self._broadcast_diagnostics()

    # -- ticking ------------------------------------------------------------------------

    def tick(self, now: float | None = None) -> None:
        now = self._mono() if now is None else now
        self.executor.tick(now)
        self.mission.tick(now)
        if self._robot_send is not None and now >= self._next_ping:
            self._send_ping(now)
            self._next_ping = now + HEARTBEAT_PERIOD
        for ping_id, t0 in list(self._pending_pings.items()):
            if now - t0 > PING_TIMEOUT:
                del self._pending_pings[ping_id]
                self._ping_results.append(False)
        wait = self._estop_wait
        if wait is not None and not wait["acked"] and now >= wait["deadline"]:
            wait["deadline"] = float("inf")  # warn once per trigger
            self._set_console_diagnostic(
                ESTOP_LINK_DIAGNOSTIC,
                DiagnosticLevel.WARNING,
                "software e-stop command not acknowledged by the robot",
            )
        alive = self._link_alive(now)
        if now >= self._next_connection_broadcast or alive != self._connection_alive:
            self._next_connection_broadcast = now + 1.0
            self._broadcast_connection(now)

    def _send_ping(self, now: float) -> None:
        self._ping_seq += 1
        ping_id = f"ping{self._ping_seq}"
        self._pending_pings[ping_id] = now
        self._deliver(
            ROBOT_CONN,
            self._envelope(EnvelopeKind.SERVICE_REQUEST, "link/ping", {"t0": now}, id=ping_id),
        )

    def _on_ping_response(self, ping_id: str, payload: dict) -> None:
        t0 = self._pending_pings.pop(ping_id)
        now = self._mono()
        self._ping_results.append(True)
        self._rtt = now - t0
        if self._clock_offset is None and "mono" in payload:
            # NTP midpoint: exact when the link latency is symmetric
            self._clock_offset = float(payload["mono"]) - (t0 + now) / 2.0
        self._broadcast_connection(now)

    def _link_alive(self, now: float) -> bool:
        return (
            self._robot_send is not None
            and self._last_heard is not None
            and now - self._last_heard <= 2 * HEARTBEAT_PERIOD
        )

    def _broadcast_connection(self, now: float) -> None:
        alive = self._link_alive(now)
        results = list(self._ping_results)
        loss = (results.count(False) / len(results)) if results else (0.0 if alive else 1.0)
        payload = {
            "rtt": getattr(self, "_rtt", 0.0),
            "loss_fraction": loss,
            "last_heard": self._last_heard if self._last_heard is not None else -1.0,
            "alive": alive,
        }
        if self._retained.get("robot/connection") != payload:
            self._broadcast("robot/connection", payload)
        self._connection_alive = alive

    # -- snapshots -------------------------------------------------------------------------

    def _send_channel_snapshot(self, conn_id: str, channel: str) -> None:
        for payload in self._snapshot_payloads(channel):
            self._deliver(conn_id, self._envelope(EnvelopeKind.PUBLISH, channel, payload))

    def _snapshot_payloads(self, channel: str) -> list[Any]:
        if channel == "mission/state":
            return [mission_state_payload(self.mission.state())]
        if channel == "estop/summary":
            return [estop_summary_payload(self.estop.summary())]
        if channel == "actions/list":
            return [self._actions_list_payload()]
        if channel == "actions/tree":
            return [self._tree_payload()]
        if channel == "actions/toggles":
            return [self._toggles_payload()]
        if channel == "actions/executions":
            return list(self._executions)
        if channel == "settings/updates":
            return [config_store._param_to_dict(p) for p in self.settings.list()]
        if channel == "cameras/list":
            return [self._cameras_payload()]
        if channel == "cameras/pairs":
            return [self._pairs_payload()]
        if channel == "cameras/active_pair":
            pair = next((p for p in self.camera_pairs if p.name == self._active_pair), None)
            return [{"name": pair.name, "left": pair.left, "right": pair.right}] if pair else []
        if channel in self._retained:
            return [self._retained[channel]]
        return []

    def _actions_list_payload(self) -> dict:
        return {"actions": [config_store._action_to_dict(s) for s in self.actions.all_sorted()]}

    def _tree_payload(self) -> dict:
        return {"tree": config_store._tree_to_dict(self.tree.root), "counts": action_multiset(self.tree)}

    def _toggles_payload(self) -> dict:
        indices = {
            spec.id: self.executor.toggle_index(spec.id)
            for spec in self.actions.all_sorted()
            if isinstance(spec, ToggleAction)
        }
        return {"indices": indices}

    def _cameras_payload(self) -> dict:
        return {
            "cameras": [
                {"id": c.id, "name": c.name, "channel": c.channel} for c in self.cameras
            ]
        }

    def _pairs_payload(self) -> dict:
        return {
            "pairs": [
                {
                    "name": p.name,
                    "left": p.left,
                    "right": p.right,
                    "stale": bool(p.extras.get("stale")),
                }
                for p in self.camera_pairs
            ]
        }

    def _script_bindings(self) -> dict[str, Any]:
        return {"tool": dict(self._tool_inputs), "settings": self.settings.values()}


class _ExecutorSink:
    """Routes leaf action traffic from the executor onto the wire."""

    def __init__(self, core: ConsoleCore):
        self._core = core

    def publish(self, channel: str, payload: Any) -> None:
        self._core._broadcast(channel, payload, retain=False)

    def call_service(self, channel: str, payload: Any, token: str, timeout_s: float) -> None:
        core = self._core
        provider = core.registry.services.get(channel)
        if provider is None:
            core.executor.on_service_result(token, False, f"no provider for {channel}")
            return
        core._deliver(
            provider,
            core._envelope(EnvelopeKind.SERVICE_REQUEST, channel, payload, id=token),
        )

    def cancel_service(self, token: str) -> None:
        self._core._broadcast("gateway/cancel", {"token": token}, retain=False)


def _result_text(payload: Any) -> str:
    if isinstance(payload, dict):
        for key in ("message", "status", "answer", "pose"):
            if key in payload:
                return str(payload[key])
    return "done"
