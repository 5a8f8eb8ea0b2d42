"""Deterministic in-process wiring of the console core, the simulated
robot, and any number of scripted clients under virtual time.

Every send crosses a LinkModel (robot link only; client links are local),
every delivery and tick is a scheduler event ordered by (due, seq), and
the robot's clocks carry a configurable skew so the clock-offset handshake
is observable. Scenario and acceptance tests run entirely through this
harness; the live server reuses the same core and robot process against
wall clocks.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Any, Callable

from .config import ConsoleConfig
from .core import ConsoleCore, Role
from .errors import ConsoleError
from .sim import CameraSpec, LinkModel, RobotProcess
from .wire import Envelope, EnvelopeKind, decode, encode


class VirtualClock:
    def __init__(self, wall_epoch: float = 1_700_000_000.0):
        self._mono = 0.0
        self._epoch = wall_epoch

    def mono(self) -> float:
        return self._mono

    def wall(self) -> float:
        return self._epoch + self._mono

    def advance_to(self, t: float) -> None:
        if t < self._mono:
            raise ValueError("virtual time cannot go backwards")
        self._mono = t


class Scheduler:
    def __init__(self):
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = 0

    def schedule(self, due: float, fn: Callable[[], None]) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (due, self._seq, fn))

    def pop_due(self, limit: float):
        if self._heap and self._heap[0][0] <= limit:
            return heapq.heappop(self._heap)
        return None


@dataclass
class ClientModel:
    """Snapshot+delta reducer; the Python twin of the dashboard's store."""

    mode: str | None = None
    control_mode: str | None = None
    battery: dict = field(default_factory=dict)
    posture: dict = field(default_factory=dict)
    connection: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    sensors: dict = field(default_factory=dict)
    estop: dict = field(default_factory=dict)
    mission: dict = field(default_factory=dict)
    toggles: dict = field(default_factory=dict)
    executions: dict = field(default_factory=dict)
    active_task: dict | None = None
    actions: list = field(default_factory=list)
    tree: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)
    cameras: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    active_pair: dict | None = None
    camera_stats: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def apply(self, envelope: Envelope) -> None:
        if envelope.kind is not EnvelopeKind.PUBLISH:
            return
        channel, payload = envelope.channel, envelope.payload
        if channel == "robot/mode":
            self.mode = payload.get("mode")
        elif channel == "robot/control_mode":
            self.control_mode = payload.get("mode")
        elif channel == "robot/battery":
            self.battery = payload
        elif channel == "robot/posture":
            self.posture = payload
        elif channel == "robot/connection":
            self.connection = payload
        elif channel == "robot/diagnostics":
            self.diagnostics = payload
        elif channel.startswith("robot/sensor/"):
            self.sensors[payload.get("name", channel)] = payload
        elif channel == "estop/summary":
            self.estop = payload
        elif channel == "mission/state":
            self.mission = payload
        elif channel == "actions/toggles":
            self.toggles = payload.get("indices", {})
        elif channel == "actions/executions":
            self.executions[payload["exec_id"]] = payload
            self.active_task = payload
        elif channel == "actions/list":
            self.actions = payload.get("actions", [])
        elif channel == "actions/tree":
            self.tree = payload
        elif channel == "settings/updates":
            self.settings[payload.get("path")] = payload
        elif channel == "cameras/list":
            self.cameras = payload.get("cameras", [])
        elif channel == "cameras/pairs":
            self.pairs = payload.get("pairs", [])
        elif channel == "cameras/active_pair":
            self.active_pair = payload
        elif channel.startswith("camera/") and channel.endswith("/frame"):
            self.camera_stats[payload.get("camera_id", channel)] = payload.get("stats", {})
        elif channel == "gateway/events":
            self.events.append(payload)

    def shared_state(self) -> dict:
        """The state every console instance must agree on."""
        return {
            "toggles": self.toggles,
            "mission": self.mission,
            "estop": self.estop,
            "mode": self.mode,
        }


class ScriptedClient:
    def __init__(self, harness: "SimHarness", name: str, role: Role):
        self.name = name
        self.harness = harness
        self.model = ClientModel()
        self.inbox: list[tuple[float, Envelope]] = []
        self.responses: dict[str, Envelope] = {}
        self._req_seq = 0
        self.conn_id = harness.core.attach_client(self._receive, role=role)

    def _receive(self, data: bytes) -> None:
        envelope = decode(data)
        self.inbox.append((self.harness.clock.mono(), envelope))
        self.model.apply(envelope)
        if envelope.kind in (EnvelopeKind.SERVICE_RESPONSE, EnvelopeKind.ERROR) and envelope.id:
            self.responses[envelope.id] = envelope

    def _send(self, envelope: Envelope) -> None:
        self.harness.core.on_client_message(self.conn_id, encode(envelope))

    def subscribe(self, *channels: str) -> None:
        for channel in channels:
            self._send(
                Envelope(
                    EnvelopeKind.SUBSCRIBE, channel,
                    stamp_wall=self.harness.clock.wall(), stamp_mono=self.harness.clock.mono(),
                )
            )

    def publish(self, channel: str, payload: Any) -> None:
        self._send(
            Envelope(
                EnvelopeKind.PUBLISH, channel, payload,
                stamp_wall=self.harness.clock.wall(), stamp_mono=self.harness.clock.mono(),
            )
        )

    def request(self, channel: str, payload: Any = None) -> str:
        self._req_seq += 1
        request_id = f"{self.conn_id}r{self._req_seq}"
        self._send(
            Envelope(
                EnvelopeKind.SERVICE_REQUEST, channel, payload if payload is not None else {},
                id=request_id,
                stamp_wall=self.harness.clock.wall(), stamp_mono=self.harness.clock.mono(),
            )
        )
        return request_id

    def call(self, channel: str, payload: Any = None, timeout: float = 6.0) -> Envelope:
        """Request and run the harness until the response arrives."""
        request_id = self.request(channel, payload)
        deadline = self.harness.clock.mono() + timeout
        while request_id not in self.responses:
            if self.harness.clock.mono() >= deadline:
                raise TimeoutError(f"no response to {channel} within {timeout}s")
            self.harness.run_for(0.01)
        return self.responses[request_id]


ALL_DASHBOARD_CHANNELS = (
    "robot/mode",
    "robot/control_mode",
    "robot/battery",
    "robot/posture",
    "robot/connection",
    "robot/diagnostics",
    "estop/summary",
    "mission/state",
    "actions/list",
    "actions/tree",
    "actions/toggles",
    "actions/executions",
    "settings/updates",
    "cameras/list",
    "cameras/pairs",
    "cameras/active_pair",
    "gateway/events",
)


class SimHarness:
    def __init__(
        self,
        config: ConsoleConfig | None = None,
        seed: int = 0,
        base_latency: float = 0.0,
        jitter: float = 0.0,
        drop: float = 0.0,
        tick_rate: float = 100.0,
        robot_clock_skew: float = 123.456,
        core_tick: float = 0.05,
        cameras: list[CameraSpec] | None = None,
        sensor_fns: dict[str, Callable[[float], float]] | None = None,
        config_path: str | None = None,
        recorder: Callable[[float, str, Envelope], None] | None = None,
    ):
        self.clock = VirtualClock()
        self.scheduler = Scheduler()
        self.core = ConsoleCore(
            config,
            mono=self.clock.mono,
            wall=self.clock.wall,
            config_path=config_path,
            recorder=recorder,
        )
        self.uplink = LinkModel(base_latency, jitter, drop, seed=seed)        # robot -> console
        self.downlink = LinkModel(base_latency, jitter, drop, seed=seed + 1)  # console -> robot
        self._skew = robot_clock_skew
        self.robot = RobotProcess(
            mono=lambda: self.clock.mono() + self._skew,
            wall=lambda: self.clock.wall() + self._skew,
            send=self._robot_to_console,
            cameras=cameras,
            sensor_fns=sensor_fns,
        )
        self.core.attach_robot(self._console_to_robot)
        self.robot.start()
        self._tick_period = 1.0 / tick_rate
        self._core_tick = core_tick
        self._schedule_robot_tick(self.clock.mono())
        self._schedule_core_tick(self.clock.mono())
        self.clients: list[ScriptedClient] = []

    # -- link plumbing -----------------------------------------------------------

    def _robot_to_console(self, envelope: Envelope) -> None:
        due = self.uplink.transmit(envelope, self.clock.mono())
        if due is None:
            return
        data = encode(envelope)
        self.scheduler.schedule(due, lambda: self.core.on_robot_message(data))

    def _console_to_robot(self, data: bytes) -> None:
        try:
            envelope = decode(data)
        except ConsoleError:
            return
        due = self.downlink.transmit(envelope, self.clock.mono())
        if due is None:
            return
        self.scheduler.schedule(due, lambda: self.robot.on_envelope(envelope))

    def _schedule_robot_tick(self, due: float) -> None:
        def fire():
            self.robot.tick()
            self._schedule_robot_tick(due + self._tick_period)

        self.scheduler.schedule(due, fire)

    def _schedule_core_tick(self, due: float) -> None:
        def fire():
            self.core.tick()
            self._schedule_core_tick(due + self._core_tick)

        self.scheduler.schedule(due, fire)

    # -- running -------------------------------------------------------------------

    def run_until(self, t: float) -> None:
        while True:
            item = self.scheduler.pop_due(t)
            if item is None:
                break
            due, _, fn = item
            self.clock.advance_to(max(due, self.clock.mono()))
            fn()
        self.clock.advance_to(t)

    def run_for(self, dt: float) -> None:
        self.run_until(self.clock.mono() + dt)

    # -- clients ---------------------------------------------------------------------

    def add_client(self, name: str | None = None, role: Role = Role.DEVELOPER,
                   subscribe_all: bool = True) -> ScriptedClient:
        client = ScriptedClient(self, name or f"client{len(self.clients) + 1}", role)
        self.clients.append(client)
        if subscribe_all:
            client.subscribe(*ALL_DASHBOARD_CHANNELS)
        return client


class TraceRecorder:
    """Collects inbound client envelopes for later replay."""

    def __init__(self):
        self.entries: list[dict] = []

    def __call__(self, t: float, conn_id: str, envelope: Envelope) -> None:
        self.entries.append({"t": t, "conn": conn_id, "data": encode(envelope).decode("utf-8")})

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries:
                handle.write(json.dumps(entry) + "\n")

    @staticmethod
    def load(path) -> list[dict]:
        entries = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return entries


def replay_trace(harness: SimHarness, entries: list[dict], settle: float = 1.0) -> None:
    """Feed recorded client traffic into a fresh harness at original times.

    Clients are created on demand per recorded connection id, with the
    standard dashboard subscriptions.
    """
    conn_map: dict[str, ScriptedClient] = {}

    def client_for(recorded: str) -> ScriptedClient:
        if recorded not in conn_map:
            # recorded traffic contains the original subscribes
            conn_map[recorded] = harness.add_client(name=f"replay-{recorded}", subscribe_all=False)
        return conn_map[recorded]

    for entry in entries:
        client = client_for(entry["conn"])
        data = entry["data"]

        def fire(client=client, data=data):
            harness.core.on_client_message(client.conn_id, data)

        harness.scheduler.schedule(entry["t"], fire)
    end = max((e["t"] for e in entries), default=0.0) + settle
    harness.run_until(end)
