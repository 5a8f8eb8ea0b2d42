"""Desk-scale simulated robot: tracked base with four flippers, a
manipulator stub with look-at, gamepad command mapping with drive /
reverse / manipulation modes, and telemetry emission over an impaired
link.

The pure model lives in SimRobot / map_gamepad / step / look_at /
LinkModel. RobotProcess is the robot-side endpoint: it owns a SimRobot,
answers services, consumes gamepad frames, and emits telemetry and
synthetic camera frames. It performs no I/O of its own; envelopes go out
through an injected send callable, so the same process runs under the
virtual-time harness and the live server. Deterministic given seed and
command trace.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

from .errors import UnreachableError, ValidationError
from .telemetry import BatteryState, DiagnosticLevel, OperationMode
from .wire import Envelope, EnvelopeKind

Vec3 = tuple[float, float, float]

FLIPPER_MIN = -math.pi
FLIPPER_MAX = math.pi / 2

# Battery drain per meter driven / radian of flipper travel.
DRIVE_DRAIN = 0.003
FLIPPER_DRAIN = 0.001


class ControlMode(Enum):
    DRIVE = "drive"
    DRIVE_REVERSED = "drive_reversed"
    MANIPULATION = "manipulation"


@dataclass
class GamepadFrame:
    left_stick: tuple[float, float] = (0.0, 0.0)
    right_stick: tuple[float, float] = (0.0, 0.0)
    triggers: tuple[float, float] = (0.0, 0.0)
    buttons: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        for name, (x, y) in (("left_stick", self.left_stick), ("right_stick", self.right_stick)):
            if not (-1.0 <= x <= 1.0 and -1.0 <= y <= 1.0):
                raise ValidationError(f"{name} out of [-1, 1] range")
        l, r = self.triggers
        if not (0.0 <= l <= 1.0 and 0.0 <= r <= 1.0):
            raise ValidationError("triggers out of [0, 1] range")


@dataclass(frozen=True)
class DriveLimits:
    v_max: float = 1.0
    omega_max: float = 1.5
    flipper_rate_max: float = 0.8
    ee_linear_max: float = 0.3
    ee_angular_max: float = 0.8
    gripper_rate_max: float = 1.0
    dead_zone: float = 0.1


@dataclass
class Command:
    v: float = 0.0
    omega: float = 0.0
    flipper_front_rate: float = 0.0
    flipper_rear_rate: float = 0.0
    ee_linear: Vec3 = (0.0, 0.0, 0.0)
    ee_angular: Vec3 = (0.0, 0.0, 0.0)
    gripper_rate: float = 0.0


def _dead_zone(stick: tuple[float, float], dz: float) -> tuple[float, float]:
    x, y = stick
    return (0.0, 0.0) if math.hypot(x, y) < dz else (x, y)


def map_gamepad(frame: GamepadFrame, mode: ControlMode, limits: DriveLimits = DriveLimits()) -> Command:
    """Map a gamepad frame to a robot command for the active control mode.

    Drive: left stick y is forward speed, x is turn rate (stick right turns
    clockwise); the left trigger drives the front flipper pair and the
    right trigger the rear pair, lowered while the flipper_down button is
    held. Reverse mode negates forward only. Manipulation: left stick
    moves the end effector in x/y, right stick y in z, right stick x yaws
    it; triggers close/open the gripper. A radial dead zone applies per
    stick.
    """
    left = _dead_zone(frame.left_stick, limits.dead_zone)
    right = _dead_zone(frame.right_stick, limits.dead_zone)
    lt, rt = frame.triggers
    if mode in (ControlMode.DRIVE, ControlMode.DRIVE_REVERSED):
        v = left[1] * limits.v_max
        if mode is ControlMode.DRIVE_REVERSED:
            v = -v
        flipper_sign = -1.0 if frame.buttons.get("flipper_down") else 1.0
        return Command(
            v=v,
            omega=-left[0] * limits.omega_max,
            flipper_front_rate=flipper_sign * lt * limits.flipper_rate_max,
            flipper_rear_rate=flipper_sign * rt * limits.flipper_rate_max,
        )
    return Command(
        ee_linear=(
            left[1] * limits.ee_linear_max,
            -left[0] * limits.ee_linear_max,
            right[1] * limits.ee_linear_max,
        ),
        ee_angular=(0.0, 0.0, -right[0] * limits.ee_angular_max),
        gripper_rate=(rt - lt) * limits.gripper_rate_max,
    )


@dataclass(frozen=True)
class EEPose:
    """End-effector pose: position plus a rotation matrix (rows)."""

    position: Vec3
    rotation: tuple[Vec3, Vec3, Vec3] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def optical_axis(self) -> Vec3:
        r = self.rotation
        return (r[0][2], r[1][2], r[2][2])


Terrain = Callable[[float, float], tuple[float, float]]


def flat_terrain(x: float, y: float) -> tuple[float, float]:
    return (0.0, 0.0)


def ramp_terrain(x: float, y: float) -> tuple[float, float]:
    """A pitch-up ramp between x = 1 m and x = 3 m, for the posture display."""
    return (0.0, 0.25 if 1.0 <= x <= 3.0 else 0.0)


@dataclass
class SimRobot:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    flipper_angles: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    ee: EEPose = EEPose(position=(0.4, 0.0, 0.3))
    gripper: float = 1.0  # 1 open, 0 closed
    battery: BatteryState = field(default_factory=lambda: BatteryState(percentage=1.0, voltage=25.0))
    estop_latched: bool = False
    mode: OperationMode = OperationMode.TELEOPERATION


def step(robot: SimRobot, command: Command, dt: float, terrain: Terrain = flat_terrain) -> SimRobot:
    """Advance the robot by dt seconds under a command (pure).

    While the e-stop latch is set, all commanded motion is clamped to zero
    no matter what the command says. Unicycle kinematics for the base;
    flippers integrate clamped to their joint limits; battery drains with
    drive speed and flipper motion and never increases.
    """
    if not 0.0 < dt <= 0.1:
        raise ValidationError("dt must be in (0, 0.1]")
    if robot.estop_latched:
        command = Command()
    x = robot.x + command.v * math.cos(robot.yaw) * dt
    y = robot.y + command.v * math.sin(robot.yaw) * dt
    yaw = robot.yaw + command.omega * dt
    rates = (
        command.flipper_front_rate,
        command.flipper_front_rate,
        command.flipper_rear_rate,
        command.flipper_rear_rate,
    )
    flippers = tuple(
        min(FLIPPER_MAX, max(FLIPPER_MIN, angle + rate * dt))
        for angle, rate in zip(robot.flipper_angles, rates)
    )
    gripper = min(1.0, max(0.0, robot.gripper + command.gripper_rate * dt))
    ee_pos = tuple(p + v * dt for p, v in zip(robot.ee.position, command.ee_linear))
    drain = (
        DRIVE_DRAIN * abs(command.v)
        + FLIPPER_DRAIN * (abs(command.flipper_front_rate) + abs(command.flipper_rear_rate))
    ) * dt
    pct = max(0.0, robot.battery.percentage - drain)
    roll, pitch = terrain(x, y)
    return replace(
        robot,
        x=x,
        y=y,
        yaw=yaw,
        roll=roll,
        pitch=pitch,
        flipper_angles=flippers,
        ee=replace(robot.ee, position=ee_pos),
        gripper=gripper,
        battery=BatteryState(percentage=pct, voltage=20.0 + 5.0 * pct),
    )


def look_at(
    point: Vec3,
    direction: Vec3,
    standoff: float = 0.3,
    arm_base: Vec3 = (0.0, 0.0, 0.0),
    reach: float = 1.0,
) -> EEPose:
    """End-effector pose that looks at `point` from `direction`.

    The camera sits standoff meters back along the viewing direction with
    its optical axis (+z) pointing at the target; roll is chosen to keep
    the camera's up vector closest to world-up, falling back to world +x
    when looking straight up or down. Raises UnreachableError when the
    pose leaves the workspace sphere around the arm base.
    """
    norm = math.sqrt(sum(c * c for c in direction))
    if abs(norm - 1.0) > 1e-6:
        raise ValidationError("direction must be a unit vector")
    position = tuple(p - standoff * d for p, d in zip(point, direction))
    span = math.dist(position, arm_base)
    if span > reach:
        raise UnreachableError(f"target pose {span:.2f} m from arm base exceeds reach {reach:.2f} m")
    z = direction
    up_hint = (0.0, 0.0, 1.0)
    if abs(z[0] * up_hint[0] + z[1] * up_hint[1] + z[2] * up_hint[2]) > 1.0 - 1e-9:
        up_hint = (1.0, 0.0, 0.0)
    dot = sum(u * c for u, c in zip(up_hint, z))
    proj = tuple(u - dot * c for u, c in zip(up_hint, z))
    mag = math.sqrt(sum(c * c for c in proj))
    camera_up = tuple(c / mag for c in proj)
    y_cam = tuple(-c for c in camera_up)
    x_cam = (
        y_cam[1] * z[2] - y_cam[2] * z[1],
        y_cam[2] * z[0] - y_cam[0] * z[2],
        y_cam[0] * z[1] - y_cam[1] * z[0],
    )
    rotation = tuple(
        (x_cam[i], y_cam[i], z[i]) for i in range(3)
    )
    return EEPose(position=position, rotation=rotation)


@dataclass
class LinkModel:
    """Impaired link: fixed base latency, uniform jitter, Bernoulli drops.

    Reproducible per seed; each transmit draws drop then delay from one
    stream. Ordering across envelopes is not guaranteed once jitter is
    nonzero.
    """

    base_latency: float = 0.0
    jitter: float = 0.0
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValidationError("drop probability must be in [0, 1]")
        if self.jitter < 0.0 or self.base_latency < 0.0:
            raise ValidationError("latency and jitter must be >= 0")
        self._rng = random.Random(self.seed)

    def transmit(self, envelope: Envelope, now: float) -> float | None:
        """Delivery time for an envelope sent now, or None when dropped."""
        if self._rng.random() < self.drop_probability:
            return None
        delay = self.base_latency + self._rng.uniform(-self.jitter, self.jitter)
        return now + max(0.0, delay)


# --- robot-side endpoint ------------------------------------------------------


@dataclass
class CameraSpec:
    id: str
    fps: float = 10.0


ROBOT_SERVICES = (
    "link/ping",
    "robot/arm_pose",
    "robot/led",
    "robot/look_at",
    "robot/drive_to",
    "robot/set_mode",
    "robot/set_control_mode",
    "robot/stop",
    "robot/inspect_victim",
)

ROBOT_SUBSCRIPTIONS = (
    "input/gamepad",
    "robot/estop_cmd",
    "mission/confirm_answer",
    "settings/updates",
    "gateway/cancel",
)

ARM_PRESETS = {
    "parked": EEPose(position=(0.1, 0.0, 0.1)),
    "unfolded": EEPose(position=(0.5, 0.0, 0.4)),
    "door_open": EEPose(position=(0.6, 0.0, 0.9)),
}

GAMEPAD_HOLD_S = 0.3  # frames older than this stop the robot


class RobotProcess:
    """Simulated robot endpoint driven by tick() and on_envelope()."""

    def __init__(
        self,
        mono: Callable[[], float],
        wall: Callable[[], float],
        send: Callable[[Envelope], None],
        robot: SimRobot | None = None,
        cameras: list[CameraSpec] | None = None,
        limits: DriveLimits = DriveLimits(),
        terrain: Terrain = flat_terrain,
        sensor_fns: dict[str, Callable[[float], float]] | None = None,
        estop_channels: tuple[str, ...] = ("hw_front", "hw_rear"),
        arm_reach: float = 1.0,
        telemetry_rates: dict[str, float] | None = None,
    ):
        self._mono = mono
        self._wall = wall
        self._send = send
        self.robot = robot or SimRobot()
        self.cameras = cameras if cameras is not None else [CameraSpec(id="front", fps=10.0)]
        self.limits = limits
        self.terrain = terrain
        self.sensor_fns = sensor_fns or {}
        self.control_mode = ControlMode.DRIVE
        self.hardware_estops = {name: False for name in estop_channels}
        self.arm_reach = arm_reach
        self._software_stop = False
        self._last_tick: float | None = None
        self._last_gamepad: tuple[float, GamepadFrame] | None = None
        self._prev_buttons: dict[str, bool] = {}
        self._drive_to: dict[str, Any] | None = None
        self._inspect: dict[str, Any] | None = None
        self._frame_seq: dict[str, int] = {}
        self._camera_due: dict[str, float] = {}
        self._emit_due: dict[str, float] = {}
        self._diagnostics: dict[str, tuple[DiagnosticLevel, str]] = {
            "base/drive": (DiagnosticLevel.OK, ""),
            "arm/controller": (DiagnosticLevel.OK, ""),
        }
        rates = telemetry_rates or {}
        self._periods = {
            "mode": 1.0 / rates.get("mode", 1.0),
            "battery": 1.0 / rates.get("battery", 1.0),
            "posture": 1.0 / rates.get("posture", 10.0),
            "diagnostics": 1.0 / rates.get("diagnostics", 1.0),
            "sensors": 1.0 / rates.get("sensors", 2.0),
        }

    # -- wiring ---------------------------------------------------------------

    def start(self) -> None:
        """Announce services/subscriptions and push initial telemetry."""
        self._publish(
            "gateway/advertise",
            {
                "services": list(ROBOT_SERVICES),
                "subscriptions": list(ROBOT_SUBSCRIPTIONS),
                "estop_channels": list(self.hardware_estops),
            },
        )
        self._publish_mode()
        self._publish_control_mode()
        self._publish_battery()
        self._publish_diagnostics()

    def _envelope(self, kind: EnvelopeKind, channel: str, payload: Any, id: str | None = None) -> Envelope:
        return Envelope(
            kind=kind,
            channel=channel,
            payload=payload,
            id=id,
            stamp_wall=self._wall(),
            stamp_mono=self._mono(),
        )

    def _publish(self, channel: str, payload: Any) -> None:
        self._send(self._envelope(EnvelopeKind.PUBLISH, channel, payload))

    def _respond(self, request: Envelope, payload: Any) -> None:
        self._send(
            self._envelope(EnvelopeKind.SERVICE_RESPONSE, request.channel, payload, id=request.id)
        )

    def _respond_error(self, request: Envelope, code: str, message: str) -> None:
        self._send(
            self._envelope(
                EnvelopeKind.ERROR, request.channel, {"error": code, "message": message}, id=request.id
            )
        )

    # -- inbound --------------------------------------------------------------

    def on_envelope(self, envelope: Envelope) -> None:
        if envelope.kind is EnvelopeKind.PUBLISH:
            if envelope.channel == "input/gamepad":
                self._on_gamepad(envelope.payload)
            elif envelope.channel == "robot/estop_cmd":
                self._on_estop_cmd(envelope.payload)
            elif envelope.channel == "mission/confirm_answer":
                self._on_confirm_answer(envelope.payload)
            elif envelope.channel == "gateway/cancel":
                self._on_cancel((envelope.payload or {}).get("token"))
            return
        if envelope.kind is EnvelopeKind.SERVICE_REQUEST:
            handler = {
                "link/ping": self._svc_ping,
                "robot/arm_pose": self._svc_arm_pose,
                "robot/led": self._svc_led,
                "robot/look_at": self._svc_look_at,
                "robot/drive_to": self._svc_drive_to,
                "robot/set_mode": self._svc_set_mode,
                "robot/set_control_mode": self._svc_set_control_mode,
                "robot/stop": self._svc_stop,
                "robot/inspect_victim": self._svc_inspect_victim,
            }.get(envelope.channel)
            if handler is None:
                self._respond_error(envelope, "service_unavailable", f"no such service {envelope.channel}")
                return
            handler(envelope)

    def _on_gamepad(self, payload: Any) -> None:
        try:
            frame = GamepadFrame(
                left_stick=tuple(payload.get("left", (0.0, 0.0))),
                right_stick=tuple(payload.get("right", (0.0, 0.0))),
                triggers=tuple(payload.get("triggers", (0.0, 0.0))),
                buttons={k: bool(v) for k, v in payload.get("buttons", {}).items()},
            )
        except (ValidationError, AttributeError, TypeError):
            return  # malformed frames are dropped, not fatal
        self._handle_mode_buttons(frame.buttons)
        self._last_gamepad = (self._mono(), frame)

    def _handle_mode_buttons(self, buttons: dict[str, bool]) -> None:
        def rising(name: str) -> bool:
            return buttons.get(name, False) and not self._prev_buttons.get(name, False)

        if rising("mode"):
            if self.control_mode is ControlMode.MANIPULATION:
                self.control_mode = ControlMode.DRIVE
            else:
                self.control_mode = ControlMode.MANIPULATION
            self._publish_control_mode()
        elif rising("reverse") and self.control_mode is not ControlMode.MANIPULATION:
            self.control_mode = (
                ControlMode.DRIVE
                if self.control_mode is ControlMode.DRIVE_REVERSED
                else ControlMode.DRIVE_REVERSED
            )
            self._publish_control_mode()
        self._prev_buttons = dict(buttons)

    def _on_estop_cmd(self, payload: Any) -> None:
        pressed = bool(payload.get("pressed", True))
        self._software_stop = pressed
        self._update_latch()
        self._publish("robot/estop_ack", {"token": payload.get("token"), "pressed": pressed})

    def set_hardware_estop(self, name: str, pressed: bool) -> None:
        """Scenario hook: hardware e-stops trigger locally and only report in."""
        if name not in self.hardware_estops:
            raise ValidationError(f"unknown hardware e-stop {name!r}")
        self.hardware_estops[name] = pressed
        self._update_latch()
        self._publish("estop/report", {"name": name, "pressed": pressed})

    def _update_latch(self) -> None:
        self.robot.estop_latched = self._software_stop or any(self.hardware_estops.values())

    def _on_confirm_answer(self, payload: Any) -> None:
        if self._inspect is not None:
            self._inspect["answer"] = payload.get("option")

    def _on_cancel(self, token: str | None) -> None:
        """Abort a long-running behavior whose service call was canceled."""
        if token is None:
            return
        if self._drive_to is not None and self._drive_to["request"].id == token:
            self._drive_to = None
        if self._inspect is not None and self._inspect["request"].id == token:
            self._inspect = None

    # -- services ---------------------------------------------------------------

    def _svc_ping(self, request: Envelope) -> None:
        self._respond(request, {"t0": request.payload.get("t0"), "mono": self._mono()})

    def _svc_arm_pose(self, request: Envelope) -> None:
        pose_name = request.payload.get("pose")
        pose = ARM_PRESETS.get(pose_name)
        if pose is None:
            self._respond_error(request, "not_found", f"unknown arm pose {pose_name!r}")
            return
        self.robot.ee = pose
        self._respond(request, {"pose": pose_name})

    def _svc_led(self, request: Envelope) -> None:
        brightness = float(request.payload.get("brightness", 0.0))
        self._publish("robot/led_state", {"brightness": brightness})
        self._respond(request, {"brightness": brightness})

    def _svc_look_at(self, request: Envelope) -> None:
        payload = request.payload
        try:
            pose = look_at(
                point=tuple(payload["point"]),
                direction=tuple(payload["direction"]),
                standoff=float(payload.get("standoff", 0.3)),
                arm_base=(self.robot.x, self.robot.y, 0.2),
                reach=self.arm_reach,
            )
        except UnreachableError as exc:
            self._respond_error(request, "unreachable", str(exc))
            return
        except (KeyError, TypeError, ValidationError) as exc:
            self._respond_error(request, "validation", f"bad look_at request: {exc}")
            return
        self.robot.ee = pose
        self._respond(request, {"position": list(pose.position)})

    def _svc_drive_to(self, request: Envelope) -> None:
        if self._drive_to is not None:
            self._respond_error(request, "busy", "already driving to a waypoint")
            return
        payload = request.payload
        try:
            target = (float(payload["x"]), float(payload["y"]))
        except (KeyError, TypeError, ValueError) as exc:
            self._respond_error(request, "validation", f"bad waypoint: {exc}")
            return
        self._drive_to = {
            "target": target,
            "tol": float(payload.get("tol", 0.15)),
            "request": request,
        }

    def _svc_set_mode(self, request: Envelope) -> None:
        try:
            self.robot.mode = OperationMode(request.payload.get("mode"))
        except ValueError:
            self._respond_error(request, "validation", f"unknown mode {request.payload.get('mode')!r}")
            return
        self._publish_mode()
        self._respond(request, {"mode": self.robot.mode.value})

    def _svc_set_control_mode(self, request: Envelope) -> None:
        try:
            self.control_mode = ControlMode(request.payload.get("mode"))
        except ValueError:
            self._respond_error(request, "validation", f"unknown control mode {request.payload.get('mode')!r}")
            return
        self._publish_control_mode()
        self._respond(request, {"mode": self.control_mode.value})

    def _svc_stop(self, request: Envelope) -> None:
        self._drive_to = None
        self._last_gamepad = None
        self._respond(request, {})

    def _svc_inspect_victim(self, request: Envelope) -> None:
        if self._inspect is not None:
            self._respond_error(request, "busy", "inspection already in progress")
            return
        self._inspect = {
            "request": request,
            "asked": False,
            "due": self._mono() + 0.3,
            "answer": None,
        }

    # -- tick --------------------------------------------------------------------

    def tick(self, now: float | None = None) -> None:
        now = self._mono() if now is None else now
        if self._last_tick is None:
            self._last_tick = now
            return
        dt = now - self._last_tick
        self._last_tick = now
        if dt <= 0:
            return
        command = self._active_command(now)
        remaining = dt
        while remaining > 1e-12:
            chunk = min(remaining, 0.05)
            self.robot = step(self.robot, command, chunk, self.terrain)
            remaining -= chunk
        self._advance_behaviors(now)
        self._emit_telemetry(now)

    def _active_command(self, now: float) -> Command:
        if self._drive_to is not None:
            tx, ty = self._drive_to["target"]
            heading = math.atan2(ty - self.robot.y, tx - self.robot.x)
            yaw_err = math.atan2(math.sin(heading - self.robot.yaw), math.cos(heading - self.robot.yaw))
            dist = math.hypot(tx - self.robot.x, ty - self.robot.y)
            v = min(self.limits.v_max, dist) if abs(yaw_err) < 0.5 else 0.0
            omega = max(-self.limits.omega_max, min(self.limits.omega_max, 2.0 * yaw_err))
            return Command(v=v, omega=omega)
        if self._last_gamepad is not None:
            stamp, frame = self._last_gamepad
            if now - stamp <= GAMEPAD_HOLD_S:
                return map_gamepad(frame, self.control_mode, self.limits)
        return Command()

    def _advance_behaviors(self, now: float) -> None:
        if self._drive_to is not None:
            tx, ty = self._drive_to["target"]
            if math.hypot(tx - self.robot.x, ty - self.robot.y) <= self._drive_to["tol"]:
                request = self._drive_to["request"]
                self._drive_to = None
                self._respond(request, {"x": self.robot.x, "y": self.robot.y})
        if self._inspect is not None:
            inspect = self._inspect
            if not inspect["asked"] and now >= inspect["due"]:
                inspect["asked"] = True
                self._publish(
                    "mission/request_confirmation",
                    {
                        "prompt": inspect["request"].payload.get("prompt", "Victim detected?"),
                        "options": ["Confirm", "Dismiss"],
                        "deadline_s": inspect["request"].payload.get("deadline_s"),
                    },
                )
            elif inspect["asked"] and inspect["answer"] is not None:
                request = inspect["request"]
                answer = inspect["answer"]
                self._inspect = None
                self._respond(request, {"answer": answer})

    def _emit_telemetry(self, now: float) -> None:
        if self._due("mode", now):
            self._publish_mode()
            self._publish_control_mode()
        if self._due("battery", now):
            self._publish_battery()
        if self._due("posture", now):
            self._publish(
                "robot/posture",
                {
                    "roll": self.robot.roll,
                    "pitch": self.robot.pitch,
                    "flippers": list(self.robot.flipper_angles),
                    "x": self.robot.x,
                    "y": self.robot.y,
                    "yaw": self.robot.yaw,
                },
            )
        if self._due("diagnostics", now):
            self._publish_diagnostics()
        if self._due("sensors", now):
            for name, fn in self.sensor_fns.items():
                self._publish(f"robot/sensor/{name}", {"name": name, "value": float(fn(now))})
        for camera in self.cameras:
            if camera.fps <= 0:
                continue
            due = self._camera_due.setdefault(camera.id, now)
            period = 1.0 / camera.fps
            while now >= due:
                seq = self._frame_seq.get(camera.id, 0)
                self._frame_seq[camera.id] = seq + 1
                self._publish(
                    f"camera/{camera.id}/frame",
                    {
                        "camera_id": camera.id,
                        "seq": seq,
                        "pattern": {"kind": "checker", "phase": seq % 8},
                    },
                )
                due += period
            self._camera_due[camera.id] = due

    def _due(self, name: str, now: float) -> bool:
        due = self._emit_due.setdefault(name, now)
        if now >= due:
            self._emit_due[name] = due + self._periods[name]
            return True
        return False

    def _publish_mode(self) -> None:
        self._publish("robot/mode", {"mode": self.robot.mode.value})

    def _publish_control_mode(self) -> None:
        self._publish("robot/control_mode", {"mode": self.control_mode.value})

    def _publish_battery(self) -> None:
        self._publish(
            "robot/battery",
            {"percentage": self.robot.battery.percentage, "voltage": self.robot.battery.voltage},
        )

    def _publish_diagnostics(self) -> None:
        items = [
            {"name": name, "level": level.name, "message": message}
            for name, (level, message) in sorted(self._diagnostics.items())
        ]
        self._publish("robot/diagnostics", {"items": items})

    def set_diagnostic(self, name: str, level: DiagnosticLevel, message: str = "") -> None:
        self._diagnostics[name] = (level, message)
        self._publish_diagnostics()
