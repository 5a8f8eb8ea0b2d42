"""Robot status data types, diagnostics aggregation, sensor classification,
camera stream statistics, and the mode-dependent color theme.

All types here are plain values and all operations are pure; shared state
lives in the gateway core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum

from .errors import ConfigError, ValidationError


class OperationMode(Enum):
    AUTONOMOUS = "autonomous"
    TELEOPERATION = "teleoperation"
    MANIPULATION = "manipulation"
    SAFE = "safe"


class DiagnosticLevel(IntEnum):
    OK = 0
    WARNING = 1
    ERROR = 2


@dataclass
class DiagnosticsItem:
    name: str
    level: DiagnosticLevel
    message: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValidationError("diagnostics item needs a component name")


def aggregate_diagnostics(items: list[DiagnosticsItem]) -> DiagnosticLevel:
    """Maximum severity over all items; an empty list is OK."""
    level = DiagnosticLevel.OK
    for item in items:
        if item.level > level:
            level = item.level
    return level


@dataclass
class BatteryState:
    percentage: float
    voltage: float = 0.0

    def __post_init__(self):
        self.percentage = min(1.0, max(0.0, self.percentage))
        self.voltage = max(0.0, self.voltage)


@dataclass
class ConnectionState:
    rtt: float = 0.0
    loss_fraction: float = 0.0
    last_heard: float = 0.0
    alive: bool = False

    def __post_init__(self):
        if not 0.0 <= self.loss_fraction <= 1.0:
            raise ValidationError("loss_fraction must be within [0, 1]")
        self.rtt = max(0.0, self.rtt)


class ThresholdDirection(Enum):
    HIGH_IS_BAD = "high_is_bad"
    LOW_IS_BAD = "low_is_bad"


class SensorStatus(Enum):
    SAFE = "safe"
    WARNING = "warning"
    DANGER = "danger"


@dataclass
class SensorReading:
    name: str
    value: float
    unit: str = ""
    warn_threshold: float | None = None
    danger_threshold: float | None = None
    direction: ThresholdDirection = ThresholdDirection.HIGH_IS_BAD


def classify(reading: SensorReading) -> SensorStatus:
    """Safe / Warning / Danger, boundary inclusive on the bad side.

    Absent thresholds never trigger. Raises ConfigError when both
    thresholds are present but danger is not strictly beyond warn in the
    bad direction.
    """
    warn, danger = reading.warn_threshold, reading.danger_threshold
    high_bad = reading.direction is ThresholdDirection.HIGH_IS_BAD
    if warn is not None and danger is not None:
        ordered = danger > warn if high_bad else danger < warn
        if not ordered:
            raise ConfigError(
                f"sensor {reading.name!r}: danger threshold must be beyond warn"
            )
    value = reading.value
    if high_bad:
        if danger is not None and value >= danger:
            return SensorStatus.DANGER
        if warn is not None and value >= warn:
            return SensorStatus.WARNING
    else:
        if danger is not None and value <= danger:
            return SensorStatus.DANGER
        if warn is not None and value <= warn:
            return SensorStatus.WARNING
    return SensorStatus.SAFE


@dataclass
class RobotPosture:
    roll: float = 0.0
    pitch: float = 0.0
    # front-left, front-right, rear-left, rear-right
    flipper_angles: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ModeTheme:
    accent_color: str
    label: str


# Colorblind-safe palette; one visually distinct accent per operation mode.
MODE_THEMES = {
    OperationMode.AUTONOMOUS: ModeTheme("#0072B2", "Autonomous"),
    OperationMode.TELEOPERATION: ModeTheme("#E69F00", "Teleoperation"),
    OperationMode.MANIPULATION: ModeTheme("#D55E00", "Manipulation"),
    OperationMode.SAFE: ModeTheme("#009E73", "Safe"),
}

# Severity and outcome colors reuse the same palette: green / orange / red.
SEVERITY_COLORS = {
    DiagnosticLevel.OK: "#009E73",
    DiagnosticLevel.WARNING: "#E69F00",
    DiagnosticLevel.ERROR: "#D55E00",
}

SENSOR_STATUS_COLORS = {
    SensorStatus.SAFE: "#009E73",
    SensorStatus.WARNING: "#E69F00",
    SensorStatus.DANGER: "#D55E00",
}

OUTCOME_COLORS = {
    "succeeded": "#009E73",
    "canceled": "#E69F00",
    "failed": "#D55E00",
}


def mode_theme(mode: OperationMode) -> ModeTheme:
    return MODE_THEMES[mode]


DEFAULT_STATS_WINDOW = 30


@dataclass
class StreamStats:
    """Per-camera frame rate and latency over a sliding receive window."""

    window: tuple[tuple[float, float], ...] = ()
    capacity: int = DEFAULT_STATS_WINDOW
    fps: float = 0.0
    latency: float = 0.0

    def __post_init__(self):
        if self.capacity < 2:
            raise ValidationError("stats window capacity must be at least 2")


def update_stream_stats(
    stats: StreamStats,
    frame_stamp: float,
    receive_mono: float,
    sender_clock_offset: float = 0.0,
) -> StreamStats:
    """Fold one received frame into the stats.

    frame_stamp is on the sender's clock; sender_clock_offset is the
    measured (sender clock - receiver mono) offset, so the frame's send
    time on the receiver timeline is frame_stamp - offset. Latency is
    clamped at zero. fps is (count - 1) / receive span once two or more
    frames are in the window.
    """
    window = stats.window + ((frame_stamp, receive_mono),)
    if len(window) > stats.capacity:
        window = window[-stats.capacity :]
    if len(window) >= 2:
        span = window[-1][1] - window[0][1]
        fps = (len(window) - 1) / span if span > 0 else 0.0
    else:
        fps = 0.0
    latency = max(0.0, receive_mono - (frame_stamp - sender_clock_offset))
    return replace(stats, window=window, fps=fps, latency=latency)
