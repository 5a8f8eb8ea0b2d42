"""E-stop channel bookkeeping and aggregation.

Multiple named channels (one software switch plus any number of
hardware-reported ones) are ORed into a summary. Reporting a state here
never actuates anything: hardware e-stops trigger on their own and only
report in, and the software e-stop's actual stop command travels
best-effort over the robot link (handled by the gateway, which also
watches for the acknowledgment).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from .errors import DuplicateError, NotFoundError


class EStopSource(Enum):
    SOFTWARE = "software"
    HARDWARE_REPORTED = "hardware_reported"


@dataclass
class EStopChannel:
    name: str
    pressed: bool = False
    source: EStopSource = EStopSource.HARDWARE_REPORTED
    last_update: float = 0.0


@dataclass
class EStopSummary:
    any_pressed: bool
    channels: tuple[EStopChannel, ...] = ()


class EStopManager:
    def __init__(
        self,
        mono: Callable[[], float],
        on_summary: Callable[[EStopSummary], None] | None = None,
    ):
        self._mono = mono
        self._on_summary = on_summary or (lambda summary: None)
        self._channels: dict[str, EStopChannel] = {}

    def register_channel(self, name: str, source: EStopSource) -> None:
        if name in self._channels:
            raise DuplicateError(f"e-stop channel {name!r} already registered")
        self._channels[name] = EStopChannel(name=name, source=source, last_update=self._mono())

    def channel_names(self) -> list[str]:
        return list(self._channels)

    def report_state(self, name: str, pressed: bool) -> EStopSummary:
        """Update one channel; broadcasts only when the state changed."""
        channel = self._channels.get(name)
        if channel is None:
            raise NotFoundError(f"unknown e-stop channel {name!r}")
        changed = channel.pressed != pressed
        channel.pressed = pressed
        channel.last_update = self._mono()
        summary = self.summary()
        if changed:
            self._on_summary(summary)
        return summary

    def summary(self) -> EStopSummary:
        channels = tuple(replace(c) for c in self._channels.values())
        return EStopSummary(
            any_pressed=any(c.pressed for c in channels),
            channels=channels,
        )
