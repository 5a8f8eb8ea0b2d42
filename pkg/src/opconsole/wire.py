"""Message envelopes and pub/sub/service routing used on every link.

One envelope format carries publishes, subscriptions, service calls, and
errors between operator clients, the console gateway, and the robot. The
encoding is canonical JSON (sorted keys, fixed separators, UTF-8), so byte
equality of two encoded envelopes is exactly envelope equality. See
docs/protocol.md for the format.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import (
    DuplicateError,
    ParseError,
    ProtocolError,
    ServiceUnavailableError,
    ValidationError,
)

WIRE_VERSION = 1

_CHANNEL_RE = re.compile(r"[a-z0-9_/]+\Z")


class EnvelopeKind(Enum):
    PUBLISH = "publish"
    SUBSCRIBE = "subscribe"
    UNSUBSCRIBE = "unsubscribe"
    SERVICE_REQUEST = "service_request"
    SERVICE_RESPONSE = "service_response"
    ERROR = "error"


_KINDS_BY_VALUE = {k.value: k for k in EnvelopeKind}

# Kinds whose correlation id is mandatory.
_CORRELATED = (
    EnvelopeKind.SERVICE_REQUEST,
    EnvelopeKind.SERVICE_RESPONSE,
)


def valid_channel(channel: str) -> bool:
    return (
        isinstance(channel, str)
        and bool(_CHANNEL_RE.fullmatch(channel))
        and not channel.startswith("/")
        and not channel.endswith("/")
    )


def _check_payload_tree(value: Any, path: str = "payload") -> None:
    if value is None or isinstance(value, (bool, str)):
        return
    if isinstance(value, int):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{path}: non-finite float not allowed")
        return
    if isinstance(value, list):
        for i, item in enumerate(value):
            _check_payload_tree(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise ValidationError(f"{path}: object keys must be strings")
            _check_payload_tree(item, f"{path}.{key}")
        return
    raise ValidationError(f"{path}: unsupported value type {type(value).__name__}")


def _trees_equal(a: Any, b: Any) -> bool:
    """Type-strict tree equality: 1 != 1.0 != True, -0.0 != 0.0."""
    if type(a) is not type(b):
        return False
    if isinstance(a, float):
        return a == b and math.copysign(1.0, a) == math.copysign(1.0, b)
    if isinstance(a, dict):
        if a.keys() != b.keys():
            return False
        return all(_trees_equal(v, b[k]) for k, v in a.items())
    if isinstance(a, list):
        return len(a) == len(b) and all(_trees_equal(x, y) for x, y in zip(a, b))
    return a == b


@dataclass(eq=False)
class Envelope:
    """The single wire-message unit for publish/subscribe/service traffic.

    stamp_wall is seconds since epoch on the sender's clock; stamp_mono is
    the sender's monotonic clock, which lets the receiver measure latency
    once a clock offset has been estimated for the link.
    """

    kind: EnvelopeKind
    channel: str
    payload: Any = None
    id: str | None = None
    stamp_wall: float = 0.0
    stamp_mono: float = 0.0

    def validate(self) -> None:
        if not isinstance(self.kind, EnvelopeKind):
            raise ValidationError("kind must be an EnvelopeKind")
        if not valid_channel(self.channel):
            raise ValidationError(f"invalid channel name {self.channel!r}")
        if self.kind in _CORRELATED:
            if not isinstance(self.id, str) or not self.id:
                raise ValidationError(f"{self.kind.value} requires a correlation id")
        elif self.id is not None and not isinstance(self.id, str):
            raise ValidationError("id must be a string or absent")
        for name, stamp in (("stamp_wall", self.stamp_wall), ("stamp_mono", self.stamp_mono)):
            if not isinstance(stamp, float) or not math.isfinite(stamp):
                raise ValidationError(f"{name} must be a finite float")
        if self.kind in (EnvelopeKind.SUBSCRIBE, EnvelopeKind.UNSUBSCRIBE):
            if self.payload is not None:
                raise ValidationError(f"{self.kind.value} payload must be null")
        _check_payload_tree(self.payload)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Envelope):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.channel == other.channel
            and self.id == other.id
            and _trees_equal(self.stamp_wall, other.stamp_wall)
            and _trees_equal(self.stamp_mono, other.stamp_mono)
            and _trees_equal(self.payload, other.payload)
        )


def encode(envelope: Envelope) -> bytes:
    """Canonical serialization; byte equality implies envelope equality."""
    envelope.validate()
    doc = {
        "v": WIRE_VERSION,
        "kind": envelope.kind.value,
        "channel": envelope.channel,
        "id": envelope.id,
        "stamp_wall": envelope.stamp_wall,
        "stamp_mono": envelope.stamp_mono,
        "payload": envelope.payload,
    }
    return json.dumps(
        doc, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=False
    ).encode("utf-8")


def decode(data: bytes | str) -> Envelope:
    """Parse an envelope; never raises anything but the documented errors."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed envelope: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("envelope must be a JSON object")
    missing = {"v", "kind", "channel", "id", "stamp_wall", "stamp_mono", "payload"} - doc.keys()
    if missing:
        raise ParseError(f"missing fields: {', '.join(sorted(missing))}")
    if doc["v"] != WIRE_VERSION:
        raise ProtocolError(str(doc["v"]), f"unsupported protocol version {doc['v']!r}")
    kind = _KINDS_BY_VALUE.get(doc["kind"])
    if kind is None:
        raise ProtocolError(str(doc["kind"]))
    for name in ("stamp_wall", "stamp_mono"):
        if isinstance(doc[name], int):
            doc[name] = float(doc[name])
    envelope = Envelope(
        kind=kind,
        channel=doc["channel"] if isinstance(doc["channel"], str) else "",
        payload=doc["payload"],
        id=doc["id"],
        stamp_wall=doc["stamp_wall"],
        stamp_mono=doc["stamp_mono"],
    )
    envelope.validate()
    return envelope


@dataclass
class ChannelRegistry:
    """Who hears what: subscriptions, service providers, pending requests.

    Mutations are serialized by the owning gateway; route() never mutates.
    At most one provider per service channel.
    """

    subscriptions: dict[str, set[str]] = field(default_factory=dict)
    services: dict[str, str] = field(default_factory=dict)
    pending: dict[str, str] = field(default_factory=dict)

    def subscribe(self, channel: str, conn_id: str) -> None:
        if not valid_channel(channel):
            raise ValidationError(f"invalid channel name {channel!r}")
        self.subscriptions.setdefault(channel, set()).add(conn_id)

    def unsubscribe(self, channel: str, conn_id: str) -> None:
        subs = self.subscriptions.get(channel)
        if subs:
            subs.discard(conn_id)
            if not subs:
                del self.subscriptions[channel]

    def advertise(self, channel: str, conn_id: str) -> None:
        if not valid_channel(channel):
            raise ValidationError(f"invalid channel name {channel!r}")
        current = self.services.get(channel)
        if current is not None and current != conn_id:
            raise DuplicateError(f"service {channel!r} already provided by {current!r}")
        self.services[channel] = conn_id

    def note_request(self, request_id: str, requester: str) -> None:
        self.pending[request_id] = requester

    def pop_request(self, request_id: str) -> str | None:
        return self.pending.pop(request_id, None)

    def drop_connection(self, conn_id: str) -> None:
        for channel in list(self.subscriptions):
            self.unsubscribe(channel, conn_id)
        for channel, provider in list(self.services.items()):
            if provider == conn_id:
                del self.services[channel]
        for request_id, requester in list(self.pending.items()):
            if requester == conn_id:
                del self.pending[request_id]


def route(envelope: Envelope, registry: ChannelRegistry) -> frozenset[str]:
    """Destination connection ids for an envelope.

    Publish fans out to subscribers (possibly none); a service request goes
    to the provider or raises ServiceUnavailableError; responses and errors
    return to whoever is waiting on the correlation id (dropped if nobody
    is). Subscribe/unsubscribe are registry mutations, not routed traffic.
    """
    if envelope.kind is EnvelopeKind.PUBLISH:
        return frozenset(registry.subscriptions.get(envelope.channel, ()))
    if envelope.kind is EnvelopeKind.SERVICE_REQUEST:
        provider = registry.services.get(envelope.channel)
        if provider is None:
            raise ServiceUnavailableError(envelope.channel)
        return frozenset((provider,))
    if envelope.kind in (EnvelopeKind.SERVICE_RESPONSE, EnvelopeKind.ERROR):
        if envelope.id is not None:
            requester = registry.pending.get(envelope.id)
            if requester is not None:
                return frozenset((requester,))
        return frozenset()
    return frozenset()
