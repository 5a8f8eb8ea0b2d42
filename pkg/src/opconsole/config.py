"""Console configuration persistence as one property tree per profile.

The on-disk dialect is canonical JSON (sorted keys, two-space indent,
trailing newline), documented in docs/config.md. Unknown keys anywhere in
the tree are kept in `extras` fields and re-emitted verbatim on save, so a
config written by a newer build survives a load/save cycle byte-identically.
"""

from __future__ import annotations

import copy
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .actions import (
    ActionRef,
    ActionRegistry,
    ActionSpec,
    ActionTree,
    CallStyle,
    CompositeAction,
    CompositeMode,
    FolderNode,
    MessageAction,
    ScriptAction,
    ToggleAction,
)
from .errors import DuplicateError, IoError, ParseError, ScriptError, ValidationError
from .params import ParamKind, SettingsParameter
from .scenecam import DEFAULT_DISTANCE, DEFAULT_HEIGHT, DEFAULT_KP, DEFAULT_TICK_HZ
from .telemetry import ThresholdDirection

CONFIG_VERSION = 1

CAMERA_CHANNEL_PREFIX = "camera/"
CAMERA_CHANNEL_SUFFIX = "/frame"


@dataclass
class CameraConfig:
    id: str
    name: str
    channel: str
    extras: dict = field(default_factory=dict)


@dataclass
class CameraPair:
    name: str
    left: str
    right: str
    extras: dict = field(default_factory=dict)


@dataclass
class SensorConfig:
    name: str
    unit: str = ""
    warn_threshold: float | None = None
    danger_threshold: float | None = None
    direction: ThresholdDirection = ThresholdDirection.HIGH_IS_BAD
    extras: dict = field(default_factory=dict)


@dataclass
class ViewDefaults:
    kp: float = DEFAULT_KP
    distance: float = DEFAULT_DISTANCE
    height: float = DEFAULT_HEIGHT
    tick_hz: float = DEFAULT_TICK_HZ
    extras: dict = field(default_factory=dict)


@dataclass
class ConsoleConfig:
    cameras: list[CameraConfig] = field(default_factory=list)
    camera_pairs: list[CameraPair] = field(default_factory=list)
    actions: list[ActionSpec] = field(default_factory=list)
    action_tree: ActionTree = field(default_factory=ActionTree)
    settings: list[SettingsParameter] = field(default_factory=list)
    sensors: list[SensorConfig] = field(default_factory=list)
    view: ViewDefaults = field(default_factory=ViewDefaults)
    extras: dict = field(default_factory=dict)


def default_config() -> ConsoleConfig:
    return ConsoleConfig()


def valid_camera_channel(channel: str) -> bool:
    """Image channels follow the camera/<id>/frame convention."""
    if not channel.startswith(CAMERA_CHANNEL_PREFIX) or not channel.endswith(CAMERA_CHANNEL_SUFFIX):
        return False
    middle = channel[len(CAMERA_CHANNEL_PREFIX) : -len(CAMERA_CHANNEL_SUFFIX)]
    return bool(middle) and all(c.islower() or c.isdigit() or c == "_" for c in middle)


def add_camera(config: ConsoleConfig, name: str, channel: str) -> ConsoleConfig:
    """Append a camera with a fresh id; pure, returns a new config."""
    if not name:
        raise ValidationError("camera needs a name")
    if not valid_camera_channel(channel):
        raise ValidationError(
            f"{channel!r} is not an image channel (expected camera/<id>/frame)"
        )
    if any(c.name == name for c in config.cameras):
        raise DuplicateError(f"camera named {name!r} already exists")
    config = copy.deepcopy(config)
    taken = {c.id for c in config.cameras}
    n = len(config.cameras) + 1
    while f"cam{n}" in taken:
        n += 1
    config.cameras.append(CameraConfig(id=f"cam{n}", name=name, channel=channel))
    return config


# --- serialization -----------------------------------------------------------


def _split_known(doc: dict, known: tuple[str, ...]) -> dict:
    return {k: v for k, v in doc.items() if k not in known}


def _action_to_dict(spec: ActionSpec) -> dict:
    doc = dict(spec.extras)
    doc.update({"id": spec.id, "name": spec.display_name})
    if isinstance(spec, MessageAction):
        doc.update(
            kind="message",
            channel=spec.channel,
            call_style=spec.call_style.value,
            payload=spec.payload,
            payload_script=spec.payload_script,
            timeout_s=spec.timeout_s,
        )
    elif isinstance(spec, ScriptAction):
        doc.update(kind="script", script=spec.script)
    elif isinstance(spec, CompositeAction):
        doc.update(kind="composite", children=list(spec.children), mode=spec.mode.value)
    elif isinstance(spec, ToggleAction):
        doc.update(
            kind="toggle",
            children=list(spec.children),
            feedback_channel=spec.feedback_channel,
            state_extractor=spec.state_extractor,
        )
    else:
        raise ValidationError(f"cannot serialize action kind {type(spec).__name__}")
    return doc


_ACTION_KEYS = {
    "message": ("id", "name", "kind", "channel", "call_style", "payload", "payload_script", "timeout_s"),
    "script": ("id", "name", "kind", "script"),
    "composite": ("id", "name", "kind", "children", "mode"),
    "toggle": ("id", "name", "kind", "children", "feedback_channel", "state_extractor"),
}


def _action_from_dict(doc: dict) -> ActionSpec:
    try:
        kind = doc["kind"]
        name = doc["name"]
    except KeyError as exc:
        raise ValidationError(f"action entry missing {exc}") from exc
    extras = _split_known(doc, _ACTION_KEYS.get(kind, ()))
    base = {"display_name": name, "id": doc.get("id", ""), "extras": extras}
    if kind == "message":
        return MessageAction(
            channel=doc.get("channel", ""),
            call_style=CallStyle(doc.get("call_style", "publish")),
            payload=doc.get("payload"),
            payload_script=doc.get("payload_script"),
            timeout_s=float(doc.get("timeout_s", 5.0)),
            **base,
        )
    if kind == "script":
        return ScriptAction(script=doc.get("script", ""), **base)
    if kind == "composite":
        return CompositeAction(
            children=list(doc.get("children", [])),
            mode=CompositeMode(doc.get("mode", "sequence")),
            **base,
        )
    if kind == "toggle":
        return ToggleAction(
            children=list(doc.get("children", [])),
            feedback_channel=doc.get("feedback_channel"),
            state_extractor=doc.get("state_extractor"),
            **base,
        )
    raise ValidationError(f"unknown action kind {kind!r}")


def _tree_to_dict(node: FolderNode) -> dict:
    items = []
    for item in node.items:
        if isinstance(item, FolderNode):
            items.append(_tree_to_dict(item))
        else:
            items.append({"action": item.action_id})
    return {"folder": node.name, "items": items}


def _tree_from_dict(doc: dict) -> FolderNode:
    if "folder" not in doc:
        raise ValidationError("tree node missing 'folder' name")
    items = []
    for item in doc.get("items", []):
        if not isinstance(item, dict):
            raise ValidationError("tree items must be objects")
        if "action" in item:
            items.append(ActionRef(action_id=item["action"]))
        else:
            items.append(_tree_from_dict(item))
    return FolderNode(name=doc["folder"], items=items)


_PARAM_KEYS = ("path", "alias", "kind", "value", "min", "max", "choices", "description")


def _param_to_dict(param: SettingsParameter) -> dict:
    doc = dict(param.extras)
    doc.update(
        path=param.path,
        alias=param.display_alias,
        kind=param.kind.value,
        value=param.value,
        min=param.minimum,
        max=param.maximum,
        choices=param.choices,
        description=param.description,
    )
    return doc


def _param_from_dict(doc: dict) -> SettingsParameter:
    try:
        return SettingsParameter(
            path=doc["path"],
            display_alias=doc.get("alias", doc["path"]),
            kind=ParamKind(doc.get("kind", "float")),
            value=doc.get("value"),
            minimum=doc.get("min"),
            maximum=doc.get("max"),
            choices=doc.get("choices"),
            description=doc.get("description", ""),
            extras=_split_known(doc, _PARAM_KEYS),
        )
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad settings entry: {exc}") from exc


_SENSOR_KEYS = ("name", "unit", "warn", "danger", "direction")
_CAMERA_KEYS = ("id", "name", "channel")
_PAIR_KEYS = ("name", "left", "right")
_VIEW_KEYS = ("kp", "distance", "height", "tick_hz")
_ROOT_KEYS = ("version", "cameras", "camera_pairs", "actions", "action_tree", "settings", "sensors", "view")


def config_to_tree(config: ConsoleConfig) -> dict:
    doc = dict(config.extras)
    doc["version"] = CONFIG_VERSION
    doc["cameras"] = [
        {**c.extras, "id": c.id, "name": c.name, "channel": c.channel} for c in config.cameras
    ]
    doc["camera_pairs"] = [
        {**p.extras, "name": p.name, "left": p.left, "right": p.right}
        for p in config.camera_pairs
    ]
    doc["actions"] = [_action_to_dict(a) for a in config.actions]
    doc["action_tree"] = _tree_to_dict(config.action_tree.root)
    doc["settings"] = [_param_to_dict(p) for p in config.settings]
    doc["sensors"] = [
        {
            **s.extras,
            "name": s.name,
            "unit": s.unit,
            "warn": s.warn_threshold,
            "danger": s.danger_threshold,
            "direction": s.direction.value,
        }
        for s in config.sensors
    ]
    view = config.view
    doc["view"] = {
        **view.extras,
        "kp": view.kp,
        "distance": view.distance,
        "height": view.height,
        "tick_hz": view.tick_hz,
    }
    return doc


def config_from_tree(doc: dict) -> ConsoleConfig:
    if not isinstance(doc, dict):
        raise ValidationError("config root must be an object")
    cameras = [
        CameraConfig(
            id=c["id"], name=c["name"], channel=c["channel"],
            extras=_split_known(c, _CAMERA_KEYS),
        )
        for c in doc.get("cameras", [])
    ]
    pairs = [
        CameraPair(
            name=p["name"], left=p["left"], right=p["right"],
            extras=_split_known(p, _PAIR_KEYS),
        )
        for p in doc.get("camera_pairs", [])
    ]
    actions = [_action_from_dict(a) for a in doc.get("actions", [])]
    tree_doc = doc.get("action_tree")
    tree = ActionTree(root=_tree_from_dict(tree_doc)) if tree_doc else ActionTree()
    settings = [_param_from_dict(p) for p in doc.get("settings", [])]
    sensors = [
        SensorConfig(
            name=s["name"],
            unit=s.get("unit", ""),
            warn_threshold=s.get("warn"),
            danger_threshold=s.get("danger"),
            direction=ThresholdDirection(s.get("direction", "high_is_bad")),
            extras=_split_known(s, _SENSOR_KEYS),
        )
        for s in doc.get("sensors", [])
    ]
    view_doc = doc.get("view", {})
    view = ViewDefaults(
        kp=float(view_doc.get("kp", DEFAULT_KP)),
        distance=float(view_doc.get("distance", DEFAULT_DISTANCE)),
        height=float(view_doc.get("height", DEFAULT_HEIGHT)),
        tick_hz=float(view_doc.get("tick_hz", DEFAULT_TICK_HZ)),
        extras=_split_known(view_doc, _VIEW_KEYS),
    )
    config = ConsoleConfig(
        cameras=cameras,
        camera_pairs=pairs,
        actions=actions,
        action_tree=tree,
        settings=settings,
        sensors=sensors,
        view=view,
        extras=_split_known(doc, _ROOT_KEYS),
    )
    validate_config(config)
    return config


def validate_config(config: ConsoleConfig) -> None:
    """Every cross-reference resolves; all problems reported at once."""
    problems: list[str] = []
    camera_ids = {c.id for c in config.cameras}
    for pair in config.camera_pairs:
        for side, cam in (("left", pair.left), ("right", pair.right)):
            if cam not in camera_ids:
                problems.append(f"camera pair {pair.name!r}: {side} camera {cam!r} unknown")
    registry = None
    try:
        registry = ActionRegistry.from_specs(copy.deepcopy(config.actions))
    except (ValidationError, DuplicateError, ScriptError) as exc:
        problems.append(str(exc))
    if registry is not None:
        from .actions import validate_tree

        problems.extend(validate_tree(config.action_tree, registry))
    seen_paths = set()
    for param in config.settings:
        if param.path in seen_paths:
            problems.append(f"duplicate parameter path {param.path!r}")
        seen_paths.add(param.path)
    for sensor in config.sensors:
        warn, danger = sensor.warn_threshold, sensor.danger_threshold
        if warn is not None and danger is not None:
            high_bad = sensor.direction is ThresholdDirection.HIGH_IS_BAD
            if (danger > warn) != high_bad:
                problems.append(
                    f"sensor {sensor.name!r}: danger threshold must be beyond warn"
                )
    if problems:
        raise ValidationError("; ".join(problems))


def dump_tree(tree: dict) -> str:
    """The one canonical text form of a property tree."""
    return json.dumps(tree, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def save(config: ConsoleConfig, path: str | Path) -> None:
    """Write atomically (temp file + rename); load(save(c)) == c."""
    path = Path(path)
    text = dump_tree(config_to_tree(config))
    try:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load(path: str | Path) -> ConsoleConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        return default_config()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_tree(doc)
