"""Tunable parameters exposed to operators under a display alias.

A parameter carries its implementation path (what the robot understands)
and a friendly alias (what end-users see), plus a typed value with a range
or choice list that every set goes through.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from .errors import DuplicateError, NotFoundError, ValidationError


class ParamKind(Enum):
    BOOL = "bool"
    INT = "int"
    FLOAT = "float"
    ENUM = "enum"


@dataclass
class SettingsParameter:
    path: str
    display_alias: str
    kind: ParamKind
    value: Any = None
    minimum: float | None = None
    maximum: float | None = None
    choices: list[str] | None = None
    description: str = ""
    extras: dict = field(default_factory=dict)


def check_value(param: SettingsParameter, value: Any) -> Any:
    """Validate (and for FLOAT, coerce ints) a candidate value."""
    kind = param.kind
    if kind is ParamKind.BOOL:
        if not isinstance(value, bool):
            raise ValidationError(f"{param.path}: expected a bool, got {value!r}")
        return value
    if kind is ParamKind.INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{param.path}: expected an int, got {value!r}")
    elif kind is ParamKind.FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{param.path}: expected a number, got {value!r}")
        value = float(value)
    elif kind is ParamKind.ENUM:
        if not param.choices:
            raise ValidationError(f"{param.path}: enum parameter without choices")
        if value not in param.choices:
            raise ValidationError(f"{param.path}: {value!r} not in {param.choices}")
        return value
    if kind in (ParamKind.INT, ParamKind.FLOAT):
        if param.minimum is not None and value < param.minimum:
            raise ValidationError(f"{param.path}: {value} below minimum {param.minimum}")
        if param.maximum is not None and value > param.maximum:
            raise ValidationError(f"{param.path}: {value} above maximum {param.maximum}")
    return value


class SettingsStore:
    def __init__(self, parameters: list[SettingsParameter] | None = None):
        self._params: dict[str, SettingsParameter] = {}
        for param in parameters or []:
            self.define(param)

    def define(self, param: SettingsParameter) -> None:
        if param.path in self._params:
            raise DuplicateError(f"parameter {param.path!r} already defined")
        param.value = check_value(param, param.value)
        self._params[param.path] = param

    def set(self, path: str, value: Any) -> SettingsParameter:
        param = self._params.get(path)
        if param is None:
            raise NotFoundError(f"unknown parameter {path!r}")
        param.value = check_value(param, value)
        return replace(param)

    def get(self, path: str) -> SettingsParameter:
        param = self._params.get(path)
        if param is None:
            raise NotFoundError(f"unknown parameter {path!r}")
        return replace(param)

    def list(self) -> list[SettingsParameter]:
        return [replace(p) for p in self._params.values()]

    def values(self) -> dict[str, Any]:
        """Current values by path, the `settings` binding scripts see."""
        return {p.path: p.value for p in self._params.values()}
