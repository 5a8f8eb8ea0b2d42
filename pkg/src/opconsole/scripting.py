"""Embedded expression language for dynamic action payloads and toggle
feedback parsing.

Scripts are single Python expressions evaluated with no builtins beyond a
small whitelist and only the documented bindings in scope: `context` (the
execution's input tree), `tool` (latest 3D-tool inputs), `settings`
(current parameter values by path), `now` (monotonic seconds), plus
`message` for feedback extractors. Double underscores are rejected
outright. This keeps honest configs honest; it is not a security boundary
against a hostile config author.
"""

from __future__ import annotations

from typing import Any, Mapping

from .errors import ScriptError

_SAFE_BUILTINS = {
    "abs": abs,
    "min": min,
    "max": max,
    "round": round,
    "len": len,
    "int": int,
    "float": float,
    "str": str,
    "bool": bool,
    "sorted": sorted,
    "sum": sum,
}

BINDING_NAMES = ("context", "tool", "settings", "now", "message")


def check_script(source: str) -> None:
    """Parse-only validation, used when loading configs."""
    if not isinstance(source, str) or not source.strip():
        raise ScriptError("empty script")
    if "__" in source:
        raise ScriptError("double underscores are not allowed in scripts")
    try:
        compile(source, "<script>", "eval")
    except SyntaxError as exc:
        raise ScriptError(f"syntax error: {exc.msg} (col {exc.offset})") from exc


def evaluate(source: str, bindings: Mapping[str, Any]) -> Any:
    """Evaluate a script expression; any failure becomes ScriptError."""
    check_script(source)
    scope = {name: None for name in BINDING_NAMES}
    scope.update(bindings)
    try:
        return eval(  # noqa: S307 - restricted scope, see module docstring
            compile(source, "<script>", "eval"),
            {"__builtins__": _SAFE_BUILTINS},
            scope,
        )
    except Exception as exc:
        raise ScriptError(f"{type(exc).__name__}: {exc}") from exc
