"""Execution manager for robot actions.

One single-writer state machine owns every execution record; all mutations
arrive as ordered calls (execute, cancel, service results, feedback,
timeouts) and every state change is pushed to listeners, so any number of
views (action buttons, the active-task banner, remote consoles) stay
consistent by construction.

Terminal states are absorbing: Running can move to Succeeded, Failed, or
Canceled, and nothing moves out of a terminal state. Composite rules:
a Sequence stops at the first non-success and adopts its state; a Parallel
finishes once all children are terminal as Failed if any failed, else
Canceled if any canceled, else Succeeded; a Toggle runs the child after the
current index (wrapping) and adopts its outcome, advancing the index
optimistically and accepting corrections from feedback messages.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Protocol

from .actions import (
    ActionRegistry,
    ActionSpec,
    CallStyle,
    CompositeAction,
    CompositeMode,
    MessageAction,
    ScriptAction,
    ToggleAction,
    ToggleState,
)
from .errors import BusyError, FeedbackError, NotFoundError, ScriptError, ValidationError
from .scripting import evaluate


class ExecState(Enum):
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"
    CANCELED = "canceled"


TERMINAL_STATES = (ExecState.SUCCEEDED, ExecState.FAILED, ExecState.CANCELED)


@dataclass
class ExecutionRecord:
    exec_id: str
    action_id: str
    state: ExecState = ExecState.RUNNING
    status_text: str = ""
    indeterminate: bool = True
    started: float = 0.0
    ended: float | None = None
    parent: str | None = None
    children: list[str] = field(default_factory=list)


class CommandSink(Protocol):
    """Where leaf message actions go; the gateway wires this to the robot link."""

    def publish(self, channel: str, payload: Any) -> None: ...

    def call_service(self, channel: str, payload: Any, token: str, timeout_s: float) -> None: ...

    def cancel_service(self, token: str) -> None:
        """Best-effort abort notice for a still-pending service call."""


class ActionExecutor:
    def __init__(
        self,
        registry: ActionRegistry,
        sink: CommandSink,
        mono: Callable[[], float],
        on_event: Callable[[ExecutionRecord], None] | None = None,
        on_toggle: Callable[[str, int], None] | None = None,
        bindings: Callable[[], dict[str, Any]] | None = None,
    ):
        self.registry = registry
        self._sink = sink
        self._mono = mono
        self._on_event = on_event or (lambda record: None)
        self._on_toggle = on_toggle or (lambda action_id, index: None)
        self._bindings = bindings or dict
        self.records: dict[str, ExecutionRecord] = {}
        self.toggles: dict[str, ToggleState] = {}
        self._running_actions: set[str] = set()
        self._contexts: dict[str, Any] = {}
        self._pending: dict[str, float] = {}
        self._spawning: set[str] = set()
        self._seq = 0

    # -- public surface ------------------------------------------------------

    def execute(self, action_id: str, context: Any = None) -> str:
        spec = self.registry.get(action_id)
        if action_id in self._running_actions:
            raise BusyError(f"action {spec.display_name!r} is already running")
        record = self._start(spec, context if context is not None else {}, parent=None)
        return record.exec_id

    def cancel(self, exec_id: str) -> None:
        record = self.records.get(exec_id)
        if record is None:
            raise NotFoundError(f"unknown execution {exec_id!r}")
        if record.state is not ExecState.RUNNING:
            return
        self._cancel_tree(record)

    def on_service_result(self, token: str, ok: bool, detail: str = "") -> None:
        record = self.records.get(token)
        if record is None or record.state is not ExecState.RUNNING:
            return  # late result for a canceled or unknown execution
        self._pending.pop(token, None)
        if ok:
            self._finish(record, ExecState.SUCCEEDED, detail or "done")
        else:
            self._finish(record, ExecState.FAILED, detail or "service error")

    def on_feedback(self, action_id: str, message: Any) -> ToggleState:
        """Correct a toggle's index from its feedback channel."""
        spec = self.registry.get(action_id)
        if not isinstance(spec, ToggleAction) or spec.state_extractor is None:
            raise ValidationError(f"action {action_id!r} takes no feedback")
        state = self.toggles.setdefault(action_id, ToggleState(action_id=action_id))
        try:
            result = evaluate(spec.state_extractor, {"message": message})
        except ScriptError as exc:
            raise FeedbackError(f"extractor failed: {exc}") from exc
        if isinstance(result, bool) or not isinstance(result, int):
            raise FeedbackError(f"extractor returned non-integer {result!r}")
        if not 0 <= result < len(spec.children):
            raise FeedbackError(
                f"extractor returned {result}, valid range is 0..{len(spec.children) - 1}"
            )
        if result != state.current_index:
            state.current_index = result
            self._on_toggle(action_id, result)
        return replace(state)

    def tick(self, now: float) -> None:
        for token, deadline in list(self._pending.items()):
            if now >= deadline:
                record = self.records[token]
                self._pending.pop(token, None)
                spec = self.registry.get(record.action_id)
                timeout = getattr(spec, "timeout_s", 0.0)
                self._finish(record, ExecState.FAILED, f"timeout after {timeout:g}s")

    def running(self, action_id: str) -> bool:
        return action_id in self._running_actions

    def record_snapshot(self, exec_id: str) -> ExecutionRecord:
        record = self.records[exec_id]
        return replace(record, children=list(record.children))

    def toggle_index(self, action_id: str) -> int:
        state = self.toggles.get(action_id)
        return state.current_index if state else 0

    # -- internals -----------------------------------------------------------

    def _start(self, spec: ActionSpec, context: Any, parent: ExecutionRecord | None) -> ExecutionRecord:
        self._seq += 1
        record = ExecutionRecord(
            exec_id=f"exec{self._seq}",
            action_id=spec.id,
            started=self._mono(),
            parent=parent.exec_id if parent else None,
        )
        self.records[record.exec_id] = record
        if parent is not None:
            parent.children.append(record.exec_id)
        if spec.id in self._running_actions:
            # A composite child hit the same-action concurrency rule; the
            # child fails and the usual composition rules apply.
            self._emit(record)
            self._finish(record, ExecState.FAILED, "busy: action already running")
            return record
        self._running_actions.add(spec.id)
        self._emit(record)
        if isinstance(spec, MessageAction):
            self._start_message(record, spec, context)
        elif isinstance(spec, ScriptAction):
            self._start_script(record, spec, context)
        elif isinstance(spec, CompositeAction):
            self._start_composite(record, spec, context)
        elif isinstance(spec, ToggleAction):
            self._start_toggle(record, spec, context)
        else:
            self._finish(record, ExecState.FAILED, f"unknown action kind {type(spec).__name__}")
        return record

    def _script_scope(self, context: Any) -> dict[str, Any]:
        scope = dict(self._bindings())
        scope["context"] = context
        scope["now"] = self._mono()
        return scope

    def _start_message(self, record: ExecutionRecord, spec: MessageAction, context: Any) -> None:
        if spec.payload_script is not None:
            try:
                payload = evaluate(spec.payload_script, self._script_scope(context))
            except ScriptError as exc:
                self._finish(record, ExecState.FAILED, str(exc))
                return
        else:
            payload = copy.deepcopy(spec.payload)
        if spec.call_style is CallStyle.PUBLISH:
            self._sink.publish(spec.channel, payload)
            self._finish(record, ExecState.SUCCEEDED, "published")
        else:
            self._sink.call_service(spec.channel, payload, record.exec_id, spec.timeout_s)
            self._pending[record.exec_id] = self._mono() + spec.timeout_s

    def _start_script(self, record: ExecutionRecord, spec: ScriptAction, context: Any) -> None:
        try:
            result = evaluate(spec.script, self._script_scope(context))
        except ScriptError as exc:
            self._finish(record, ExecState.FAILED, str(exc))
            return
        text = repr(result)
        self._finish(record, ExecState.SUCCEEDED, text[:120])

    def _start_composite(self, record: ExecutionRecord, spec: CompositeAction, context: Any) -> None:
        self._contexts[record.exec_id] = context
        if spec.mode is CompositeMode.SEQUENCE:
            self._start(self.registry.get(spec.children[0]), context, record)
        else:
            self._spawning.add(record.exec_id)
            for child_id in spec.children:
                if record.state is not ExecState.RUNNING:
                    break
                self._start(self.registry.get(child_id), context, record)
            self._spawning.discard(record.exec_id)
            self._maybe_finish_parallel(record)

    def _start_toggle(self, record: ExecutionRecord, spec: ToggleAction, context: Any) -> None:
        state = self.toggles.setdefault(spec.id, ToggleState(action_id=spec.id))
        index = (state.current_index + 1) % len(spec.children)
        state.current_index = index
        self._on_toggle(spec.id, index)
        self._start(self.registry.get(spec.children[index]), context, record)

    def _finish(self, record: ExecutionRecord, state: ExecState, text: str) -> None:
        if record.state is not ExecState.RUNNING:
            return
        record.state = state
        record.status_text = text
        record.ended = self._mono()
        self._running_actions.discard(record.action_id)
        if self._pending.pop(record.exec_id, None) is not None and state is ExecState.CANCELED:
            self._sink.cancel_service(record.exec_id)
        self._contexts.pop(record.exec_id, None)
        self._emit(record)
        if record.parent is not None:
            self._child_done(record)

    def _cancel_tree(self, record: ExecutionRecord) -> None:
        self._finish(record, ExecState.CANCELED, "canceled")
        for child_id in record.children:
            child = self.records[child_id]
            if child.state is ExecState.RUNNING:
                self._cancel_tree(child)

    def _child_done(self, child: ExecutionRecord) -> None:
        parent = self.records[child.parent]
        if parent.state is not ExecState.RUNNING:
            return
        spec = self.registry.get(parent.action_id)
        if isinstance(spec, ToggleAction):
            self._finish(parent, child.state, child.status_text)
            return
        assert isinstance(spec, CompositeAction)
        if spec.mode is CompositeMode.SEQUENCE:
            if child.state is ExecState.SUCCEEDED:
                done = len(parent.children)
                if done < len(spec.children):
                    context = self._contexts.get(parent.exec_id, {})
                    self._start(self.registry.get(spec.children[done]), context, parent)
                else:
                    self._finish(parent, ExecState.SUCCEEDED, "all steps done")
            else:
                self._finish(parent, child.state, child.status_text)
        else:
            if parent.exec_id not in self._spawning:
                self._maybe_finish_parallel(parent)

    def _maybe_finish_parallel(self, parent: ExecutionRecord) -> None:
        if parent.state is not ExecState.RUNNING:
            return
        spec = self.registry.get(parent.action_id)
        if len(parent.children) < len(spec.children):
            return
        states = [self.records[c].state for c in parent.children]
        if any(s is ExecState.RUNNING for s in states):
            return
        if any(s is ExecState.FAILED for s in states):
            self._finish(parent, ExecState.FAILED, "a parallel branch failed")
        elif any(s is ExecState.CANCELED for s in states):
            self._finish(parent, ExecState.CANCELED, "a parallel branch was canceled")
        else:
            self._finish(parent, ExecState.SUCCEEDED, "all branches done")

    def _emit(self, record: ExecutionRecord) -> None:
        self._on_event(replace(record, children=list(record.children)))
