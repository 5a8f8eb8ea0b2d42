"""Mission control: an ordered task list executed one task at a time.

The runner is a single-writer state machine over five phases (Idle,
Running, Paused, AwaitingConfirmation, Finished). Operator controls are
Back, Pause/Resume, Stop (resets to the freshly-loaded state), and Skip.
A failed task pauses the mission so the operator can take over; pausing
cancels the in-flight execution and resuming re-executes the current task
from the start. Confirmation prompts raised by the running task queue
FIFO; an unanswered prompt falls back to its first option at the deadline.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

from .errors import BusyError, ConsoleError, NotFoundError, StateError, ValidationError
from .executor import ActionExecutor, ExecState, ExecutionRecord


class MissionPhase(Enum):
    IDLE = "idle"
    RUNNING = "running"
    PAUSED = "paused"
    AWAITING_CONFIRMATION = "awaiting_confirmation"
    FINISHED = "finished"


class MissionCommand(Enum):
    BACK = "back"
    PAUSE_RESUME = "pause_resume"
    STOP = "stop"
    SKIP = "skip"


@dataclass
class MissionTask:
    label: str
    action_id: str
    context: dict[str, Any] = field(default_factory=dict)


@dataclass
class Mission:
    name: str
    tasks: list[MissionTask]


@dataclass
class ConfirmationRequest:
    prompt: str
    options: list[str]
    deadline_s: float | None = None

    def __post_init__(self):
        if not self.options:
            raise ValidationError("confirmation request needs at least one option")


@dataclass
class MissionState:
    """Immutable snapshot broadcast on every transition."""

    mission_name: str | None = None
    phase: MissionPhase = MissionPhase.IDLE
    current_index: int = 0
    task_labels: tuple[str, ...] = ()
    results: tuple[str | None, ...] = ()
    pending_prompt: str | None = None
    prompt_options: tuple[str, ...] = ()
    failure: str | None = None
    last_answer: str | None = None


class MissionRunner:
    def __init__(
        self,
        executor: ActionExecutor,
        mono: Callable[[], float],
        on_state: Callable[[MissionState], None] | None = None,
        on_answer: Callable[[str, str, bool], None] | None = None,
    ):
        self._executor = executor
        self._mono = mono
        self._on_state = on_state or (lambda state: None)
        # on_answer(prompt, option, timed_out) delivers the choice to the task
        self._on_answer = on_answer or (lambda prompt, option, timed_out: None)
        self._mission: Mission | None = None
        self._phase = MissionPhase.IDLE
        self._index = 0
        self._results: list[str | None] = []
        self._failure: str | None = None
        self._last_answer: str | None = None
        self._current_exec: str | None = None
        self._prompts: list[ConfirmationRequest] = []
        self._prompt_deadline: float | None = None

    # -- queries --------------------------------------------------------------

    def state(self) -> MissionState:
        mission = self._mission
        prompt = self._prompts[0] if self._prompts else None
        return MissionState(
            mission_name=mission.name if mission else None,
            phase=self._phase,
            current_index=self._index,
            task_labels=tuple(t.label for t in mission.tasks) if mission else (),
            results=tuple(self._results),
            pending_prompt=prompt.prompt if prompt else None,
            prompt_options=tuple(prompt.options) if prompt else (),
            failure=self._failure,
            last_answer=self._last_answer,
        )

    # -- commands -------------------------------------------------------------

    def load(self, mission: Mission) -> MissionState:
        if self._phase not in (MissionPhase.IDLE, MissionPhase.FINISHED):
            raise BusyError("cannot load a mission while one is active")
        if not mission.tasks:
            raise ValidationError("mission needs at least one task")
        missing = [t.action_id for t in mission.tasks if t.action_id not in self._executor.registry]
        if missing:
            raise ValidationError(f"mission references unknown actions: {missing}")
        self._mission = mission
        self._reset()
        return self._transition()

    def start(self) -> MissionState:
        if self._mission is None:
            raise StateError("no mission loaded")
        if self._phase in (MissionPhase.RUNNING, MissionPhase.PAUSED, MissionPhase.AWAITING_CONFIRMATION):
            raise BusyError("mission already active")
        self._reset()
        self._phase = MissionPhase.RUNNING
        self._execute_current()
        return self._transition()

    def control(self, cmd: MissionCommand) -> MissionState:
        if self._mission is None:
            raise StateError("no mission loaded")
        handler = {
            MissionCommand.BACK: self._cmd_back,
            MissionCommand.PAUSE_RESUME: self._cmd_pause_resume,
            MissionCommand.STOP: self._cmd_stop,
            MissionCommand.SKIP: self._cmd_skip,
        }[cmd]
        handler()
        return self._transition()

    def answer(self, option: str) -> MissionState:
        if self._phase is not MissionPhase.AWAITING_CONFIRMATION:
            raise StateError("no confirmation pending")
        prompt = self._prompts[0]
        if option not in prompt.options:
            raise ValidationError(f"option {option!r} not offered by the prompt")
        self._resolve_prompt(option, timed_out=False)
        return self._transition()

    def request_confirmation(self, request: ConfirmationRequest) -> MissionState:
        if self._phase is MissionPhase.RUNNING:
            self._prompts.append(request)
            self._phase = MissionPhase.AWAITING_CONFIRMATION
            self._arm_prompt_deadline()
        elif self._phase is MissionPhase.AWAITING_CONFIRMATION:
            self._prompts.append(request)
        else:
            raise StateError(f"cannot request confirmation while {self._phase.value}")
        return self._transition()

    def tick(self, now: float) -> None:
        if (
            self._phase is MissionPhase.AWAITING_CONFIRMATION
            and self._prompt_deadline is not None
            and now >= self._prompt_deadline
        ):
            self._resolve_prompt(self._prompts[0].options[0], timed_out=True)
            self._transition()

    def on_execution_event(self, record: ExecutionRecord) -> None:
        if record.exec_id != self._current_exec or record.state is ExecState.RUNNING:
            return
        self._current_exec = None
        if self._phase not in (MissionPhase.RUNNING, MissionPhase.AWAITING_CONFIRMATION):
            return  # stale event, operator already moved the mission
        if self._phase is MissionPhase.AWAITING_CONFIRMATION:
            # The requesting task ended; its prompts are moot.
            self._prompts.clear()
            self._prompt_deadline = None
            self._phase = MissionPhase.RUNNING
        if record.state is ExecState.SUCCEEDED:
            self._results[self._index] = "succeeded"
            self._advance()
        elif record.state is ExecState.FAILED:
            self._results[self._index] = "failed"
            self._failure = record.status_text or "task failed"
            self._phase = MissionPhase.PAUSED
        else:
            self._results[self._index] = "canceled"
            self._failure = "task canceled outside mission control"
            self._phase = MissionPhase.PAUSED
        self._transition()

    # -- internals --------------------------------------------------------------

    def _reset(self) -> None:
        assert self._mission is not None
        self._cancel_current()
        self._phase = MissionPhase.IDLE
        self._index = 0
        self._results = [None] * len(self._mission.tasks)
        self._failure = None
        self._last_answer = None
        self._prompts = []
        self._prompt_deadline = None

    def _cmd_back(self) -> None:
        if self._phase is MissionPhase.RUNNING:
            self._cancel_current()
            self._index = max(self._index - 1, 0)
            self._execute_current()
        elif self._phase is MissionPhase.PAUSED:
            self._index = max(self._index - 1, 0)
        else:
            raise StateError(f"Back is not legal while {self._phase.value}")

    def _cmd_pause_resume(self) -> None:
        if self._phase is MissionPhase.RUNNING:
            self._cancel_current()
            self._phase = MissionPhase.PAUSED
        elif self._phase is MissionPhase.PAUSED:
            self._phase = MissionPhase.RUNNING
            self._execute_current()
        else:
            raise StateError(f"Pause/Resume is not legal while {self._phase.value}")

    def _cmd_stop(self) -> None:
        self._reset()

    def _cmd_skip(self) -> None:
        if self._phase not in (MissionPhase.RUNNING, MissionPhase.PAUSED):
            raise StateError(f"Skip is not legal while {self._phase.value}")
        self._cancel_current()
        self._results[self._index] = "skipped"
        if self._index + 1 >= len(self._mission.tasks):
            self._phase = MissionPhase.FINISHED
        else:
            self._index += 1
            if self._phase is MissionPhase.RUNNING:
                self._execute_current()

    def _advance(self) -> None:
        if self._index + 1 >= len(self._mission.tasks):
            self._phase = MissionPhase.FINISHED
        else:
            self._index += 1
            self._execute_current()

    def _execute_current(self) -> None:
        task = self._mission.tasks[self._index]
        try:
            self._current_exec = self._executor.execute(task.action_id, dict(task.context))
        except ConsoleError as exc:
            self._current_exec = None
            self._results[self._index] = "failed"
            self._failure = f"could not start {task.label!r}: {exc}"
            self._phase = MissionPhase.PAUSED
            return
        # Script and publish actions terminate inside execute(), before the
        # exec id was recorded; their terminal event fired too early to match
        # and must be consumed here.
        record = self._executor.records.get(self._current_exec)
        if record is not None and record.state is not ExecState.RUNNING:
            self.on_execution_event(record)

    def _cancel_current(self) -> None:
        exec_id, self._current_exec = self._current_exec, None
        if exec_id is not None:
            try:
                self._executor.cancel(exec_id)
            except NotFoundError:
                pass

    def _arm_prompt_deadline(self) -> None:
        head = self._prompts[0]
        self._prompt_deadline = (
            self._mono() + head.deadline_s if head.deadline_s is not None else None
        )

    def _resolve_prompt(self, option: str, timed_out: bool) -> None:
        prompt = self._prompts.pop(0)
        self._last_answer = option
        self._on_answer(prompt.prompt, option, timed_out)
        if self._prompts:
            self._arm_prompt_deadline()
        else:
            self._prompt_deadline = None
            self._phase = MissionPhase.RUNNING

    def _transition(self) -> MissionState:
        snapshot = self.state()
        self._on_state(snapshot)
        return snapshot
