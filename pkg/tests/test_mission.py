import random

import pytest

from opconsole.actions import ActionRegistry, CallStyle, MessageAction
from opconsole.errors import BusyError, StateError, ValidationError
from opconsole.executor import ActionExecutor, ExecState
from opconsole.mission import (
    ConfirmationRequest,
    Mission,
    MissionCommand,
    MissionPhase,
    MissionRunner,
    MissionTask,
)


class FakeSink:
    def __init__(self):
        self.calls = []
        self.cancels = []

    def publish(self, channel, payload):
        pass

    def call_service(self, channel, payload, token, timeout_s):
        self.calls.append({"channel": channel, "token": token})

    def cancel_service(self, token):
        self.cancels.append(token)


class Clock:
    def __init__(self):
        self.t = 0.0

    def __call__(self):
        return self.t


class Rig:
    """Executor + runner wired the way the gateway wires them."""

    def __init__(self, n_tasks=3):
        self.sink = FakeSink()
        self.clock = Clock()
        registry = ActionRegistry()
        self.actions = [
            registry.register(
                MessageAction(display_name=f"Task {i}", channel=f"svc/task{i}", call_style=CallStyle.SERVICE)
            )
            for i in range(n_tasks)
        ]
        self.executor = ActionExecutor(registry, self.sink, self.clock, on_event=self.on_event)
        self.states = []
        self.answers = []
        self.runner = MissionRunner(
            self.executor,
            self.clock,
            on_state=self.states.append,
            on_answer=lambda prompt, option, timed_out: self.answers.append((prompt, option, timed_out)),
        )
        self.mission = Mission(
            name="demo", tasks=[MissionTask(label=f"t{i}", action_id=a) for i, a in enumerate(self.actions)]
        )

    def on_event(self, record):
        self.runner.on_execution_event(record)

    def finish_current(self, ok=True, text=""):
        call = self.sink.calls[-1]
        self.executor.on_service_result(call["token"], ok, text)

    @property
    def phase(self):
        return self.runner.state().phase

    @property
    def index(self):
        return self.runner.state().current_index


class TestStartAndResults:
    def test_start_runs_first_task(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        state = rig.runner.start()
        assert state.phase is MissionPhase.RUNNING
        assert state.current_index == 0
        assert rig.sink.calls[-1]["channel"] == "svc/task0"

    def test_start_while_running_busy(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        with pytest.raises(BusyError):
            rig.runner.start()

    def test_empty_mission_rejected(self):
        rig = Rig()
        with pytest.raises(ValidationError):
            rig.runner.load(Mission(name="x", tasks=[]))

    def test_unknown_action_rejected(self):
        rig = Rig()
        bad = Mission(name="x", tasks=[MissionTask(label="t", action_id="nope")])
        with pytest.raises(ValidationError):
            rig.runner.load(bad)

    def test_success_advances(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        rig.finish_current(ok=True)
        assert rig.phase is MissionPhase.RUNNING
        assert rig.index == 1
        assert rig.sink.calls[-1]["channel"] == "svc/task1"

    def test_failure_pauses_at_same_index(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        rig.finish_current(ok=True)
        rig.finish_current(ok=False, text="arm stuck")
        state = rig.runner.state()
        assert state.phase is MissionPhase.PAUSED
        assert state.current_index == 1
        assert state.failure == "arm stuck"

    def test_last_task_success_finishes(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        for _ in range(3):
            rig.finish_current(ok=True)
        state = rig.runner.state()
        assert state.phase is MissionPhase.FINISHED
        assert state.results == ("succeeded", "succeeded", "succeeded")

    def test_finished_mission_can_restart(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        for _ in range(3):
            rig.finish_current(ok=True)
        state = rig.runner.start()
        assert state.phase is MissionPhase.RUNNING
        assert state.current_index == 0


class TestControls:
    def running_rig(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        return rig

    def test_skip_advances_and_marks(self):
        rig = self.running_rig()
        state = rig.runner.control(MissionCommand.SKIP)
        assert state.current_index == 1
        assert state.results[0] == "skipped"
        assert state.phase is MissionPhase.RUNNING

    def test_skip_on_last_task_finishes(self):
        rig = self.running_rig()
        rig.finish_current(ok=True)
        rig.finish_current(ok=True)
        state = rig.runner.control(MissionCommand.SKIP)
        assert state.phase is MissionPhase.FINISHED

    def test_back_at_zero_stays_and_restarts(self):
        rig = self.running_rig()
        calls_before = len(rig.sink.calls)
        state = rig.runner.control(MissionCommand.BACK)
        assert state.current_index == 0
        assert len(rig.sink.calls) == calls_before + 1  # task re-executed

    def test_back_from_second_task(self):
        rig = self.running_rig()
        rig.finish_current(ok=True)
        state = rig.runner.control(MissionCommand.BACK)
        assert state.current_index == 0
        assert state.phase is MissionPhase.RUNNING

    def test_pause_cancels_in_flight_and_resume_reexecutes(self):
        rig = self.running_rig()
        first_token = rig.sink.calls[-1]["token"]
        state = rig.runner.control(MissionCommand.PAUSE_RESUME)
        assert state.phase is MissionPhase.PAUSED
        assert rig.executor.records[first_token].state is ExecState.CANCELED
        state = rig.runner.control(MissionCommand.PAUSE_RESUME)
        assert state.phase is MissionPhase.RUNNING
        assert rig.sink.calls[-1]["token"] != first_token

    def test_stop_resets_to_post_construction_state(self):
        rig = self.running_rig()
        rig.finish_current(ok=True)
        loaded_state = None
        rig2 = Rig()
        loaded_state = rig2.runner.load(rig2.mission)
        state = rig.runner.control(MissionCommand.STOP)
        assert state == loaded_state

    def test_stop_from_paused(self):
        rig = self.running_rig()
        rig.runner.control(MissionCommand.PAUSE_RESUME)
        state = rig.runner.control(MissionCommand.STOP)
        assert state.phase is MissionPhase.IDLE
        assert state.current_index == 0

    def test_back_skip_illegal_in_idle(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        with pytest.raises(StateError):
            rig.runner.control(MissionCommand.BACK)
        with pytest.raises(StateError):
            rig.runner.control(MissionCommand.SKIP)

    def test_pause_resume_illegal_in_idle_and_finished(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        with pytest.raises(StateError):
            rig.runner.control(MissionCommand.PAUSE_RESUME)

    def test_skip_while_paused_stays_paused(self):
        rig = self.running_rig()
        rig.runner.control(MissionCommand.PAUSE_RESUME)
        state = rig.runner.control(MissionCommand.SKIP)
        assert state.phase is MissionPhase.PAUSED
        assert state.current_index == 1

    def test_stale_result_after_stop_ignored(self):
        rig = self.running_rig()
        token = rig.sink.calls[-1]["token"]
        rig.runner.control(MissionCommand.STOP)
        rig.executor.on_service_result(token, True)
        assert rig.phase is MissionPhase.IDLE


class TestSynchronousTasks:
    def test_mission_of_instant_tasks_runs_to_completion(self):
        # publish/script actions terminate inside execute(); the mission must
        # still see their results and advance
        rig = Rig()
        registry = rig.executor.registry
        from opconsole.actions import ScriptAction

        instant = [registry.register(ScriptAction(display_name=f"I{i}", script="1")) for i in range(3)]
        mission = Mission(name="instant", tasks=[MissionTask(label=f"i{i}", action_id=a) for i, a in enumerate(instant)])
        rig.runner.load(mission)
        state = rig.runner.start()
        assert state.phase is MissionPhase.FINISHED
        assert state.results == ("succeeded", "succeeded", "succeeded")

    def test_instant_failure_pauses(self):
        rig = Rig()
        from opconsole.actions import ScriptAction

        bad = rig.executor.registry.register(ScriptAction(display_name="Bad", script="1/0"))
        rig.runner.load(Mission(name="m", tasks=[MissionTask(label="bad", action_id=bad)]))
        state = rig.runner.start()
        assert state.phase is MissionPhase.PAUSED
        assert state.results == ("failed",)

    def test_mixed_sync_async_tasks(self):
        rig = Rig()
        from opconsole.actions import ScriptAction

        instant = rig.executor.registry.register(ScriptAction(display_name="I", script="1"))
        mission = Mission(
            name="mixed",
            tasks=[
                MissionTask(label="instant", action_id=instant),
                MissionTask(label="slow", action_id=rig.actions[0]),
                MissionTask(label="instant2", action_id=instant),
            ],
        )
        rig.runner.load(mission)
        state = rig.runner.start()
        assert state.phase is MissionPhase.RUNNING
        assert state.current_index == 1  # advanced past the instant task
        rig.finish_current(ok=True)
        assert rig.runner.state().phase is MissionPhase.FINISHED


class TestConfirmation:
    def awaiting_rig(self, deadline=None):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        rig.runner.request_confirmation(
            ConfirmationRequest(prompt="Victim detected?", options=["Confirm", "Dismiss"], deadline_s=deadline)
        )
        return rig

    def test_request_moves_to_awaiting(self):
        rig = self.awaiting_rig()
        state = rig.runner.state()
        assert state.phase is MissionPhase.AWAITING_CONFIRMATION
        assert state.pending_prompt == "Victim detected?"

    def test_answer_resumes_and_delivers(self):
        rig = self.awaiting_rig()
        state = rig.runner.answer("Confirm")
        assert state.phase is MissionPhase.RUNNING
        assert rig.answers == [("Victim detected?", "Confirm", False)]

    def test_deadline_lapse_selects_default(self):
        rig = self.awaiting_rig(deadline=10.0)
        rig.clock.t = 10.5
        rig.runner.tick(rig.clock.t)
        assert rig.phase is MissionPhase.RUNNING
        assert rig.answers == [("Victim detected?", "Confirm", True)]

    def test_second_request_queues_fifo(self):
        rig = self.awaiting_rig()
        rig.runner.request_confirmation(ConfirmationRequest(prompt="Second?", options=["Yes"]))
        state = rig.runner.answer("Confirm")
        assert state.phase is MissionPhase.AWAITING_CONFIRMATION
        assert state.pending_prompt == "Second?"
        state = rig.runner.answer("Yes")
        assert state.phase is MissionPhase.RUNNING

    def test_request_while_paused_illegal(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        rig.runner.start()
        rig.runner.control(MissionCommand.PAUSE_RESUME)
        with pytest.raises(StateError):
            rig.runner.request_confirmation(ConfirmationRequest(prompt="x", options=["a"]))

    def test_controls_illegal_while_awaiting(self):
        rig = self.awaiting_rig()
        for cmd in (MissionCommand.BACK, MissionCommand.PAUSE_RESUME, MissionCommand.SKIP):
            with pytest.raises(StateError):
                rig.runner.control(cmd)

    def test_stop_clears_pending_prompt(self):
        rig = self.awaiting_rig()
        state = rig.runner.control(MissionCommand.STOP)
        assert state.phase is MissionPhase.IDLE
        assert state.pending_prompt is None

    def test_answer_with_unknown_option_rejected(self):
        rig = self.awaiting_rig()
        with pytest.raises(ValidationError):
            rig.runner.answer("Maybe")

    def test_task_result_while_awaiting_drops_prompts(self):
        rig = self.awaiting_rig()
        rig.finish_current(ok=True)
        state = rig.runner.state()
        assert state.pending_prompt is None
        assert state.current_index == 1
        assert state.phase is MissionPhase.RUNNING

    def test_confirm_without_prompt_illegal(self):
        rig = Rig()
        rig.runner.load(rig.mission)
        with pytest.raises(StateError):
            rig.runner.answer("Confirm")


def test_full_transition_table():
    """Every phase x command cell either transitions or raises StateError/BusyError."""
    legal = set()
    for phase in MissionPhase:
        for cmd in ["start", "back", "pause_resume", "stop", "skip", "confirm"]:
            rig = Rig()
            rig.runner.load(rig.mission)
            drive_to_phase(rig, phase)
            assert rig.phase is phase
            try:
                if cmd == "start":
                    rig.runner.start()
                elif cmd == "confirm":
                    rig.runner.answer("Confirm")
                else:
                    rig.runner.control(MissionCommand(cmd))
                legal.add((phase, cmd))
            except (StateError, BusyError, ValidationError):
                pass
            state = rig.runner.state()
            assert 0 <= state.current_index < len(rig.mission.tasks)
    expected_legal = {
        (MissionPhase.IDLE, "start"),
        (MissionPhase.IDLE, "stop"),
        (MissionPhase.RUNNING, "back"),
        (MissionPhase.RUNNING, "pause_resume"),
        (MissionPhase.RUNNING, "stop"),
        (MissionPhase.RUNNING, "skip"),
        (MissionPhase.PAUSED, "back"),
        (MissionPhase.PAUSED, "pause_resume"),
        (MissionPhase.PAUSED, "stop"),
        (MissionPhase.PAUSED, "skip"),
        (MissionPhase.AWAITING_CONFIRMATION, "stop"),
        (MissionPhase.AWAITING_CONFIRMATION, "confirm"),
        (MissionPhase.FINISHED, "start"),
        (MissionPhase.FINISHED, "stop"),
    }
    assert legal == expected_legal


def drive_to_phase(rig, phase):
    if phase is MissionPhase.IDLE:
        return
    rig.runner.start()
    if phase is MissionPhase.RUNNING:
        return
    if phase is MissionPhase.PAUSED:
        rig.runner.control(MissionCommand.PAUSE_RESUME)
    elif phase is MissionPhase.AWAITING_CONFIRMATION:
        rig.runner.request_confirmation(ConfirmationRequest(prompt="p", options=["Confirm"]))
    elif phase is MissionPhase.FINISHED:
        for _ in range(len(rig.mission.tasks)):
            rig.finish_current(ok=True)


def test_fuzz_commands_never_break_index_bounds():
    rng = random.Random(404)
    for _ in range(50):
        n = rng.randint(1, 5)
        rig = Rig(n_tasks=n)
        rig.runner.load(rig.mission)
        for _ in range(200):
            op = rng.randrange(8)
            try:
                if op == 0:
                    rig.runner.start()
                elif op == 1:
                    rig.runner.control(MissionCommand.BACK)
                elif op == 2:
                    rig.runner.control(MissionCommand.PAUSE_RESUME)
                elif op == 3:
                    rig.runner.control(MissionCommand.STOP)
                elif op == 4:
                    rig.runner.control(MissionCommand.SKIP)
                elif op == 5 and rig.sink.calls:
                    rig.finish_current(ok=rng.random() < 0.7)
                elif op == 6:
                    rig.runner.request_confirmation(
                        ConfirmationRequest(prompt="p", options=["a", "b"])
                    )
                else:
                    rig.runner.answer(rng.choice(["a", "b", "zz"]))
            except (StateError, BusyError, ValidationError):
                pass
            state = rig.runner.state()
            assert 0 <= state.current_index < n
            if state.phase is MissionPhase.IDLE:
                assert state.current_index == 0
