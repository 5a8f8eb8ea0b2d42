import math
import random

import pytest

from opconsole.errors import UnreachableError, ValidationError
from opconsole.sim import (
    Command,
    ControlMode,
    DriveLimits,
    GamepadFrame,
    LinkModel,
    SimRobot,
    flat_terrain,
    look_at,
    map_gamepad,
    ramp_terrain,
    step,
)
from opconsole.wire import Envelope, EnvelopeKind


def frame(left=(0.0, 0.0), right=(0.0, 0.0), triggers=(0.0, 0.0), **buttons):
    return GamepadFrame(left_stick=left, right_stick=right, triggers=triggers, buttons=buttons)


class TestGamepadMapping:
    def test_full_forward(self):
        cmd = map_gamepad(frame(left=(0.0, 1.0)), ControlMode.DRIVE)
        assert cmd.v == pytest.approx(1.0)
        assert cmd.omega == pytest.approx(0.0)

    def test_reverse_mode_inverts_forward(self):
        cmd = map_gamepad(frame(left=(0.0, 1.0)), ControlMode.DRIVE_REVERSED)
        assert cmd.v == pytest.approx(-1.0)

    def test_reverse_keeps_turn_direction(self):
        fwd = map_gamepad(frame(left=(0.5, 0.5)), ControlMode.DRIVE)
        rev = map_gamepad(frame(left=(0.5, 0.5)), ControlMode.DRIVE_REVERSED)
        assert rev.omega == pytest.approx(fwd.omega)
        assert rev.v == pytest.approx(-fwd.v)

    def test_dead_zone(self):
        cmd = map_gamepad(frame(left=(0.03, 0.04)), ControlMode.DRIVE)
        assert cmd.v == 0.0
        assert cmd.omega == 0.0

    def test_odd_in_forward_axis_property(self):
        rng = random.Random(12)
        for _ in range(200):
            f = frame(left=(rng.uniform(-1, 1), rng.uniform(-1, 1)))
            assert map_gamepad(f, ControlMode.DRIVE).v == pytest.approx(
                -map_gamepad(f, ControlMode.DRIVE_REVERSED).v
            )

    def test_triggers_drive_flipper_pairs(self):
        cmd = map_gamepad(frame(triggers=(1.0, 0.5)), ControlMode.DRIVE)
        assert cmd.flipper_front_rate == pytest.approx(0.8)
        assert cmd.flipper_rear_rate == pytest.approx(0.4)

    def test_flipper_down_button_flips_sign(self):
        cmd = map_gamepad(frame(triggers=(1.0, 0.0), flipper_down=True), ControlMode.DRIVE)
        assert cmd.flipper_front_rate == pytest.approx(-0.8)

    def test_manipulation_maps_ee_and_gripper(self):
        cmd = map_gamepad(
            frame(left=(0.0, 1.0), right=(0.0, -1.0), triggers=(0.0, 1.0)),
            ControlMode.MANIPULATION,
        )
        assert cmd.v == 0.0
        assert cmd.ee_linear[0] == pytest.approx(0.3)
        assert cmd.ee_linear[2] == pytest.approx(-0.3)
        assert cmd.gripper_rate == pytest.approx(1.0)

    def test_axis_range_validated(self):
        with pytest.raises(ValidationError):
            GamepadFrame(left_stick=(2.0, 0.0))


class TestStep:
    def test_straight_line_integration(self):
        robot = step(SimRobot(), Command(v=1.0), dt=0.1)
        assert robot.x == pytest.approx(0.1)
        assert robot.y == pytest.approx(0.0)

    def test_estop_freezes_pose(self):
        robot = SimRobot(estop_latched=True)
        after = step(robot, Command(v=1.0, omega=1.0), dt=0.1)
        assert (after.x, after.y, after.yaw) == (robot.x, robot.y, robot.yaw)

    def test_quarter_turn_closed_form(self):
        robot = SimRobot()
        dt = 1e-3
        for _ in range(1000):
            robot = step(robot, Command(omega=math.pi / 2), dt=dt)
        assert robot.yaw == pytest.approx(math.pi / 2, abs=1e-9)

    def test_arc_converges_to_closed_form_as_dt_halves(self):
        # constant twist arc: exact endpoint x = (v/w) sin(w t), y = (v/w)(1-cos(w t))
        v, w, total = 0.8, 0.9, 2.0
        exact = ((v / w) * math.sin(w * total), (v / w) * (1 - math.cos(w * total)))
        errors = []
        for dt in (0.05, 0.025, 0.0125):
            robot = SimRobot()
            steps = round(total / dt)
            for _ in range(steps):
                robot = step(robot, Command(v=v, omega=w), dt=dt)
            errors.append(math.dist((robot.x, robot.y), exact))
        assert errors[1] < errors[0] / 1.7
        assert errors[2] < errors[1] / 1.7

    def test_estop_dominance_fuzz(self):
        rng = random.Random(3)
        robot = SimRobot(estop_latched=True)
        for _ in range(200):
            cmd = Command(
                v=rng.uniform(-2, 2),
                omega=rng.uniform(-3, 3),
                flipper_front_rate=rng.uniform(-1, 1),
                flipper_rear_rate=rng.uniform(-1, 1),
            )
            after = step(robot, cmd, dt=0.05)
            assert (after.x, after.y, after.yaw) == (robot.x, robot.y, robot.yaw)
            assert after.flipper_angles == robot.flipper_angles
            robot = after

    def test_battery_non_increasing(self):
        rng = random.Random(4)
        robot = SimRobot()
        pct = robot.battery.percentage
        for _ in range(500):
            cmd = Command(v=rng.uniform(-1, 1), flipper_front_rate=rng.uniform(-1, 1))
            robot = step(robot, cmd, dt=0.05)
            assert robot.battery.percentage <= pct
            pct = robot.battery.percentage

    def test_flippers_clamped_to_limits(self):
        robot = SimRobot()
        for _ in range(1000):
            robot = step(robot, Command(flipper_front_rate=10.0), dt=0.1)
        assert robot.flipper_angles[0] == pytest.approx(math.pi / 2)

    def test_ramp_terrain_sets_pitch(self):
        robot = SimRobot(x=1.9)
        after = step(robot, Command(v=1.0), dt=0.1, terrain=ramp_terrain)
        assert after.pitch == pytest.approx(0.25)

    def test_dt_bounds(self):
        with pytest.raises(ValidationError):
            step(SimRobot(), Command(), dt=0.2)
        with pytest.raises(ValidationError):
            step(SimRobot(), Command(), dt=0.0)


class TestLookAt:
    def test_example_geometry(self):
        pose = look_at(point=(1.0, 0.0, 0.5), direction=(1.0, 0.0, 0.0), standoff=0.3)
        assert pose.position == pytest.approx((0.7, 0.0, 0.5))
        assert pose.optical_axis() == pytest.approx((1.0, 0.0, 0.0))

    def test_camera_up_stays_near_world_up(self):
        pose = look_at(point=(0.5, 0.2, 0.4), direction=(1.0, 0.0, 0.0), standoff=0.2)
        rotation = pose.rotation
        camera_up = (-rotation[0][1], -rotation[1][1], -rotation[2][1])
        assert camera_up[2] > 0.9

    def test_vertical_direction_falls_back_to_world_x(self):
        pose = look_at(point=(0.0, 0.0, 0.8), direction=(0.0, 0.0, 1.0), standoff=0.3)
        rotation = pose.rotation
        camera_up = (-rotation[0][1], -rotation[1][1], -rotation[2][1])
        assert camera_up == pytest.approx((1.0, 0.0, 0.0))

    def test_rotation_is_orthonormal(self):
        rng = random.Random(6)
        for _ in range(100):
            d = [rng.gauss(0, 1) for _ in range(3)]
            norm = math.sqrt(sum(c * c for c in d))
            if norm < 1e-6:
                continue
            d = tuple(c / norm for c in d)
            pose = look_at(point=(0.2, 0.1, 0.3), direction=d, standoff=0.2)
            r = pose.rotation
            cols = [tuple(r[i][j] for i in range(3)) for j in range(3)]
            for j in range(3):
                assert sum(c * c for c in cols[j]) == pytest.approx(1.0, abs=1e-9)
            for j in range(3):
                for k in range(j + 1, 3):
                    dot = sum(a * b for a, b in zip(cols[j], cols[k]))
                    assert dot == pytest.approx(0.0, abs=1e-9)

    def test_out_of_reach(self):
        with pytest.raises(UnreachableError):
            look_at(point=(10.0, 0.0, 0.5), direction=(1.0, 0.0, 0.0), standoff=0.3, reach=1.0)

    def test_non_unit_direction_rejected(self):
        with pytest.raises(ValidationError):
            look_at(point=(1.0, 0.0, 0.0), direction=(2.0, 0.0, 0.0))


class TestLinkModel:
    def envelope(self):
        return Envelope(EnvelopeKind.PUBLISH, "a/b", {"x": 1})

    def test_no_impairment_is_pure_latency(self):
        link = LinkModel(base_latency=0.05, jitter=0.0, drop_probability=0.0, seed=1)
        for t in (0.0, 1.5, 2.25):
            assert link.transmit(self.envelope(), t) == pytest.approx(t + 0.05)

    def test_full_drop_delivers_nothing(self):
        link = LinkModel(drop_probability=1.0, seed=2)
        assert all(link.transmit(self.envelope(), float(t)) is None for t in range(100))

    def test_same_seed_same_trace(self):
        def trace(seed):
            link = LinkModel(base_latency=0.05, jitter=0.02, drop_probability=0.3, seed=seed)
            return [link.transmit(self.envelope(), float(t)) for t in range(200)]

        assert trace(7) == trace(7)
        assert trace(7) != trace(8)

    def test_jitter_bounds(self):
        link = LinkModel(base_latency=0.1, jitter=0.02, seed=3)
        for t in range(100):
            due = link.transmit(self.envelope(), float(t))
            assert due is not None
            assert t + 0.08 <= due <= t + 0.12

    def test_delay_never_negative(self):
        link = LinkModel(base_latency=0.01, jitter=0.5, seed=4)
        for t in range(100):
            due = link.transmit(self.envelope(), float(t))
            if due is not None:
                assert due >= t

    def test_drop_probability_validated(self):
        with pytest.raises(ValidationError):
            LinkModel(drop_probability=1.5)
