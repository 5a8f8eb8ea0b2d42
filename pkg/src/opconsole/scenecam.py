"""Virtual-camera management for the scene view.

Preset poses around the robot, a perspective/top-down projection toggle,
and a lock mode where the camera follows the robot base through a
P controller to dampen the motion. Manually translating the camera breaks
the lock; orbiting (orientation-only motion about the focus) does not.
All functions are pure; the UI session owns one ViewState per client.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import ValidationError

Vec3 = tuple[float, float, float]

# Manual moves are treated as orientation-only when the focus is unchanged
# and the orbit radius changes by less than this (meters).
ORBIT_EPS = 1e-6

DEFAULT_KP = 3.0
DEFAULT_DISTANCE = 3.0
DEFAULT_HEIGHT = 2.0
DEFAULT_TICK_HZ = 60.0


class ViewDirection(Enum):
    LEFT = "left"
    FRONT = "front"
    RIGHT = "right"
    BACK = "back"


class Projection(Enum):
    PERSPECTIVE = "perspective"
    ORTHO_TOP_DOWN = "ortho_top_down"


def _add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def _norm(a: Vec3) -> float:
    return math.sqrt(a[0] ** 2 + a[1] ** 2 + a[2] ** 2)


@dataclass(frozen=True)
class ViewPose:
    eye: Vec3
    focus: Vec3
    up: Vec3 = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if _norm(_sub(self.eye, self.focus)) == 0.0:
            raise ValidationError("eye and focus must differ")
        length = _norm(self.up)
        if abs(length - 1.0) > 1e-9:
            if length == 0.0:
                raise ValidationError("up vector must be non-zero")
            object.__setattr__(self, "up", _scale(self.up, 1.0 / length))


@dataclass(frozen=True)
class ViewState:
    pose: ViewPose
    projection: Projection = Projection.PERSPECTIVE
    locked: bool = False
    kp: float = DEFAULT_KP
    # Translation offsets from the robot base captured when the lock engaged,
    # refreshed when the operator orbits while locked.
    eye_offset: Vec3 | None = None
    focus_offset: Vec3 | None = None
    last_robot_base: Vec3 | None = None

    def __post_init__(self):
        if self.kp < 0.0:
            raise ValidationError("follow gain must be >= 0")


# Horizontal eye offsets in the robot frame, scaled by distance. Front looks
# at the robot from ahead (eye on the robot's +x), back from behind.
_DIRECTION_OFFSETS = {
    ViewDirection.FRONT: (1.0, 0.0),
    ViewDirection.BACK: (-1.0, 0.0),
    ViewDirection.LEFT: (0.0, 1.0),
    ViewDirection.RIGHT: (0.0, -1.0),
}


def preset_pose(
    direction: ViewDirection,
    robot_pose: tuple[float, float, float],
    distance: float = DEFAULT_DISTANCE,
    height: float = DEFAULT_HEIGHT,
    base_z: float = 0.0,
) -> ViewPose:
    """Camera pose at `distance` from the robot base along one of the four
    robot-frame directions, raised by `height`, focused on the base."""
    if distance <= 0 or height <= 0:
        raise ValidationError("distance and height must be positive")
    x, y, yaw = robot_pose
    ox, oy = _DIRECTION_OFFSETS[direction]
    c, s = math.cos(yaw), math.sin(yaw)
    world_dx = (c * ox - s * oy) * distance
    world_dy = (s * ox + c * oy) * distance
    focus = (x, y, base_z)
    eye = (x + world_dx, y + world_dy, base_z + height)
    return ViewPose(eye=eye, focus=focus)


def engage_lock(state: ViewState, robot_base: Vec3) -> ViewState:
    """Lock the camera to the robot base, keeping the current offsets."""
    return replace(
        state,
        locked=True,
        eye_offset=_sub(state.pose.eye, robot_base),
        focus_offset=_sub(state.pose.focus, robot_base),
        last_robot_base=robot_base,
    )


def release_lock(state: ViewState) -> ViewState:
    return replace(state, locked=False, eye_offset=None, focus_offset=None, last_robot_base=None)


def step_follow(state: ViewState, robot_base: Vec3, dt: float) -> ViewState:
    """One P-controller step toward the locked offsets from the robot base."""
    if not state.locked or state.eye_offset is None or state.focus_offset is None:
        raise ValidationError("step_follow requires an engaged lock")
    factor = state.kp * dt
    if factor > 1.0:
        raise ValidationError(f"kp*dt = {factor:.3f} overshoots; reduce the gain or tick")
    target_eye = _add(robot_base, state.eye_offset)
    target_focus = _add(robot_base, state.focus_offset)
    eye = _add(state.pose.eye, _scale(_sub(target_eye, state.pose.eye), factor))
    focus = _add(state.pose.focus, _scale(_sub(target_focus, state.pose.focus), factor))
    pose = ViewPose(eye=eye, focus=focus, up=state.pose.up)
    return replace(state, pose=pose, last_robot_base=robot_base)


def manual_move(state: ViewState, new_pose: ViewPose) -> ViewState:
    """Apply an operator camera move.

    While locked, a pure orientation change (same focus, same orbit radius)
    keeps the lock and refreshes the stored offsets; any translation
    unlocks.
    """
    if not state.locked:
        return replace(state, pose=new_pose)
    same_focus = state.pose.focus == new_pose.focus
    radius_delta = abs(
        _norm(_sub(new_pose.eye, new_pose.focus)) - _norm(_sub(state.pose.eye, state.pose.focus))
    )
    if same_focus and radius_delta < ORBIT_EPS:
        updated = replace(state, pose=new_pose)
        if state.last_robot_base is not None:
            return engage_lock(updated, state.last_robot_base)
        return updated
    return replace(
        replace(state, pose=new_pose),
        locked=False,
        eye_offset=None,
        focus_offset=None,
        last_robot_base=None,
    )


def toggle_projection(state: ViewState, robot_yaw: float = 0.0) -> ViewState:
    """Flip between perspective and the orthographic top-down projection.

    Dropping into top-down aims the camera straight down from above the
    focus with the robot's forward direction as screen-up. Lock and gain
    are untouched.
    """
    if state.projection is Projection.PERSPECTIVE:
        span = _norm(_sub(state.pose.eye, state.pose.focus))
        focus = state.pose.focus
        pose = ViewPose(
            eye=(focus[0], focus[1], focus[2] + span),
            focus=focus,
            up=(math.cos(robot_yaw), math.sin(robot_yaw), 0.0),
        )
        next_state = replace(state, projection=Projection.ORTHO_TOP_DOWN, pose=pose)
    else:
        next_state = replace(state, projection=Projection.PERSPECTIVE)
    if state.locked and state.last_robot_base is not None:
        return engage_lock(next_state, state.last_robot_base)
    return next_state


def view_direction(pose: ViewPose) -> Vec3:
    d = _sub(pose.focus, pose.eye)
    return _scale(d, 1.0 / _norm(d))
