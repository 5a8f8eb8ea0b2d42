// Scene-view virtual camera: preset poses, P-controller follow lock,
// orbit-preserving manual moves, projection toggle. Client-side state,
// one per session.

export type Vec3 = [number, number, number];

export interface ViewPose {
  eye: Vec3;
  focus: Vec3;
  up: Vec3;
}

export type Projection = "perspective" | "ortho_top_down";

export interface ViewState {
  pose: ViewPose;
  projection: Projection;
  locked: boolean;
  kp: number;
  eyeOffset: Vec3 | null;
  focusOffset: Vec3 | null;
  lastBase: Vec3 | null;
}

const sub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const add = (a: Vec3, b: Vec3): Vec3 => [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
const scale = (a: Vec3, s: number): Vec3 => [a[0] * s, a[1] * s, a[2] * s];
const norm = (a: Vec3): number => Math.hypot(a[0], a[1], a[2]);

export const ORBIT_EPS = 1e-6;

export function initialView(distance = 3.0, height = 2.0, kp = 3.0): ViewState {
  return {
    pose: { eye: [-distance, 0, height], focus: [0, 0, 0], up: [0, 0, 1] },
    projection: "perspective",
    locked: false,
    kp,
    eyeOffset: null,
    focusOffset: null,
    lastBase: null,
  };
}

export type PresetDirection = "left" | "front" | "right" | "back";

const DIRECTION_OFFSETS: Record<PresetDirection, [number, number]> = {
  front: [1, 0],
  back: [-1, 0],
  left: [0, 1],
  right: [0, -1],
};

export function presetPose(
  direction: PresetDirection,
  robot: { x: number; y: number; yaw: number },
  distance = 3.0,
  height = 2.0,
): ViewPose {
  const [ox, oy] = DIRECTION_OFFSETS[direction];
  const c = Math.cos(robot.yaw);
  const s = Math.sin(robot.yaw);
  return {
    eye: [robot.x + (c * ox - s * oy) * distance, robot.y + (s * ox + c * oy) * distance, height],
    focus: [robot.x, robot.y, 0],
    up: [0, 0, 1],
  };
}

export function engageLock(state: ViewState, base: Vec3): ViewState {
  return {
    ...state,
    locked: true,
    eyeOffset: sub(state.pose.eye, base),
    focusOffset: sub(state.pose.focus, base),
    lastBase: base,
  };
}

export function releaseLock(state: ViewState): ViewState {
  return { ...state, locked: false, eyeOffset: null, focusOffset: null, lastBase: null };
}

export function stepFollow(state: ViewState, base: Vec3, dt: number): ViewState {
  if (!state.locked || !state.eyeOffset || !state.focusOffset) return state;
  const factor = Math.min(state.kp * dt, 1.0);
  const targetEye = add(base, state.eyeOffset);
  const targetFocus = add(base, state.focusOffset);
  return {
    ...state,
    lastBase: base,
    pose: {
      eye: add(state.pose.eye, scale(sub(targetEye, state.pose.eye), factor)),
      focus: add(state.pose.focus, scale(sub(targetFocus, state.pose.focus), factor)),
      up: state.pose.up,
    },
  };
}

export function manualMove(state: ViewState, pose: ViewPose): ViewState {
  if (!state.locked) return { ...state, pose };
  const sameFocus =
    state.pose.focus[0] === pose.focus[0] &&
    state.pose.focus[1] === pose.focus[1] &&
    state.pose.focus[2] === pose.focus[2];
  const radiusDelta = Math.abs(norm(sub(pose.eye, pose.focus)) - norm(sub(state.pose.eye, state.pose.focus)));
  if (sameFocus && radiusDelta < ORBIT_EPS) {
    const orbited = { ...state, pose };
    return state.lastBase ? engageLock(orbited, state.lastBase) : orbited;
  }
  return { ...state, pose, locked: false, eyeOffset: null, focusOffset: null, lastBase: null };
}

export function toggleProjection(state: ViewState, robotYaw = 0): ViewState {
  if (state.projection === "perspective") {
    const span = norm(sub(state.pose.eye, state.pose.focus));
    const next: ViewState = {
      ...state,
      projection: "ortho_top_down",
      pose: {
        eye: [state.pose.focus[0], state.pose.focus[1], state.pose.focus[2] + span],
        focus: state.pose.focus,
        up: [Math.cos(robotYaw), Math.sin(robotYaw), 0],
      },
    };
    return state.locked && state.lastBase ? engageLock(next, state.lastBase) : next;
  }
  return { ...state, projection: "perspective" };
}
