// The dashboard's only state: a reducer over protocol envelopes.
//
// The UI is stateless beyond session/view state, so reconnecting and
// replaying snapshot+deltas rebuilds an identical store; every widget
// renders from here and every operator command goes out as exactly one
// service request.

import type { Envelope } from "./protocol.js";

export interface ExecutionView {
  exec_id: string;
  action_id: string;
  state: string;
  status_text: string;
  indeterminate: boolean;
  started: number;
  ended: number | null;
  parent: string | null;
  children: string[];
}

export interface StoreState {
  mode: string | null;
  controlMode: string | null;
  battery: { percentage?: number; voltage?: number };
  posture: { roll?: number; pitch?: number; flippers?: number[]; x?: number; y?: number; yaw?: number };
  connection: { rtt?: number; loss_fraction?: number; alive?: boolean };
  diagnostics: { items: any[]; aggregate: string };
  sensors: Record<string, { name: string; value: number; unit?: string; status: string }>;
  estop: { any_pressed: boolean; channels: any[] };
  mission: Record<string, any>;
  toggles: Record<string, number>;
  executions: Record<string, ExecutionView>;
  activeTask: ExecutionView | null;
  actions: any[];
  tree: { tree?: any; counts?: Record<string, number> };
  settings: Record<string, any>;
  cameras: any[];
  pairs: any[];
  activePair: { name: string; left: string; right: string } | null;
  cameraStats: Record<string, { fps: number; latency: number }>;
  cameraSeen: Record<string, number>;
  frames: Record<string, any>;
  events: any[];
}

export function emptyState(): StoreState {
  return {
    mode: null,
    controlMode: null,
    battery: {},
    posture: {},
    connection: {},
    diagnostics: { items: [], aggregate: "OK" },
    sensors: {},
    estop: { any_pressed: false, channels: [] },
    mission: {},
    toggles: {},
    executions: {},
    activeTask: null,
    actions: [],
    tree: {},
    settings: {},
    cameras: [],
    pairs: [],
    activePair: null,
    cameraStats: {},
    cameraSeen: {},
    frames: {},
    events: [],
  };
}

export type Listener = (state: StoreState, channel: string) => void;

export class Store {
  state: StoreState = emptyState();
  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  reset(): void {
    this.state = emptyState();
  }

  apply(envelope: Envelope, now = 0): void {
    if (envelope.kind !== "publish") return;
    const { channel, payload } = envelope;
    const s = this.state;
    if (channel === "robot/mode") s.mode = payload.mode;
    else if (channel === "robot/control_mode") s.controlMode = payload.mode;
    else if (channel === "robot/battery") s.battery = payload;
    else if (channel === "robot/posture") s.posture = payload;
    else if (channel === "robot/connection") s.connection = payload;
    else if (channel === "robot/diagnostics") s.diagnostics = payload;
    else if (channel.startsWith("robot/sensor/")) s.sensors[payload.name ?? channel] = payload;
    else if (channel === "estop/summary") s.estop = payload;
    else if (channel === "mission/state") s.mission = payload;
    else if (channel === "actions/toggles") s.toggles = payload.indices ?? {};
    else if (channel === "actions/executions") {
      s.executions[payload.exec_id] = payload;
      s.activeTask = payload;
    } else if (channel === "actions/list") s.actions = payload.actions ?? [];
    else if (channel === "actions/tree") s.tree = payload;
    else if (channel === "settings/updates") s.settings[payload.path] = payload;
    else if (channel === "cameras/list") s.cameras = payload.cameras ?? [];
    else if (channel === "cameras/pairs") s.pairs = payload.pairs ?? [];
    else if (channel === "cameras/active_pair") s.activePair = payload;
    else if (channel.startsWith("camera/") && channel.endsWith("/frame")) {
      const id = payload.camera_id ?? channel.split("/")[1];
      s.cameraStats[id] = payload.stats ?? { fps: 0, latency: 0 };
      s.cameraSeen[id] = now;
      s.frames[id] = payload;
    } else if (channel === "gateway/events") s.events.push(payload);
    for (const listener of this.listeners) listener(s, channel);
  }
}

// An action button shows Cancel while any execution of its action runs.
export function runningExecution(state: StoreState, actionId: string): ExecutionView | null {
  for (const record of Object.values(state.executions)) {
    if (record.action_id === actionId && record.state === "running") return record;
  }
  return null;
}

export function actionButtonLabel(state: StoreState, actionId: string, name: string): string {
  return runningExecution(state, actionId) ? "Cancel" : name;
}

// A camera stream with no frame for this long is stale and dims.
export const STALE_STREAM_S = 2.0;

export function streamStale(state: StoreState, cameraId: string, now: number): boolean {
  const seen = state.cameraSeen[cameraId];
  return seen === undefined || now - seen > STALE_STREAM_S;
}
