// Criterion: reconnect + snapshot/delta replay reproduces an identical
// rendered store; the four operation modes render the four palette
// colors; action buttons flip to Cancel while running.

import { describe, expect, it } from "vitest";
import type { Envelope } from "../src/protocol.js";
import { Store, actionButtonLabel, emptyState, runningExecution, type StoreState } from "../src/store.js";
import { MODE_THEMES, themeFor } from "../src/theme.js";

function pub(channel: string, payload: any): Envelope {
  return { v: 1, kind: "publish", channel, id: null, stamp_wall: 0, stamp_mono: 0, payload };
}

// What the widgets render from; ephemeral fields (toast log, local frame
// timestamps) are session-local by design.
function rendered(state: StoreState) {
  const { events, cameraSeen, frames, cameraStats, activeTask, ...model } = state;
  return JSON.parse(JSON.stringify(model));
}

function sessionEvents(): Envelope[] {
  return [
    pub("robot/mode", { mode: "teleoperation" }),
    pub("robot/control_mode", { mode: "drive" }),
    pub("actions/list", { actions: [{ id: "led", name: "Toggle LED", kind: "toggle", children: ["a", "b", "c"] }] }),
    pub("actions/tree", { tree: { folder: "root", items: [{ action: "led" }] }, counts: { led: 1 } }),
    pub("actions/executions", { exec_id: "e1", action_id: "led", state: "running", status_text: "", indeterminate: true, started: 1, ended: null, parent: null, children: [] }),
    pub("actions/toggles", { indices: { led: 1 } }),
    pub("actions/executions", { exec_id: "e1", action_id: "led", state: "succeeded", status_text: "done", indeterminate: true, started: 1, ended: 2, parent: null, children: [] }),
    pub("mission/state", { mission_name: "m", phase: "running", current_index: 0, task_labels: ["t0"], results: [null], pending_prompt: null, prompt_options: [], failure: null, last_answer: null }),
    pub("estop/summary", { any_pressed: true, channels: [{ name: "ui", pressed: true, source: "software", last_update: 3 }] }),
    pub("settings/updates", { path: "planner/max_vel_x", alias: "Driving speed", kind: "float", value: 0.5, min: 0, max: 1 }),
    pub("robot/sensor/co2", { name: "co2", value: 1200, unit: "ppm", status: "warning" }),
    pub("robot/mode", { mode: "manipulation" }),
    pub("estop/summary", { any_pressed: false, channels: [{ name: "ui", pressed: false, source: "software", last_update: 4 }] }),
    pub("mission/state", { mission_name: "m", phase: "finished", current_index: 0, task_labels: ["t0"], results: ["succeeded"], pending_prompt: null, prompt_options: [], failure: null, last_answer: null }),
  ];
}

// Per-channel snapshots, exactly the way the gateway replays them on
// subscribe: last retained payload per channel, full execution history.
function snapshotsAt(events: Envelope[]): Envelope[] {
  const latest = new Map<string, Envelope>();
  const executions: Envelope[] = [];
  for (const event of events) {
    if (event.channel === "actions/executions") executions.push(event);
    else latest.set(event.channel, event);
  }
  return [...latest.values(), ...executions];
}

describe("snapshot/delta store", () => {
  it("reconnect replay reproduces the identical rendered store", () => {
    const events = sessionEvents();
    const live = new Store();
    for (const event of events) live.apply(event);

    for (let cut = 0; cut <= events.length; cut++) {
      const reconnected = new Store();
      reconnected.reset();
      for (const snapshot of snapshotsAt(events.slice(0, cut))) reconnected.apply(snapshot);
      for (const delta of events.slice(cut)) reconnected.apply(delta);
      expect(rendered(reconnected.state)).toEqual(rendered(live.state));
    }
  });

  it("reset clears to the empty state", () => {
    const store = new Store();
    store.apply(pub("robot/mode", { mode: "safe" }));
    store.reset();
    expect(rendered(store.state)).toEqual(rendered(emptyState()));
  });

  it("late events after a snapshot win", () => {
    const store = new Store();
    store.apply(pub("robot/mode", { mode: "safe" }));
    store.apply(pub("robot/mode", { mode: "autonomous" }));
    expect(store.state.mode).toBe("autonomous");
  });
});

describe("mode theme", () => {
  it("renders the four specified palette colors", () => {
    expect(themeFor("autonomous").accent).toBe("#0072B2");
    expect(themeFor("teleoperation").accent).toBe("#E69F00");
    expect(themeFor("manipulation").accent).toBe("#D55E00");
    expect(themeFor("safe").accent).toBe("#009E73");
  });

  it("is injective over the four modes", () => {
    const accents = Object.values(MODE_THEMES).map((t) => t.accent);
    expect(new Set(accents).size).toBe(4);
  });

  it("theme switches with mode events, no reload needed", () => {
    const store = new Store();
    const seen: string[] = [];
    for (const mode of ["teleoperation", "manipulation", "autonomous", "safe"]) {
      store.apply(pub("robot/mode", { mode }));
      seen.push(themeFor(store.state.mode).accent);
    }
    expect(seen).toEqual(["#E69F00", "#D55E00", "#0072B2", "#009E73"]);
  });
});

describe("action buttons", () => {
  const record = (state: string) => ({
    exec_id: "e9",
    action_id: "unfold",
    state,
    status_text: "",
    indeterminate: true,
    started: 0,
    ended: state === "running" ? null : 1,
    parent: null,
    children: [],
  });

  it("flips to Cancel while running and back on termination", () => {
    const store = new Store();
    store.apply(pub("actions/executions", record("running")));
    expect(actionButtonLabel(store.state, "unfold", "Unfold Arm")).toBe("Cancel");
    expect(runningExecution(store.state, "unfold")?.exec_id).toBe("e9");
    store.apply(pub("actions/executions", record("succeeded")));
    expect(actionButtonLabel(store.state, "unfold", "Unfold Arm")).toBe("Unfold Arm");
    expect(runningExecution(store.state, "unfold")).toBeNull();
  });

  it("other actions are unaffected", () => {
    const store = new Store();
    store.apply(pub("actions/executions", record("running")));
    expect(actionButtonLabel(store.state, "park", "Park Arm")).toBe("Park Arm");
  });
});
