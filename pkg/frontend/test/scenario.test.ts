// Operator scenario against the real console + embedded simulator: drive
// through the doorway, switch to manipulation (theme change), run the
// look-at action, trigger and release the UI e-stop, and check mission
// stop/reset semantics. The driver speaks the same protocol and store the
// dashboard uses.

import { spawn, type ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import { resolve } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { Store } from "../src/store.js";
import { themeFor } from "../src/theme.js";

const PORT = 18930 + Math.floor(Math.random() * 400);
const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "../..");

const CHANNELS = [
  "robot/mode",
  "robot/control_mode",
  "robot/posture",
  "robot/connection",
  "robot/diagnostics",
  "estop/summary",
  "mission/state",
  "actions/list",
  "actions/toggles",
  "actions/executions",
];

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

class Driver {
  store = new Store();
  private ws!: WebSocket;
  private seq = 0;
  private pending = new Map<string, { resolve: (p: any) => void; reject: (e: Error) => void }>();

  async connect(url: string): Promise<void> {
    this.ws = new WebSocket(url);
    await new Promise<void>((resolveOpen, rejectOpen) => {
      this.ws.once("open", () => resolveOpen());
      this.ws.once("error", rejectOpen);
    });
    this.ws.on("message", (data) => {
      const envelope = JSON.parse(data.toString());
      if ((envelope.kind === "service_response" || envelope.kind === "error") && envelope.id) {
        const waiter = this.pending.get(envelope.id);
        if (waiter) {
          this.pending.delete(envelope.id);
          if (envelope.kind === "error") {
            waiter.reject(new Error(envelope.payload?.message ?? envelope.payload?.error));
          } else {
            waiter.resolve(envelope.payload);
          }
          return;
        }
      }
      this.store.apply(envelope, Date.now() / 1000);
    });
  }

  private send(doc: object): void {
    this.ws.send(JSON.stringify({ stamp_wall: Date.now() / 1000, stamp_mono: 0, id: null, payload: null, ...doc, v: 1 }));
  }

  subscribe(...channels: string[]): void {
    for (const channel of channels) this.send({ kind: "subscribe", channel });
  }

  publish(channel: string, payload: any): void {
    this.send({ kind: "publish", channel, payload });
  }

  call(channel: string, payload: any = {}): Promise<any> {
    const id = `drv${++this.seq}`;
    const promise = new Promise<any>((resolveCall, rejectCall) => {
      this.pending.set(id, { resolve: resolveCall, reject: rejectCall });
      setTimeout(() => {
        if (this.pending.delete(id)) rejectCall(new Error(`${channel} timed out`));
      }, 10_000);
    });
    this.send({ kind: "service_request", channel, payload, id });
    return promise;
  }

  async waitFor(what: string, predicate: () => boolean, timeoutMs = 10_000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
      if (predicate()) return;
      await sleep(50);
    }
    throw new Error(`timed out waiting for ${what}`);
  }

  async drive(seconds: number, forward = 1.0): Promise<void> {
    const frames = Math.round(seconds * 30);
    for (let i = 0; i < frames; i++) {
      this.publish("input/gamepad", {
        left: [0.0, forward],
        right: [0.0, 0.0],
        triggers: [0.0, 0.0],
        buttons: {},
      });
      await sleep(1000 / 30);
    }
  }

  close(): void {
    this.ws?.close();
  }
}

let server: ChildProcess;
let serverLog = "";
const driver = new Driver();

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "opconsole.cli", "serve", "--config", "profiles/demo.json", "--listen", `127.0.0.1:${PORT}`],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (d) => (serverLog += d));
  server.stderr?.on("data", (d) => (serverLog += d));
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await fetch(`http://127.0.0.1:${PORT}/`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`console server never came up\n${serverLog}`);
    await sleep(200);
  }
  await driver.connect(`ws://127.0.0.1:${PORT}/ws`);
  driver.subscribe(...CHANNELS);
  await driver.waitFor("robot link", () => driver.store.state.connection.alive === true, 15_000);
});

afterAll(async () => {
  driver.close();
  server?.kill("SIGTERM");
  await sleep(300);
  server?.kill("SIGKILL");
});

describe("operator scenario", () => {
  it("starts in teleoperation with the orange theme", async () => {
    await driver.waitFor("mode", () => driver.store.state.mode === "teleoperation");
    expect(themeFor(driver.store.state.mode).accent).toBe("#E69F00");
  });

  it("drives the robot through the doorway", async () => {
    await driver.waitFor("posture", () => driver.store.state.posture.x !== undefined);
    await driver.drive(2.5);
    await sleep(300);
    expect(driver.store.state.posture.x ?? 0).toBeGreaterThan(1.5); // doorway is at 1.5 m
  });

  it("switches to manipulation mode and the theme follows", async () => {
    await driver.call("robot/set_mode", { mode: "manipulation" });
    await driver.waitFor("mode change", () => driver.store.state.mode === "manipulation");
    expect(themeFor(driver.store.state.mode).accent).toBe("#D55E00"); // vermillion
  });

  it("runs the look-at action via the 3D tool input", async () => {
    const x = driver.store.state.posture.x ?? 0;
    const y = driver.store.state.posture.y ?? 0;
    driver.publish("tool/lookat", { point: [x + 0.5, y, 0.5], direction: [1.0, 0.0, 0.0], standoff: 0.3 });
    await sleep(200);
    const response = await driver.call("actions/execute", { action_id: "look_at" });
    const execId = response.exec_id as string;
    await driver.waitFor(
      "look-at completion",
      () => driver.store.state.executions[execId]?.state === "succeeded",
    );
  });

  it("UI e-stop latches, freezes motion, and releases", async () => {
    await driver.call("estop/trigger");
    await driver.waitFor("estop pressed", () => driver.store.state.estop.any_pressed === true);
    await sleep(400); // let any in-flight motion settle and posture refresh
    const frozenX = driver.store.state.posture.x ?? 0;
    await driver.drive(0.7);
    await sleep(300);
    expect(Math.abs((driver.store.state.posture.x ?? 0) - frozenX)).toBeLessThan(0.02);
    // no ack warning on a healthy link
    const names = (driver.store.state.diagnostics.items ?? []).map((i: any) => i.name);
    expect(names).not.toContain("console/estop_link");

    await driver.call("estop/release");
    await driver.waitFor("estop released", () => driver.store.state.estop.any_pressed === false);
    const x0 = driver.store.state.posture.x ?? 0;
    await driver.drive(0.6);
    await sleep(300);
    expect(driver.store.state.posture.x ?? 0).toBeGreaterThan(x0 + 0.2); // motion restored
  });

  it("mission start/busy/stop matches the state machine", async () => {
    const x = driver.store.state.posture.x ?? 0;
    driver.publish("tool/waypoint", { x: x + 3.0, y: 0.0 });
    await sleep(200);
    await driver.call("mission/load", {
      mission: { name: "scenario", tasks: [{ label: "long drive", action_id: "drive_to" }] },
    });
    await driver.call("mission/start");
    await driver.waitFor("running", () => driver.store.state.mission.phase === "running");
    await expect(driver.call("mission/start")).rejects.toThrow(/already active/);
    await driver.call("mission/control", { cmd: "stop" });
    await driver.waitFor("idle", () => driver.store.state.mission.phase === "idle");
    expect(driver.store.state.mission.current_index).toBe(0);
    expect(driver.store.state.mission.results).toEqual([null]);
  });

  it("a second console instance converges to the same shared state", async () => {
    const second = new Driver();
    await second.connect(`ws://127.0.0.1:${PORT}/ws`);
    second.subscribe(...CHANNELS);
    await second.waitFor("snapshot", () => second.store.state.mission.phase !== undefined, 10_000);
    await sleep(700);
    const shared = (s: Store) => ({
      mode: s.state.mode,
      toggles: s.state.toggles,
      mission: s.state.mission,
      estop: s.state.estop.any_pressed,
    });
    expect(shared(second.store)).toEqual(shared(driver.store));
    second.close();
  });
});
