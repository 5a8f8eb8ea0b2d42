// Dashboard bootstrap: one store, one connection, widgets rendering from
// store updates. `?popout=<camera>` renders a single camera view bound to
// the same stream instead of the full dashboard.

import { Connection } from "./connection.js";
import { startGamepadStream } from "./gamepad.js";
import { Store } from "./store.js";
import { themeFor } from "./theme.js";
import { mountBanner } from "./ui/banner.js";
import { drawFrame, mountCameraArea } from "./ui/cameras.js";
import { mountControlPanel } from "./ui/controls.js";
import { openAddActionDialog, openAddCameraDialog } from "./ui/dialogs.js";
import { mountEStopBar } from "./ui/estopbar.js";
import { mountScene } from "./ui/scene.js";
import { mountSensorStrip } from "./ui/sensors.js";
import { mountStatusColumn } from "./ui/status.js";
import { showToast } from "./ui/toast.js";

const CHANNELS = [
  "robot/mode",
  "robot/control_mode",
  "robot/battery",
  "robot/posture",
  "robot/connection",
  "robot/diagnostics",
  "estop/summary",
  "mission/state",
  "actions/list",
  "actions/tree",
  "actions/toggles",
  "actions/executions",
  "settings/updates",
  "cameras/list",
  "cameras/pairs",
  "cameras/active_pair",
  "gateway/events",
];

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const role = new URLSearchParams(location.search).get("role");
  return `${proto}//${location.host}/ws${role ? `?role=${role}` : ""}`;
}

const store = new Store();
const connection = new Connection(wsUrl(), store);

const popout = new URLSearchParams(location.search).get("popout");
if (popout) {
  bootPopout(popout);
} else {
  bootDashboard();
}

function bootDashboard(): void {
  let canConfigure = false;
  const status = mountStatusColumn(document.getElementById("status-column")!, connection);
  const sensors = mountSensorStrip(document.getElementById("sensor-strip")!);
  const cameras = mountCameraArea(
    document.getElementById("pair-list")!,
    document.getElementById("camera-grid")!,
    connection,
    () => canConfigure,
    () => openAddCameraDialog(connection),
  );
  const controls = mountControlPanel(
    document.getElementById("control-panel")!,
    connection,
    () => canConfigure,
    () => openAddActionDialog(connection, store.state),
  );
  const banner = mountBanner(document.getElementById("banner-slot")!);
  const estopBar = mountEStopBar(document.getElementById("estop-bar-slot")!);
  const scene = mountScene(
    document.getElementById("scene-canvas") as HTMLCanvasElement,
    document.getElementById("view-control")!,
    document.getElementById("tool-palette")!,
    connection,
  );

  let frame = 0;
  const render = () => {
    const now = performance.now() / 1000;
    const state = store.state;
    document.documentElement.style.setProperty("--accent", themeFor(state.mode).accent);
    status(state);
    sensors(state);
    cameras(state, now);
    controls(state);
    banner(state);
    estopBar(state);
    scene(state);
    frame = requestAnimationFrame(render);
  };

  connection.onOpen = () => {
    connection.subscribeChannels(...CHANNELS);
    connection
      .call("session/info", {})
      .then((response) => {
        canConfigure = Boolean(response.payload.can_configure);
        document.body.classList.toggle("developer", canConfigure);
      })
      .catch(() => undefined);
  };
  connection.onClose = () => showToast("connection lost, retrying");
  connection.connect();
  startGamepadStream(connection);
  frame = requestAnimationFrame(render);
}

function bootPopout(cameraId: string): void {
  document.body.classList.add("popout");
  document.getElementById("app")!.innerHTML = `
    <div class="camera-tile">
      <canvas width="640" height="400"></canvas>
      <span class="camera-name">${cameraId}</span>
      <span class="camera-overlay"></span>
    </div>`;
  const canvas = document.querySelector("canvas")!;
  const overlay = document.querySelector<HTMLElement>(".camera-overlay")!;
  connection.onOpen = () => {
    connection.subscribeChannels("cameras/list");
    // camera id may map to a custom channel; subscribe to both spellings
    connection.subscribeChannels(`camera/${cameraId}/frame`);
  };
  connection.connect();
  store.subscribe((state, channel) => {
    if (channel.startsWith("camera/")) {
      const frame = state.frames[cameraId];
      if (frame) drawFrame(canvas, frame);
      const stats = state.cameraStats[cameraId];
      if (stats) {
        overlay.textContent = `${stats.fps.toFixed(1)} fps / ${(stats.latency * 1000).toFixed(0)} ms`;
      }
    }
  });
}
