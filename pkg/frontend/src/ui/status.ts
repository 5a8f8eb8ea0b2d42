// Left status column: operation mode, gamepad control mode (with the R
// badge), diagnostics summary with a detail popup, battery, connection,
// posture side-view, and the software e-stop switch.

import type { Connection } from "../connection.js";
import type { StoreState } from "../store.js";
import { SEVERITY_COLORS, themeFor } from "../theme.js";
import { guarded } from "./toast.js";

export function mountStatusColumn(container: HTMLElement, connection: Connection) {
  container.innerHTML = `
    <span class="mode-badge" id="mode-badge">...</span>
    <div class="status-block">
      <h4>Gamepad</h4>
      <div class="control-mode-badge">
        <span id="control-mode">-</span>
        <span class="r-badge" id="r-badge">R</span>
      </div>
    </div>
    <div class="status-block">
      <h4>Diagnostics</h4>
      <details id="diag-details">
        <summary><span class="chip" id="diag-chip">OK</span></summary>
        <ul id="diag-list" style="padding-left:16px; margin:4px 0"></ul>
      </details>
    </div>
    <div class="status-block">
      <h4>Battery</h4>
      <div class="bar"><div id="battery-bar" style="width:100%"></div></div>
      <small id="battery-text" class="muted"></small>
    </div>
    <div class="status-block">
      <h4>Connection</h4>
      <div id="connection-text">-</div>
    </div>
    <div class="status-block">
      <h4>Robot State</h4>
      <canvas id="posture-canvas" width="200" height="90"></canvas>
    </div>
    <button id="estop-switch">UI E-STOP</button>
  `;
  const modeBadge = container.querySelector<HTMLElement>("#mode-badge")!;
  const controlMode = container.querySelector<HTMLElement>("#control-mode")!;
  const rBadge = container.querySelector<HTMLElement>("#r-badge")!;
  const diagChip = container.querySelector<HTMLElement>("#diag-chip")!;
  const diagList = container.querySelector<HTMLElement>("#diag-list")!;
  const batteryBar = container.querySelector<HTMLElement>("#battery-bar")!;
  const batteryText = container.querySelector<HTMLElement>("#battery-text")!;
  const connectionText = container.querySelector<HTMLElement>("#connection-text")!;
  const postureCanvas = container.querySelector<HTMLCanvasElement>("#posture-canvas")!;
  const estopSwitch = container.querySelector<HTMLButtonElement>("#estop-switch")!;

  estopSwitch.addEventListener("click", () => {
    const engaged = estopSwitch.classList.contains("engaged");
    guarded(connection.call(engaged ? "estop/release" : "estop/trigger", {}));
  });

  return (state: StoreState) => {
    const theme = themeFor(state.mode);
    modeBadge.textContent = theme.label;
    controlMode.textContent =
      state.controlMode === "manipulation" ? "Manipulation" : "Drive";
    rBadge.classList.toggle("visible", state.controlMode === "drive_reversed");

    const aggregate = state.diagnostics.aggregate ?? "OK";
    diagChip.textContent = aggregate;
    diagChip.style.background = SEVERITY_COLORS[aggregate] ?? SEVERITY_COLORS.OK;
    diagList.innerHTML = "";
    for (const item of state.diagnostics.items ?? []) {
      const li = document.createElement("li");
      li.textContent = `${item.name}: ${item.level}${item.message ? " - " + item.message : ""}`;
      li.style.color = SEVERITY_COLORS[item.level] ?? "inherit";
      diagList.appendChild(li);
    }

    const pct = state.battery.percentage ?? 0;
    batteryBar.style.width = `${Math.round(pct * 100)}%`;
    batteryText.textContent = `${(pct * 100).toFixed(0)} % / ${(state.battery.voltage ?? 0).toFixed(1)} V`;

    const conn = state.connection;
    const alive = conn.alive ? "link up" : "LINK DOWN";
    connectionText.textContent = `${alive} | rtt ${(1000 * (conn.rtt ?? 0)).toFixed(0)} ms | loss ${(100 * (conn.loss_fraction ?? 0)).toFixed(0)} %`;
    connectionText.style.color = conn.alive ? "inherit" : SEVERITY_COLORS.ERROR;

    const anyPressed = state.estop.any_pressed;
    estopSwitch.classList.toggle(
      "engaged",
      (state.estop.channels ?? []).some((c: any) => c.name === "ui" && c.pressed),
    );
    estopSwitch.textContent = estopSwitch.classList.contains("engaged")
      ? "RELEASE E-STOP"
      : anyPressed
        ? "UI E-STOP (other pressed)"
        : "UI E-STOP";

    drawPosture(postureCanvas, state);
  };
}

function drawPosture(canvas: HTMLCanvasElement, state: StoreState): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const pitch = state.posture.pitch ?? 0;
  const flippers = state.posture.flippers ?? [0, 0, 0, 0];
  ctx.save();
  ctx.translate(width / 2, height / 2 + 8);
  ctx.rotate(-pitch);
  // body
  ctx.fillStyle = "#5a6472";
  ctx.fillRect(-40, -10, 80, 16);
  // flipper side view: front pair to the right, rear pair to the left
  ctx.strokeStyle = "#9aa3ad";
  ctx.lineWidth = 5;
  const pairs: Array<[number, number]> = [
    [40, flippers[0]],
    [-40, flippers[2]],
  ];
  for (const [x, angle] of pairs) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    const sign = x > 0 ? 1 : -1;
    ctx.lineTo(x + sign * 26 * Math.cos(angle), -26 * Math.sin(angle));
    ctx.stroke();
  }
  ctx.restore();
  ctx.fillStyle = "#9aa3ad";
  ctx.font = "10px monospace";
  const roll = ((state.posture.roll ?? 0) * 180) / Math.PI;
  const pitchDeg = (pitch * 180) / Math.PI;
  ctx.fillText(`roll ${roll.toFixed(0)}°  pitch ${pitchDeg.toFixed(0)}°`, 6, 12);
}
