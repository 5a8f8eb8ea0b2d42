// Synthetic top-down scene view with the virtual-camera controls: four
// preset-direction buttons around a robot glyph, projection toggle, lock
// toggle, and the tool palette (interact / waypoint / look-at). The scene
// draws sim ground truth from the posture channel: grid, a doorway, the
// robot footprint with flippers, and tool markers.

import type { Connection } from "../connection.js";
import type { StoreState } from "../store.js";
import {
  engageLock,
  initialView,
  manualMove,
  presetPose,
  releaseLock,
  stepFollow,
  toggleProjection,
  type PresetDirection,
  type ViewState,
} from "../viewcam.js";

type Tool = "interact" | "waypoint" | "lookat";

export function mountScene(
  canvas: HTMLCanvasElement,
  viewControl: HTMLElement,
  toolPalette: HTMLElement,
  connection: Connection,
) {
  let view: ViewState = restoreView() ?? initialView();
  let tool: Tool = "interact";
  let persistDue = 0;
  let lastWaypoint: [number, number] | null = null;
  let lastLookAt: { point: number[]; direction: number[] } | null = null;
  let lookAtAnchor: [number, number] | null = null;
  let lastTick = performance.now() / 1000;

  viewControl.innerHTML = `
    <span></span><button data-dir="front" title="view from the front">F</button><span></span>
    <button data-dir="left" title="view from the left">L</button>
    <div class="robot-icon">&#9652;</div>
    <button data-dir="right" title="view from the right">R</button>
    <button id="projection-toggle" title="perspective / top-down">2D</button>
    <button data-dir="back" title="view from behind">B</button>
    <button id="lock-toggle" title="lock the camera to the robot">&#128274;</button>
  `;
  toolPalette.innerHTML = `
    <button data-tool="interact" class="active">interact</button>
    <button data-tool="waypoint">waypoint</button>
    <button data-tool="lookat">look at</button>
  `;

  let robot = { x: 0, y: 0, yaw: 0 };

  viewControl.querySelectorAll<HTMLButtonElement>("button[data-dir]").forEach((button) => {
    button.addEventListener("click", () => {
      const pose = presetPose(button.dataset.dir as PresetDirection, robot);
      view = manualMove(view, pose);
      if (view.locked) view = engageLock({ ...view, pose }, [robot.x, robot.y, 0]);
    });
  });
  const projectionToggle = viewControl.querySelector<HTMLButtonElement>("#projection-toggle")!;
  projectionToggle.addEventListener("click", () => {
    view = toggleProjection(view, robot.yaw);
  });
  const lockToggle = viewControl.querySelector<HTMLButtonElement>("#lock-toggle")!;
  lockToggle.addEventListener("click", () => {
    view = view.locked ? releaseLock(view) : engageLock(view, [robot.x, robot.y, 0]);
  });
  toolPalette.querySelectorAll<HTMLButtonElement>("button[data-tool]").forEach((button) => {
    button.addEventListener("click", () => {
      tool = button.dataset.tool as Tool;
      toolPalette.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
    });
  });

  // screen <-> world: ortho top-down; screen-up follows the view's up
  // vector, zoom from the eye height.
  function transform() {
    const zoom = Math.max(20, 600 / Math.max(1, distance()));
    const up = view.projection === "ortho_top_down" ? view.pose.up : groundUp();
    const angle = Math.atan2(up[1], up[0]) - Math.PI / 2;
    return { zoom, angle };
  }

  function distance(): number {
    const dx = view.pose.eye[0] - view.pose.focus[0];
    const dy = view.pose.eye[1] - view.pose.focus[1];
    const dz = view.pose.eye[2] - view.pose.focus[2];
    return Math.hypot(dx, dy, dz);
  }

  function groundUp(): [number, number, number] {
    const dx = view.pose.focus[0] - view.pose.eye[0];
    const dy = view.pose.focus[1] - view.pose.eye[1];
    const n = Math.hypot(dx, dy) || 1;
    return [dx / n, dy / n, 0];
  }

  function worldToScreen(wx: number, wy: number): [number, number] {
    const { zoom, angle } = transform();
    const cx = canvas.width / 2;
    const cy = canvas.height / 2;
    const dx = wx - view.pose.focus[0];
    const dy = wy - view.pose.focus[1];
    const rx = dx * Math.cos(-angle) - dy * Math.sin(-angle);
    const ry = dx * Math.sin(-angle) + dy * Math.cos(-angle);
    return [cx + rx * zoom, cy - ry * zoom];
  }

  function screenToWorld(sx: number, sy: number): [number, number] {
    const { zoom, angle } = transform();
    const cx = canvas.width / 2;
    const cy = canvas.height / 2;
    const rx = (sx - cx) / zoom;
    const ry = -(sy - cy) / zoom;
    const dx = rx * Math.cos(angle) - ry * Math.sin(angle);
    const dy = rx * Math.sin(angle) + ry * Math.cos(angle);
    return [view.pose.focus[0] + dx, view.pose.focus[1] + dy];
  }

  // interact tool: drag pans (translation unlocks), wheel zooms
  let dragging: { sx: number; sy: number } | null = null;
  canvas.addEventListener("mousedown", (event) => {
    const [wx, wy] = screenToWorld(event.offsetX, event.offsetY);
    if (tool === "interact") {
      dragging = { sx: event.offsetX, sy: event.offsetY };
    } else if (tool === "waypoint") {
      lastWaypoint = [wx, wy];
      connection.publish("tool/waypoint", { x: wx, y: wy, z: 0.0 });
    } else if (tool === "lookat") {
      lookAtAnchor = [wx, wy];
    }
  });
  canvas.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    const [ax, ay] = screenToWorld(dragging.sx, dragging.sy);
    const [bx, by] = screenToWorld(event.offsetX, event.offsetY);
    dragging = { sx: event.offsetX, sy: event.offsetY };
    const pose = {
      eye: [view.pose.eye[0] - (bx - ax), view.pose.eye[1] - (by - ay), view.pose.eye[2]] as [number, number, number],
      focus: [view.pose.focus[0] - (bx - ax), view.pose.focus[1] - (by - ay), view.pose.focus[2]] as [number, number, number],
      up: view.pose.up,
    };
    view = manualMove(view, pose); // translation: automatically unlocks
  });
  window.addEventListener("mouseup", (event) => {
    if (lookAtAnchor && tool === "lookat") {
      const rect = canvas.getBoundingClientRect();
      const [wx, wy] = screenToWorld(event.clientX - rect.left, event.clientY - rect.top);
      const dx = lookAtAnchor[0] - wx;
      const dy = lookAtAnchor[1] - wy;
      const n = Math.hypot(dx, dy);
      const direction = n > 1e-6 ? [dx / n, dy / n, 0.0] : [1.0, 0.0, 0.0];
      lastLookAt = { point: [lookAtAnchor[0], lookAtAnchor[1], 0.4], direction };
      connection.publish("tool/lookat", { point: lastLookAt.point, direction, standoff: 0.3 });
      lookAtAnchor = null;
    }
    dragging = null;
  });
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY > 0 ? 1.15 : 1 / 1.15;
    const pose = {
      eye: [
        view.pose.focus[0] + (view.pose.eye[0] - view.pose.focus[0]) * factor,
        view.pose.focus[1] + (view.pose.eye[1] - view.pose.focus[1]) * factor,
        view.pose.focus[2] + (view.pose.eye[2] - view.pose.focus[2]) * factor,
      ] as [number, number, number],
      focus: view.pose.focus,
      up: view.pose.up,
    };
    view = manualMove(view, pose);
  });

  return (state: StoreState) => {
    const now = performance.now() / 1000;
    const dt = Math.min(now - lastTick, 0.1);
    lastTick = now;
    robot = {
      x: state.posture.x ?? 0,
      y: state.posture.y ?? 0,
      yaw: state.posture.yaw ?? 0,
    };
    if (view.locked) view = stepFollow(view, [robot.x, robot.y, 0], dt);
    projectionToggle.classList.toggle("toggled", view.projection === "ortho_top_down");
    lockToggle.classList.toggle("toggled", view.locked);
    if (now >= persistDue) {
      persistDue = now + 1.0;
      persistView(view);
    }
    draw(state);
  };

  function draw(state: StoreState): void {
    const parent = canvas.parentElement!;
    if (canvas.width !== parent.clientWidth || canvas.height !== parent.clientHeight) {
      canvas.width = parent.clientWidth;
      canvas.height = parent.clientHeight;
    }
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const { zoom } = transform();

    // metric grid
    ctx.strokeStyle = "#1c222b";
    ctx.lineWidth = 1;
    const span = Math.ceil(canvas.width / zoom / 2) + 2;
    const fx = Math.round(view.pose.focus[0]);
    const fy = Math.round(view.pose.focus[1]);
    for (let gx = fx - span; gx <= fx + span; gx++) {
      line(ctx, worldToScreen(gx, fy - span), worldToScreen(gx, fy + span));
    }
    for (let gy = fy - span; gy <= fy + span; gy++) {
      line(ctx, worldToScreen(fx - span, gy), worldToScreen(fx + span, gy));
    }

    // doorway at x = 1.5 m: two wall segments with a 0.9 m gap
    ctx.strokeStyle = "#4a5568";
    ctx.lineWidth = 4;
    line(ctx, worldToScreen(1.5, -3.0), worldToScreen(1.5, -0.45));
    line(ctx, worldToScreen(1.5, 0.45), worldToScreen(1.5, 3.0));

    // tool markers
    if (lastWaypoint) {
      marker(ctx, worldToScreen(lastWaypoint[0], lastWaypoint[1]), "#0072B2", "wp");
    }
    if (lastLookAt) {
      marker(ctx, worldToScreen(lastLookAt.point[0], lastLookAt.point[1]), "#009E73", "look");
    }

    // robot footprint + heading + flipper stubs
    const [rx, ry] = worldToScreen(robot.x, robot.y);
    const { angle } = transform();
    ctx.save();
    ctx.translate(rx, ry);
    ctx.rotate(-(robot.yaw + angle) + Math.PI / 2);
    const w = 0.5 * zoom;
    const l = 0.7 * zoom;
    ctx.fillStyle = getComputedStyle(document.body).getPropertyValue("--accent") || "#E69F00";
    ctx.fillRect(-w / 2, -l / 2, w, l);
    ctx.fillStyle = "#10131a";
    ctx.beginPath();
    ctx.moveTo(0, -l / 2);
    ctx.lineTo(-w / 4, -l / 8);
    ctx.lineTo(w / 4, -l / 8);
    ctx.closePath();
    ctx.fill();
    const flippers = state.posture.flippers ?? [0, 0, 0, 0];
    ctx.strokeStyle = "#9aa3ad";
    ctx.lineWidth = 3;
    const stubs: Array<[number, number, number]> = [
      [-w / 2, -l / 2, flippers[0]],
      [w / 2, -l / 2, flippers[1]],
      [-w / 2, l / 2, flippers[2]],
      [w / 2, l / 2, flippers[3]],
    ];
    for (const [sx, sy, angleStub] of stubs) {
      const len = 0.25 * zoom * Math.max(0.25, Math.cos(angleStub));
      ctx.beginPath();
      ctx.moveTo(sx, sy);
      ctx.lineTo(sx, sy + (sy < 0 ? -len : len));
      ctx.stroke();
    }
    ctx.restore();
  }

  function line(ctx: CanvasRenderingContext2D, a: [number, number], b: [number, number]): void {
    ctx.beginPath();
    ctx.moveTo(a[0], a[1]);
    ctx.lineTo(b[0], b[1]);
    ctx.stroke();
  }

  function marker(
    ctx: CanvasRenderingContext2D,
    at: [number, number],
    color: string,
    label: string,
  ): void {
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(at[0], at[1], 6, 0, Math.PI * 2);
    ctx.fill();
    ctx.font = "10px monospace";
    ctx.fillText(label, at[0] + 8, at[1] + 3);
  }
}

// View state survives reloads per client (browser) profile.
const VIEW_KEY = "opconsole.view";

function persistView(view: ViewState): void {
  try {
    localStorage.setItem(VIEW_KEY, JSON.stringify(view));
  } catch {
    // storage unavailable (private mode); session-only view state is fine
  }
}

function restoreView(): ViewState | null {
  try {
    const raw = localStorage.getItem(VIEW_KEY);
    if (!raw) return null;
    const view = JSON.parse(raw) as ViewState;
    return view.pose ? view : null;
  } catch {
    return null;
  }
}
