// Two primary camera views with fps/latency overlays, the saved-pair
// selector on their left, popout buttons, and the developer-only
// add-camera dialog. Frames are synthetic (a drawing recipe in the
// payload), rendered to canvas.

import type { Connection } from "../connection.js";
import { streamStale, type StoreState } from "../store.js";
import { guarded, showToast } from "./toast.js";

interface Tile {
  root: HTMLElement;
  canvas: HTMLCanvasElement;
  overlay: HTMLElement;
  name: HTMLElement;
  cameraId: string | null;
  frameId: string | null;
}

export function mountCameraArea(
  pairList: HTMLElement,
  grid: HTMLElement,
  connection: Connection,
  canConfigure: () => boolean,
  onAddCamera: () => void,
) {
  const tiles: Tile[] = [makeTile(grid), makeTile(grid)];
  let selected: [string | null, string | null] = [null, null];

  function makeTile(parent: HTMLElement): Tile {
    const root = document.createElement("div");
    root.className = "camera-tile";
    root.innerHTML = `
      <canvas width="320" height="200"></canvas>
      <span class="camera-name"></span>
      <span class="camera-overlay"></span>
      <span class="stale-badge">stale</span>
      <button class="popout-button" title="Open in a separate window">popout</button>
    `;
    parent.appendChild(root);
    const tile: Tile = {
      root,
      canvas: root.querySelector("canvas")!,
      overlay: root.querySelector(".camera-overlay")!,
      name: root.querySelector(".camera-name")!,
      cameraId: null,
      frameId: null,
    };
    root.querySelector(".popout-button")!.addEventListener("click", () => {
      if (tile.frameId) {
        window.open(`${location.pathname}?popout=${tile.frameId}`, "_blank", "width=640,height=420");
      }
    });
    return tile;
  }

  function bindTile(tile: Tile, cameraId: string | null, state: StoreState): void {
    if (tile.cameraId !== cameraId && cameraId) {
      connection.subscribeChannels(channelFor(cameraId, state));
    }
    tile.cameraId = cameraId;
  }

  function channelFor(cameraId: string, state: StoreState): string {
    const camera = state.cameras.find((c: any) => c.id === cameraId);
    return camera?.channel ?? `camera/${cameraId}/frame`;
  }

  return (state: StoreState, now: number) => {
    // default selection: active pair, else the first two cameras
    if (state.activePair) {
      selected = [state.activePair.left, state.activePair.right];
    } else if (!selected[0] && state.cameras.length) {
      selected = [state.cameras[0]?.id ?? null, state.cameras[1]?.id ?? null];
    }
    tiles.forEach((tile, i) => {
      const cameraId = selected[i];
      bindTile(tile, cameraId, state);
      const camera = state.cameras.find((c: any) => c.id === cameraId);
      tile.name.textContent = camera?.name ?? cameraId ?? "-";
      const frameId = camera ? frameKey(camera.channel) : cameraId;
      tile.frameId = frameId;
      const stats = frameId ? state.cameraStats[frameId] : undefined;
      tile.overlay.textContent = stats
        ? `${stats.fps.toFixed(1)} fps / ${(stats.latency * 1000).toFixed(0)} ms`
        : "no data";
      const stale = frameId ? streamStale(state, frameId, now) : true;
      tile.root.classList.toggle("stale", stale);
      if (frameId && state.frames[frameId]) drawFrame(tile.canvas, state.frames[frameId]);
    });

    renderPairList(pairList, state, connection, canConfigure(), onAddCamera);
  };
}

function frameKey(channel: string): string {
  const parts = channel.split("/");
  return parts.length >= 2 ? parts[1] : channel;
}

function renderPairList(
  container: HTMLElement,
  state: StoreState,
  connection: Connection,
  canConfigure: boolean,
  onAddCamera: () => void,
): void {
  container.innerHTML = "<h4 style='margin:0 0 4px;font-size:11px;color:var(--muted)'>PAIRS</h4>";
  for (const pair of state.pairs) {
    const button = document.createElement("button");
    button.textContent = pair.name;
    button.classList.toggle("active", state.activePair?.name === pair.name);
    button.classList.toggle("stale", Boolean(pair.stale));
    button.addEventListener("click", () =>
      guarded(connection.call("cameras/select_pair", { name: pair.name })),
    );
    container.appendChild(button);
  }
  const save = document.createElement("button");
  save.textContent = "+ save pair";
  save.addEventListener("click", () => {
    const name = window.prompt("Pair name?");
    if (!name) return;
    const left = state.activePair?.left ?? state.cameras[0]?.id;
    const right = state.activePair?.right ?? state.cameras[1]?.id;
    if (!left || !right) {
      showToast("need two cameras to save a pair");
      return;
    }
    guarded(connection.call("cameras/save_pair", { name, left, right }));
  });
  container.appendChild(save);
  if (canConfigure) {
    const add = document.createElement("button");
    add.textContent = "+ add camera";
    add.addEventListener("click", onAddCamera);
    container.appendChild(add);
  }
}

// Frames carry a drawing recipe instead of pixels; render it locally.
export function drawFrame(canvas: HTMLCanvasElement, frame: any): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  const phase = frame.pattern?.phase ?? 0;
  const cell = 40;
  for (let y = 0; y < height / cell; y++) {
    for (let x = 0; x < width / cell; x++) {
      const on = (x + y + phase) % 2 === 0;
      ctx.fillStyle = on ? "#2c3440" : "#1a1f27";
      ctx.fillRect(x * cell, y * cell, cell, cell);
    }
  }
  ctx.fillStyle = "#e8eaed";
  ctx.font = "16px monospace";
  ctx.fillText(`#${frame.seq ?? "?"}`, 10, height - 12);
}
