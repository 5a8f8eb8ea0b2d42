// Active-task banner: slides in from the top when an execution starts,
// shows status text and an indeterminate progress bar while running, and
// flips to the outcome color (green/orange/red) on termination.

import type { ExecutionView, StoreState } from "../store.js";
import { OUTCOME_COLORS } from "../theme.js";

const LINGER_MS = 3000;

export function mountBanner(container: HTMLElement) {
  container.innerHTML = `
    <div class="banner" id="task-banner">
      <div><strong id="banner-title"></strong> <span id="banner-status"></span></div>
      <div class="progress"><div></div></div>
    </div>
  `;
  const banner = container.querySelector<HTMLElement>("#task-banner")!;
  const title = container.querySelector<HTMLElement>("#banner-title")!;
  const status = container.querySelector<HTMLElement>("#banner-status")!;
  let shownFor: string | null = null;
  let hideTimer: number | undefined;

  return (state: StoreState) => {
    const task = relevantTask(state);
    if (!task) return;
    const actionName =
      state.actions.find((a: any) => a.id === task.action_id)?.name ?? task.action_id;
    title.textContent = actionName;
    status.textContent = task.status_text || task.state;
    banner.style.borderLeftColor = OUTCOME_COLORS[task.state] ?? OUTCOME_COLORS.running;
    banner.classList.toggle("terminal", task.state !== "running");
    if (task.exec_id !== shownFor || task.state === "running") {
      shownFor = task.exec_id;
      banner.classList.add("shown");
      window.clearTimeout(hideTimer);
    }
    if (task.state !== "running") {
      window.clearTimeout(hideTimer);
      hideTimer = window.setTimeout(() => banner.classList.remove("shown"), LINGER_MS);
    }
  };
}

function relevantTask(state: StoreState): ExecutionView | null {
  // top-level executions only; children report through their parent
  const task = state.activeTask;
  if (task && task.parent === null) return task;
  if (!task) return null;
  let cursor: ExecutionView | undefined = task;
  while (cursor && cursor.parent !== null) cursor = state.executions[cursor.parent];
  return cursor ?? null;
}
