// The control panel: Mission | Actions | Settings tabs. Actions is the
// default tab on application start. Action buttons flip to Cancel while
// their action runs; the structure view supports drag and drop from the
// alphabetical all-actions list; settings render range-appropriate
// editors under their display alias.

import type { Connection } from "../connection.js";
import { runningExecution, type StoreState } from "../store.js";
import { guarded } from "./toast.js";

export function mountControlPanel(
  container: HTMLElement,
  connection: Connection,
  canConfigure: () => boolean,
  onAddAction: () => void,
) {
  container.innerHTML = `
    <div class="tab-strip">
      <button data-tab="mission">Mission</button>
      <button data-tab="actions" class="active">Actions</button>
      <button data-tab="settings">Settings</button>
    </div>
    <div class="tab-body" id="tab-mission" style="display:none"></div>
    <div class="tab-body" id="tab-actions"></div>
    <div class="tab-body" id="tab-settings" style="display:none"></div>
  `;
  let active = "actions";
  const bodies: Record<string, HTMLElement> = {
    mission: container.querySelector("#tab-mission")!,
    actions: container.querySelector("#tab-actions")!,
    settings: container.querySelector("#tab-settings")!,
  };
  container.querySelectorAll<HTMLButtonElement>(".tab-strip button").forEach((button) => {
    button.addEventListener("click", () => {
      active = button.dataset.tab!;
      container.querySelectorAll(".tab-strip button").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      for (const [name, body] of Object.entries(bodies)) {
        body.style.display = name === active ? "block" : "none";
      }
    });
  });

  const missionView = mountMissionTab(bodies.mission, connection);
  const actionsView = mountActionsTab(bodies.actions, connection, canConfigure, onAddAction);
  const settingsView = mountSettingsTab(bodies.settings, connection);

  return (state: StoreState) => {
    missionView(state);
    actionsView(state);
    settingsView(state);
  };
}

// -- Mission tab ---------------------------------------------------------------

function mountMissionTab(container: HTMLElement, connection: Connection) {
  container.innerHTML = `
    <div class="mission-phase" id="mission-phase">no mission loaded</div>
    <ul class="task-list" id="task-list"></ul>
    <div class="mission-controls">
      <button data-cmd="back" title="Go back to the previous task">Back</button>
      <button data-cmd="pause_resume" id="pause-button">Pause</button>
      <button data-cmd="stop" title="Stop mission (resets state)">Stop</button>
      <button data-cmd="skip" title="Skip current task">Skip</button>
    </div>
    <div id="confirm-box" style="display:none; margin-top:10px">
      <strong id="confirm-prompt"></strong>
      <div id="confirm-options" style="display:flex; gap:6px; margin-top:6px"></div>
    </div>
    <details style="margin-top:10px">
      <summary>Load mission</summary>
      <textarea class="mission-doc" id="mission-doc">{"name": "demo", "tasks": [{"label": "Unfold arm", "action_id": "unfold"}]}</textarea>
      <button class="basic-button" id="load-mission">Load</button>
      <button class="basic-button" id="start-mission">Start</button>
    </details>
  `;
  container.querySelectorAll<HTMLButtonElement>(".mission-controls button").forEach((button) => {
    button.addEventListener("click", () =>
      guarded(connection.call("mission/control", { cmd: button.dataset.cmd })),
    );
  });
  container.querySelector("#load-mission")!.addEventListener("click", () => {
    try {
      const doc = JSON.parse((container.querySelector("#mission-doc") as HTMLTextAreaElement).value);
      guarded(connection.call("mission/load", { mission: doc }));
    } catch (err) {
      guarded(Promise.reject(err));
    }
  });
  container.querySelector("#start-mission")!.addEventListener("click", () =>
    guarded(connection.call("mission/start", {})),
  );

  const phaseText = container.querySelector<HTMLElement>("#mission-phase")!;
  const taskList = container.querySelector<HTMLElement>("#task-list")!;
  const pauseButton = container.querySelector<HTMLElement>("#pause-button")!;
  const confirmBox = container.querySelector<HTMLElement>("#confirm-box")!;
  const confirmPrompt = container.querySelector<HTMLElement>("#confirm-prompt")!;
  const confirmOptions = container.querySelector<HTMLElement>("#confirm-options")!;

  return (state: StoreState) => {
    const mission = state.mission;
    const phase = mission.phase ?? "idle";
    phaseText.textContent = mission.mission_name
      ? `${mission.mission_name}: ${phase}${mission.failure ? " - " + mission.failure : ""}`
      : "no mission loaded";
    pauseButton.textContent = phase === "paused" ? "Resume" : "Pause";
    taskList.innerHTML = "";
    const labels: string[] = mission.task_labels ?? [];
    labels.forEach((label, i) => {
      const li = document.createElement("li");
      li.classList.toggle("current", i === mission.current_index && phase !== "idle");
      const result = (mission.results ?? [])[i];
      li.innerHTML = `<span>${label}</span><span class="task-result">${result ?? ""}</span>`;
      taskList.appendChild(li);
    });
    const waiting = phase === "awaiting_confirmation";
    confirmBox.style.display = waiting ? "block" : "none";
    if (waiting) {
      confirmPrompt.textContent = mission.pending_prompt ?? "";
      confirmOptions.innerHTML = "";
      for (const option of mission.prompt_options ?? []) {
        const button = document.createElement("button");
        button.className = "basic-button";
        button.textContent = option;
        button.addEventListener("click", () =>
          guarded(connection.call("mission/confirm", { option })),
        );
        confirmOptions.appendChild(button);
      }
    }
  };
}

// -- Actions tab ----------------------------------------------------------------

function mountActionsTab(
  container: HTMLElement,
  connection: Connection,
  canConfigure: () => boolean,
  onAddAction: () => void,
) {
  container.innerHTML = `
    <div id="structure-view"></div>
    <div class="all-actions">
      <button class="basic-button" id="toggle-all-actions">All actions</button>
      <button class="basic-button" id="add-action" style="display:none">+ new action</button>
      <ul id="all-actions-list" style="display:none; margin:6px 0; padding:0; list-style:none"></ul>
    </div>
  `;
  const structure = container.querySelector<HTMLElement>("#structure-view")!;
  const listToggle = container.querySelector<HTMLElement>("#toggle-all-actions")!;
  const list = container.querySelector<HTMLElement>("#all-actions-list")!;
  const addButton = container.querySelector<HTMLElement>("#add-action")!;
  listToggle.addEventListener("click", () => {
    list.style.display = list.style.display === "none" ? "block" : "none";
  });
  addButton.addEventListener("click", onAddAction);

  function execute(actionId: string, state: StoreState): void {
    const running = runningExecution(state, actionId);
    if (running) {
      guarded(connection.call("actions/cancel", { exec_id: running.exec_id }));
    } else {
      guarded(connection.call("actions/execute", { action_id: actionId }));
    }
  }

  function renderNode(node: any, path: number[], state: StoreState): HTMLElement {
    if (node.action !== undefined) {
      const spec = state.actions.find((a: any) => a.id === node.action);
      const row = document.createElement("div");
      row.className = "action-row";
      row.draggable = true;
      row.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/node-path", JSON.stringify(path));
      });
      const button = document.createElement("button");
      button.className = "action-button";
      const running = runningExecution(state, node.action);
      button.classList.toggle("running", Boolean(running));
      button.textContent = running ? "Cancel" : (spec?.name ?? node.action);
      button.addEventListener("click", () => execute(node.action, state));
      row.appendChild(button);
      if (spec?.kind === "toggle") {
        const index = state.toggles[node.action] ?? 0;
        const badge = document.createElement("span");
        badge.className = "toggle-index";
        badge.textContent = `${index + 1}/${spec.children?.length ?? "?"}`;
        row.appendChild(badge);
      }
      return row;
    }
    const details = document.createElement("details");
    details.className = "folder drop-target";
    details.open = true;
    const summary = document.createElement("summary");
    summary.textContent = node.folder;
    details.appendChild(summary);
    details.addEventListener("dragover", (event) => {
      event.preventDefault();
      details.classList.add("drag-over");
    });
    details.addEventListener("dragleave", () => details.classList.remove("drag-over"));
    details.addEventListener("drop", (event) => {
      event.preventDefault();
      event.stopPropagation();
      details.classList.remove("drag-over");
      const actionId = event.dataTransfer?.getData("text/action-id");
      const nodePath = event.dataTransfer?.getData("text/node-path");
      if (actionId) {
        guarded(connection.call("actions/insert", { folder: path, position: 0, action_id: actionId }));
      } else if (nodePath) {
        guarded(connection.call("actions/move_node", { path: JSON.parse(nodePath), dest: path, position: 0 }));
      }
    });
    (node.items ?? []).forEach((item: any, i: number) => {
      details.appendChild(renderNode(item, [...path, i], state));
    });
    return details;
  }

  return (state: StoreState) => {
    structure.innerHTML = "";
    if (state.tree.tree) structure.appendChild(renderNode(state.tree.tree, [], state));
    addButton.style.display = canConfigure() ? "inline-block" : "none";
    list.innerHTML = "";
    for (const spec of state.actions) {
      const li = document.createElement("li");
      li.textContent = spec.name;
      li.draggable = true;
      li.title = "drag into a folder, or click to run";
      li.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/action-id", spec.id);
      });
      li.addEventListener("click", () => execute(spec.id, state));
      list.appendChild(li);
    }
  };
}

// -- Settings tab -----------------------------------------------------------------

function mountSettingsTab(container: HTMLElement, connection: Connection) {
  const rows = new Map<string, HTMLElement>();
  return (state: StoreState) => {
    for (const param of Object.values(state.settings)) {
      let row = rows.get(param.path);
      if (!row) {
        row = document.createElement("div");
        row.className = "setting-row";
        row.innerHTML = `<label></label><span class="path"></span>`;
        const editor = buildEditor(param, (value) =>
          guarded(connection.call("settings/set", { path: param.path, value })),
        );
        row.appendChild(editor);
        container.appendChild(row);
        rows.set(param.path, row);
      }
      row.querySelector("label")!.textContent = param.alias ?? param.path;
      (row.querySelector("label") as HTMLElement).title = param.description ?? "";
      row.querySelector(".path")!.textContent = param.path;
      const input = row.querySelector("input, select") as HTMLInputElement | HTMLSelectElement | null;
      if (input && document.activeElement !== input) {
        if (input instanceof HTMLInputElement && input.type === "checkbox") {
          input.checked = Boolean(param.value);
        } else {
          input.value = String(param.value);
        }
      }
    }
  };
}

function buildEditor(param: any, onSet: (value: any) => void): HTMLElement {
  if (param.kind === "bool") {
    const input = document.createElement("input");
    input.type = "checkbox";
    input.addEventListener("change", () => onSet(input.checked));
    return input;
  }
  if (param.kind === "enum") {
    const select = document.createElement("select");
    for (const choice of param.choices ?? []) {
      const option = document.createElement("option");
      option.value = option.textContent = choice;
      select.appendChild(option);
    }
    select.addEventListener("change", () => onSet(select.value));
    return select;
  }
  const input = document.createElement("input");
  input.type = "number";
  if (param.min !== null && param.min !== undefined) input.min = String(param.min);
  if (param.max !== null && param.max !== undefined) input.max = String(param.max);
  input.step = param.kind === "int" ? "1" : "0.05";
  input.addEventListener("change", () => {
    const value = param.kind === "int" ? parseInt(input.value, 10) : parseFloat(input.value);
    if (!Number.isNaN(value)) onSet(value);
  });
  return input;
}
