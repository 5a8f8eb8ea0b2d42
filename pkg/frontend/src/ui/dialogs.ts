// Developer-only configuration dialogs: add a camera (channels discovered
// from the gateway) and create an action (message / script / composite /
// toggle).

import type { Connection } from "../connection.js";
import type { StoreState } from "../store.js";
import { guarded } from "./toast.js";

export function openAddCameraDialog(connection: Connection): void {
  const dialog = document.createElement("dialog");
  dialog.innerHTML = `
    <h3>Add camera</h3>
    <label>Name</label><input id="cam-name" placeholder="Gripper" />
    <label>Image channel</label>
    <select id="cam-channel"></select>
    <menu>
      <button value="cancel" class="basic-button">Cancel</button>
      <button value="ok" class="basic-button">Add</button>
    </menu>
  `;
  document.body.appendChild(dialog);
  const select = dialog.querySelector<HTMLSelectElement>("#cam-channel")!;
  connection
    .call("cameras/discover", {})
    .then((response) => {
      for (const channel of response.payload.channels ?? []) {
        const option = document.createElement("option");
        option.value = option.textContent = channel;
        select.appendChild(option);
      }
      if (!select.options.length) {
        const option = document.createElement("option");
        option.value = option.textContent = "camera/new/frame";
        select.appendChild(option);
      }
    })
    .catch(() => undefined);
  wireDialog(dialog, () => {
    const name = dialog.querySelector<HTMLInputElement>("#cam-name")!.value;
    guarded(connection.call("cameras/add", { name, channel: select.value }));
  });
}

export function openAddActionDialog(connection: Connection, state: StoreState): void {
  const dialog = document.createElement("dialog");
  const actionOptions = state.actions
    .map((a: any) => `<option value="${a.id}">${a.name}</option>`)
    .join("");
  dialog.innerHTML = `
    <h3>New action</h3>
    <label>Name</label><input id="act-name" placeholder="Toggle LED" />
    <label>Kind</label>
    <select id="act-kind">
      <option value="message">message (publish / service)</option>
      <option value="script">script</option>
      <option value="composite">composite</option>
      <option value="toggle">toggle</option>
    </select>
    <div data-kind="message">
      <label>Channel</label><input id="act-channel" placeholder="robot/led" />
      <label>Call style</label>
      <select id="act-style"><option>publish</option><option>service</option></select>
      <label>Payload (JSON) or script below</label>
      <input id="act-payload" placeholder='{"brightness": 0.5}' />
      <label>Payload script (optional)</label>
      <input id="act-script" placeholder="{'x': tool['waypoint']['x']}" />
    </div>
    <div data-kind="script" style="display:none">
      <label>Expression</label><input id="act-expr" placeholder="1 + 1" />
    </div>
    <div data-kind="composite" style="display:none">
      <label>Children (ctrl-click to multi-select)</label>
      <select id="act-children" multiple size="5">${actionOptions}</select>
      <label>Mode</label>
      <select id="act-mode"><option>sequence</option><option>parallel</option></select>
    </div>
    <div data-kind="toggle" style="display:none">
      <label>Children (in cycle order)</label>
      <select id="act-toggle-children" multiple size="5">${actionOptions}</select>
      <label>Feedback channel (optional)</label><input id="act-feedback" placeholder="robot/led_state" />
      <label>State extractor (optional)</label><input id="act-extractor" placeholder="message['idx']" />
    </div>
    <menu>
      <button value="cancel" class="basic-button">Cancel</button>
      <button value="ok" class="basic-button">Create</button>
    </menu>
  `;
  document.body.appendChild(dialog);
  const kindSelect = dialog.querySelector<HTMLSelectElement>("#act-kind")!;
  kindSelect.addEventListener("change", () => {
    dialog.querySelectorAll<HTMLElement>("[data-kind]").forEach((section) => {
      section.style.display = section.dataset.kind === kindSelect.value ? "block" : "none";
    });
  });
  wireDialog(dialog, () => {
    const kind = kindSelect.value;
    const spec: any = { kind, name: dialog.querySelector<HTMLInputElement>("#act-name")!.value };
    if (kind === "message") {
      spec.channel = value(dialog, "#act-channel");
      spec.call_style = dialog.querySelector<HTMLSelectElement>("#act-style")!.value;
      const payloadText = value(dialog, "#act-payload");
      if (payloadText) spec.payload = JSON.parse(payloadText);
      const script = value(dialog, "#act-script");
      if (script) spec.payload_script = script;
    } else if (kind === "script") {
      spec.script = value(dialog, "#act-expr");
    } else if (kind === "composite") {
      spec.children = selected(dialog, "#act-children");
      spec.mode = dialog.querySelector<HTMLSelectElement>("#act-mode")!.value;
    } else {
      spec.children = selected(dialog, "#act-toggle-children");
      const feedback = value(dialog, "#act-feedback");
      const extractor = value(dialog, "#act-extractor");
      if (feedback) spec.feedback_channel = feedback;
      if (extractor) spec.state_extractor = extractor;
    }
    guarded(connection.call("actions/register", { spec }));
  });
}

function value(dialog: HTMLElement, selector: string): string {
  return dialog.querySelector<HTMLInputElement>(selector)!.value.trim();
}

function selected(dialog: HTMLElement, selector: string): string[] {
  return Array.from(dialog.querySelector<HTMLSelectElement>(selector)!.selectedOptions).map(
    (option) => option.value,
  );
}

function wireDialog(dialog: HTMLDialogElement, onOk: () => void): void {
  dialog.querySelectorAll("menu button").forEach((button) => {
    button.addEventListener("click", (event) => {
      event.preventDefault();
      if ((button as HTMLButtonElement).value === "ok") {
        try {
          onOk();
        } catch (err) {
          guarded(Promise.reject(err));
          return;
        }
      }
      dialog.close();
      dialog.remove();
    });
  });
  dialog.showModal();
}
