// E-stop status bar, bottom-center of the scene view: visible only while
// at least one e-stop is pressed; click to expand per-channel states.

import type { StoreState } from "../store.js";

export function mountEStopBar(container: HTMLElement) {
  container.innerHTML = `
    <div class="estop-bar" id="estop-bar" style="display:none">
      <span id="estop-headline"></span>
      <div class="detail" id="estop-detail"></div>
    </div>
  `;
  const bar = container.querySelector<HTMLElement>("#estop-bar")!;
  const headline = container.querySelector<HTMLElement>("#estop-headline")!;
  const detail = container.querySelector<HTMLElement>("#estop-detail")!;
  bar.addEventListener("click", () => bar.classList.toggle("expanded"));

  return (state: StoreState) => {
    const channels = state.estop.channels ?? [];
    const pressed = channels.filter((c: any) => c.pressed);
    bar.style.display = state.estop.any_pressed ? "block" : "none";
    headline.textContent = `E-STOP: ${pressed.map((c: any) => c.name).join(", ") || "?"}`;
    detail.innerHTML = channels
      .map((c: any) => `${c.name} (${c.source}): ${c.pressed ? "PRESSED" : "released"}`)
      .join("<br>");
  };
}
