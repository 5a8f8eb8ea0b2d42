// Sensor values stacked horizontally in the scene's top-left corner.
// Classification drives the color; danger also grows the chip slightly.

import type { StoreState } from "../store.js";
import { DANGER_SCALE, SENSOR_COLORS } from "../theme.js";

export function mountSensorStrip(container: HTMLElement) {
  const chips = new Map<string, HTMLElement>();
  return (state: StoreState) => {
    for (const [name, reading] of Object.entries(state.sensors)) {
      let chip = chips.get(name);
      if (!chip) {
        chip = document.createElement("div");
        chip.className = "sensor-chip";
        chip.innerHTML = `<div class="value"></div><div class="name"></div>`;
        container.appendChild(chip);
        chips.set(name, chip);
      }
      const status = reading.status ?? "safe";
      chip.querySelector(".value")!.textContent =
        `${formatValue(reading.value)}${reading.unit ? " " + reading.unit : ""}`;
      chip.querySelector(".name")!.textContent = name;
      chip.style.borderBottomColor = SENSOR_COLORS[status] ?? SENSOR_COLORS.safe;
      chip.style.transform = status === "danger" ? `scale(${DANGER_SCALE})` : "scale(1)";
    }
  };
}

function formatValue(value: number): string {
  if (!Number.isFinite(value)) return "-";
  return Math.abs(value) >= 100 ? value.toFixed(0) : value.toFixed(1);
}
