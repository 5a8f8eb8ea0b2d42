// Browser gamepad capture, streamed to the console at 30 Hz. Mapping to
// robot commands happens robot-side; the dashboard only forwards frames.

import type { Connection } from "./connection.js";

const RATE_HZ = 30;

// Standard-mapping indices. Buttons: 0 A, 1 B, 4 LB, 5 RB; axes: 0/1 left
// stick, 2/3 right stick; 6/7 trigger axes where exposed as buttons.
const BUTTON_NAMES: Record<number, string> = {
  0: "mode",
  1: "reverse",
  4: "flipper_down",
};

export function startGamepadStream(connection: Connection): () => void {
  let timer: number | undefined;

  const poll = () => {
    const pads = navigator.getGamepads ? navigator.getGamepads() : [];
    const pad = pads && pads[0];
    if (pad) {
      const buttons: Record<string, boolean> = {};
      pad.buttons.forEach((button, i) => {
        const name = BUTTON_NAMES[i];
        if (name) buttons[name] = button.pressed;
      });
      connection.publish("input/gamepad", {
        // stick y is reported down-positive; forward should be +1
        left: [clamp(pad.axes[0] ?? 0), clamp(-(pad.axes[1] ?? 0))],
        right: [clamp(pad.axes[2] ?? 0), clamp(-(pad.axes[3] ?? 0))],
        triggers: [pad.buttons[6]?.value ?? 0, pad.buttons[7]?.value ?? 0],
        buttons,
      });
    }
  };
  timer = window.setInterval(poll, 1000 / RATE_HZ);
  return () => window.clearInterval(timer);
}

function clamp(v: number): number {
  return Math.max(-1, Math.min(1, v));
}
