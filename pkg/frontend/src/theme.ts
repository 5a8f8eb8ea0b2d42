// Colorblind-safe palette. The whole interface re-tints from the current
// operation mode so a mode change is impossible to miss.

export interface ModeTheme {
  accent: string;
  label: string;
}

export const MODE_THEMES: Record<string, ModeTheme> = {
  autonomous: { accent: "#0072B2", label: "Autonomous" },
  teleoperation: { accent: "#E69F00", label: "Teleoperation" },
  manipulation: { accent: "#D55E00", label: "Manipulation" },
  safe: { accent: "#009E73", label: "Safe" },
};

export function themeFor(mode: string | null): ModeTheme {
  return MODE_THEMES[mode ?? ""] ?? { accent: "#8a8f98", label: "Unknown" };
}

// Severity / outcome colors share the palette: green, orange, red.
export const SEVERITY_COLORS: Record<string, string> = {
  OK: "#009E73",
  WARNING: "#E69F00",
  ERROR: "#D55E00",
};

export const SENSOR_COLORS: Record<string, string> = {
  safe: "#009E73",
  warning: "#E69F00",
  danger: "#D55E00",
};

export const OUTCOME_COLORS: Record<string, string> = {
  running: "#5a6472",
  succeeded: "#009E73",
  canceled: "#E69F00",
  failed: "#D55E00",
};

// Dangerous sensor values also grow slightly to catch the eye.
export const DANGER_SCALE = 1.15;
