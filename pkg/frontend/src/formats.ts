/**
 * Wire formats shared with the engine bridge: sample record lines, frame
 * record lines and the JSON config/task/result documents. The demo never
 * re-derives pointer state; it serializes inputs and parses what the
 * engine returns.
 */

export interface SampleRecord {
  t: number;
  hand: [number, number, number];
  shoulder: [number, number, number];
}

export interface RingPair {
  posNow: [number, number];
  posPrev: [number, number];
  thickness: number;
}

export interface FrameRecord {
  t: number;
  pointer: [number, number];
  frozen: boolean;
  h: number;
  H: number;
  uv: [number, number];
  saturated: boolean;
  circleRadius: number;
  circleClutching: boolean;
  rings: RingPair | null;
  predictionEnd: [number, number];
}

export interface MarkerRecord {
  kind: "run_start" | "run_end" | "select" | "timeout";
  t: number;
  run: number;
  pos?: [number, number];
}

/** Nine significant digits, in a form Python's float() reads back. */
export function fmt9(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite value ${x}`);
  return String(parseFloat(x.toPrecision(9)));
}

export const SAMPLES_HEADER = "#airpoint-samples 1";
export const LOG_HEADER = "#airpoint-log 1";

export function sampleLine(s: SampleRecord): string {
  return [s.t, ...s.hand, ...s.shoulder].map(fmt9).join(" ");
}

export function samplesText(samples: SampleRecord[]): string {
  return [SAMPLES_HEADER, ...samples.map(sampleLine)].join("\n") + "\n";
}

export function parseFrameLine(line: string): FrameRecord {
  const parts = line.trim().split(/\s+/);
  if (parts[0] !== "F" || parts.length !== 20) {
    throw new Error(`bad frame record: ${line}`);
  }
  const v = parts.slice(1).map(Number);
  if (v.some((x) => Number.isNaN(x))) throw new Error(`bad frame numbers: ${line}`);
  const hasRings = parts[12] === "1";
  return {
    t: v[0],
    pointer: [v[1], v[2]],
    frozen: parts[4] === "1",
    h: v[4],
    H: v[5],
    uv: [v[6], v[7]],
    saturated: parts[9] === "1",
    circleRadius: v[9],
    circleClutching: parts[11] === "1",
    rings: hasRings ? { posNow: [v[12], v[13]], posPrev: [v[14], v[15]], thickness: v[16] } : null,
    predictionEnd: [v[17], v[18]],
  };
}

export function markerLine(m: MarkerRecord): string {
  const base = `!${m.kind} ${fmt9(m.t)} ${m.run}`;
  return m.pos ? `${base} ${fmt9(m.pos[0])} ${fmt9(m.pos[1])}` : base;
}

/** Engine config document, as served by /api/config and the cli files. */
export interface EngineConfig {
  format: string;
  name: string;
  mapping: "absolute" | "relative";
  adjustment: "vertical" | "horizontal";
  scheme: { kind: string; knots: [number, number][] };
  volume: {
    vertical_range: [number, number];
    radial_range: [number, number];
    planar_bounds: [[number, number], [number, number]];
    angular_bounds: [[number, number], [number, number]];
  };
  display: { width: number; height: number };
  gain_base: number;
  [key: string]: unknown;
}

export interface TaskDoc {
  format: string;
  kind: "buttons" | "erase" | "hit_moving" | "track_moving";
  runs?: { rects: [number, number, number, number][]; target: number; initial_cursor: [number, number] }[];
  polylines?: [number, number][][];
  eraser_radius?: number;
  tracks?: { direction: string; start: [number, number]; end: [number, number]; speed: number; radius: number }[];
}

export interface ResultDoc {
  format: string;
  metric: string;
  units: string;
  per_run: (number | null)[];
  aggregate: number | null;
  complete: boolean;
}

export async function sha256Hex(text: string): Promise<string> {
  const data = new TextEncoder().encode(text);
  const digest = await crypto.subtle.digest("SHA-256", data);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}

/** Checksum over the engine's frame records only (excludes markers/header). */
export async function frameChecksum(frameLines: string[]): Promise<string> {
  return sha256Hex(frameLines.join("\n"));
}
