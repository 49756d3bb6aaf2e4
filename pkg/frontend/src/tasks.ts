/**
 * Mini-game state for the four tasks. This module owns run progression
 * and the drawable scene; all pointing behavior stays in the engine.
 */

import { MarkerRecord, TaskDoc } from "./formats.js";

export interface ButtonView {
  rect: [number, number, number, number];
  isTarget: boolean;
}

export interface TaskView {
  kind: TaskDoc["kind"];
  run: number;
  runCount: number;
  done: boolean;
  buttons?: ButtonView[];
  object?: { pos: [number, number]; radius: number; behindOnly: boolean; pointerBehind: boolean };
  polylines?: [number, number][][];
  erased?: boolean[][];
  eraserRadius?: number;
  status: string;
}

export class TaskGame {
  run = -1;
  done = false;
  private runStartT = 0;
  private erasedFlags: boolean[][] = [];
  private vertices: [number, number][][] = [];

  constructor(readonly task: TaskDoc) {
    if (task.kind === "erase" && task.polylines) {
      this.vertices = task.polylines.map((line) => discretize(line, 8));
      this.erasedFlags = this.vertices.map((vs) => vs.map(() => false));
    }
  }

  runCount(): number {
    if (this.task.kind === "buttons") return this.task.runs?.length ?? 0;
    if (this.task.kind === "erase") return 1;
    return this.task.tracks?.length ?? 0;
  }

  /** Advance to the next run; returns its start marker. */
  nextRun(t: number): MarkerRecord | null {
    if (this.run + 1 >= this.runCount()) {
      this.done = true;
      return null;
    }
    this.run += 1;
    this.runStartT = t;
    return { kind: "run_start", t, run: this.run };
  }

  /**
   * One game tick. selecting is edge-triggered (true on the frame the
   * button went down). Returns markers to log plus the drawable view.
   */
  frame(t: number, pointer: [number, number], selecting: boolean): { markers: MarkerRecord[]; view: TaskView } {
    const markers: MarkerRecord[] = [];
    if (this.run < 0 && !this.done) {
      const m = this.nextRun(t);
      if (m) markers.push(m);
    }
    const view: TaskView = {
      kind: this.task.kind,
      run: this.run,
      runCount: this.runCount(),
      done: this.done,
      status: "",
    };
    if (this.done) {
      view.status = "task complete";
      return { markers, view };
    }

    if (this.task.kind === "buttons") {
      const run = this.task.runs![this.run];
      view.buttons = run.rects.map((r, i) => ({ rect: r, isTarget: i === run.target }));
      view.status = `run ${this.run + 1}/${this.runCount()}: hit the highlighted button`;
      if (selecting) {
        markers.push({ kind: "select", t, run: this.run, pos: pointer });
        if (topmostHit(run.rects, pointer) === run.target) {
          markers.push({ kind: "run_end", t, run: this.run });
          const m = this.nextRun(t);
          if (m) markers.push(m);
        }
      }
    } else if (this.task.kind === "erase") {
      const r = this.task.eraser_radius ?? 10;
      let remaining = 0;
      this.vertices.forEach((vs, i) =>
        vs.forEach((v, j) => {
          if (!this.erasedFlags[i][j] && dist(v, pointer) <= r) this.erasedFlags[i][j] = true;
          if (!this.erasedFlags[i][j]) remaining += 1;
        }),
      );
      view.polylines = this.task.polylines;
      view.erased = this.erasedFlags;
      view.eraserRadius = r;
      view.status = `erase the graph (${remaining} points left)`;
      if (remaining === 0) {
        markers.push({ kind: "run_end", t, run: this.run });
        this.done = true;
      }
    } else {
      const track = this.task.tracks![this.run];
      const dt = t - this.runStartT;
      const len = dist(track.start, track.end);
      const s = Math.min(Math.max(dt * track.speed, 0), len);
      const ux = (track.end[0] - track.start[0]) / len;
      const uy = (track.end[1] - track.start[1]) / len;
      const pos: [number, number] = [track.start[0] + ux * s, track.start[1] + uy * s];
      const projPtr = (pointer[0] - track.start[0]) * ux + (pointer[1] - track.start[1]) * uy;
      const behindOnly = this.task.kind === "hit_moving";
      view.object = { pos, radius: track.radius, behindOnly, pointerBehind: projPtr <= s };
      view.status =
        this.task.kind === "hit_moving"
          ? `track ${this.run + 1}/4 (${track.direction}): select the object from behind`
          : `track ${this.run + 1}/4 (${track.direction}): follow the object`;
      if (selecting && behindOnly) {
        markers.push({ kind: "select", t, run: this.run, pos: pointer });
      }
      if (dt >= len / track.speed) {
        markers.push({ kind: "run_end", t, run: this.run });
        const m = this.nextRun(t);
        if (m) markers.push(m);
      }
    }
    return { markers, view };
  }
}

export function topmostHit(rects: [number, number, number, number][], p: [number, number]): number | null {
  let hit: number | null = null;
  rects.forEach(([x, y, w, h], i) => {
    if (p[0] >= x && p[0] <= x + w && p[1] >= y && p[1] <= y + h) hit = i;
  });
  return hit;
}

function dist(a: [number, number], b: [number, number]): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}

function discretize(line: [number, number][], step: number): [number, number][] {
  const out: [number, number][] = [line[0]];
  for (let i = 1; i < line.length; i++) {
    const [ax, ay] = line[i - 1];
    const [bx, by] = line[i];
    const seg = Math.hypot(bx - ax, by - ay);
    const n = Math.max(1, Math.ceil(seg / step));
    for (let k = 1; k <= n; k++) out.push([ax + ((bx - ax) * k) / n, ay + ((by - ay) * k) / n]);
  }
  return out;
}
