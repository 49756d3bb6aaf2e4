import { describe, expect, it } from "vitest";

import { SessionRecord } from "../src/session.js";
import { TaskGame, topmostHit } from "../src/tasks.js";
import { TaskDoc } from "../src/formats.js";

const FRAME = (t: number) =>
  `F ${t} 1920 540 0 0.5 4 0.5 0.5 0 10 0 0 0 0 0 0 0 1920 540`;

describe("SessionRecord", () => {
  it("assembles a log with the shared header layout", () => {
    const s = new SessionRecord("abcdef123456", "HA", "buttons");
    s.addMarker({ kind: "run_start", t: 0.1, run: 0 });
    s.addFrame(FRAME(0.1));
    s.addFrame(FRAME(0.2));
    s.addMarker({ kind: "select", t: 0.2, run: 0, pos: [1920, 540] });
    s.addMarker({ kind: "run_end", t: 0.2, run: 0 });
    const lines = s.logText().split("\n");
    expect(lines[0]).toBe("#airpoint-log 1 abcdef123456 HA buttons");
    expect(lines[1]).toBe("!run_start 0.1 0");
    expect(lines[2]).toBe(FRAME(0.1));
    // at the same timestamp frames sort before selects before run ends
    expect(lines[3]).toBe(FRAME(0.2));
    expect(lines[4]).toBe("!select 0.2 0 1920 540");
    expect(lines[5]).toBe("!run_end 0.2 0");
  });

  it("tracks engine frames and samples separately", () => {
    const s = new SessionRecord("h", "VR", "erase");
    s.addSample({ t: 0.05, hand: [0.1, 1.2, 0.4], shoulder: [0, 1.4, 0] });
    s.addFrame(FRAME(0.05));
    expect(s.samples).toHaveLength(1);
    expect(s.frames).toHaveLength(1);
    expect(s.samplesFileText().split("\n")[0]).toBe("#airpoint-samples 1");
    expect(s.lastFrame()?.pointer).toEqual([1920, 540]);
  });
});

describe("TaskGame", () => {
  const buttonsTask: TaskDoc = {
    format: "airpoint-task/1",
    kind: "buttons",
    runs: [
      { rects: [[100, 100, 50, 50]], target: 0, initial_cursor: [0, 0] },
      { rects: [[300, 100, 50, 50]], target: 0, initial_cursor: [0, 0] },
    ],
  };

  it("advances runs on valid selections only", () => {
    const g = new TaskGame(buttonsTask);
    let r = g.frame(0.1, [10, 10], false);
    expect(r.markers.map((m) => m.kind)).toEqual(["run_start"]);
    r = g.frame(0.2, [10, 10], true); // miss
    expect(r.markers.map((m) => m.kind)).toEqual(["select"]);
    expect(g.run).toBe(0);
    r = g.frame(0.3, [125, 125], true); // hit
    expect(r.markers.map((m) => m.kind)).toEqual(["select", "run_end", "run_start"]);
    expect(g.run).toBe(1);
    r = g.frame(0.4, [325, 125], true);
    expect(r.markers.map((m) => m.kind)).toEqual(["select", "run_end"]);
    expect(g.done).toBe(true);
  });

  it("honors z-order on overlapping buttons", () => {
    expect(
      topmostHit(
        [
          [100, 100, 200, 200],
          [150, 150, 50, 50],
        ],
        [160, 160],
      ),
    ).toBe(1);
    expect(
      topmostHit(
        [
          [100, 100, 200, 200],
          [150, 150, 50, 50],
        ],
        [110, 110],
      ),
    ).toBe(0);
  });

  it("runs moving-object tracks to completion", () => {
    const task: TaskDoc = {
      format: "airpoint-task/1",
      kind: "hit_moving",
      tracks: [
        { direction: "LR", start: [100, 500], end: [400, 500], speed: 300, radius: 16 },
        { direction: "RL", start: [400, 500], end: [100, 500], speed: 300, radius: 16 },
      ],
    };
    const g = new TaskGame(task);
    const kinds: string[] = [];
    for (let i = 0; i <= 140; i++) {
      const r = g.frame(i * 0.016, [90, 500], false);
      kinds.push(...r.markers.map((m) => m.kind));
      if (g.done) break;
    }
    expect(kinds).toEqual(["run_start", "run_end", "run_start", "run_end"]);
  });

  it("reports the from-behind state for hit tasks", () => {
    const task: TaskDoc = {
      format: "airpoint-task/1",
      kind: "hit_moving",
      tracks: [{ direction: "LR", start: [100, 500], end: [400, 500], speed: 300, radius: 16 }],
    };
    const g = new TaskGame(task);
    const behind = g.frame(0.1, [50, 500], false).view.object!.pointerBehind;
    expect(behind).toBe(true);
    const g2 = new TaskGame(task);
    const ahead = g2.frame(0.1, [390, 500], false).view.object!.pointerBehind;
    expect(ahead).toBe(false);
  });

  it("erase completes when every vertex is visited", () => {
    const task: TaskDoc = {
      format: "airpoint-task/1",
      kind: "erase",
      polylines: [
        [
          [100, 100],
          [140, 100],
        ],
      ],
      eraser_radius: 12,
    };
    const g = new TaskGame(task);
    g.frame(0.0, [0, 0], false); // starts run
    let done = false;
    for (let x = 90; x <= 150 && !done; x += 4) {
      const r = g.frame(x / 100, [x, 104], false);
      done = r.markers.some((m) => m.kind === "run_end");
    }
    expect(done).toBe(true);
    expect(g.done).toBe(true);
  });
});
