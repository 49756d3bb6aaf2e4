/**
 * Demo wiring: pointer lock drives the input binding, one engine step per
 * animation frame, canvas rendering of the returned frame, and session
 * export / metric verification against the same bridge the cli uses.
 */

import { EngineClient, parseConfig, parseTask } from "./engineClient.js";
import { fmt9, sampleLine } from "./formats.js";
import { InputBinding } from "./input.js";
import { Renderer } from "./render.js";
import { SessionRecord } from "./session.js";
import { TaskGame } from "./tasks.js";

const client = new EngineClient("");

interface Live {
  session: SessionRecord;
  sid: string;
  binding: InputBinding;
  game: TaskGame;
  renderer: Renderer;
  taskText: string;
  t0: number;
  inFlight: boolean;
  selectQueued: boolean;
  stopped: boolean;
}

let live: Live | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function startSession(): Promise<void> {
  if (live) {
    live.stopped = true;
    await client.closeSession(live.sid).catch(() => {});
  }
  const technique = el<HTMLSelectElement>("technique").value;
  const taskKind = el<HTMLSelectElement>("task").value;
  const configText = await client.defaultConfig(technique);
  const taskText = await client.defaultTask(taskKind);
  const cfg = parseConfig(configText);
  const task = parseTask(taskText);
  const info = await client.createSession(configText);

  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  const renderer = new Renderer(ctx, info.display.width, info.display.height, canvas.clientWidth || 1280);

  live = {
    session: new SessionRecord(info.config_hash, info.technique, task.kind),
    sid: info.session,
    binding: new InputBinding(cfg),
    game: new TaskGame(task),
    renderer,
    taskText,
    t0: performance.now() / 1000,
    inFlight: false,
    selectQueued: false,
    stopped: false,
  };
  el<HTMLDivElement>("metrics").textContent = "";
  el<HTMLDivElement>("status").textContent = `session ${info.session} (${info.technique}, ${task.kind})`;
  requestAnimationFrame(tick);
}

async function tick(): Promise<void> {
  const s = live;
  if (!s || s.stopped) return;
  if (!s.inFlight) {
    s.inFlight = true;
    try {
      const t = performance.now() / 1000 - s.t0;
      const sample = s.binding.sample(t);
      s.session.addSample(sample);
      const line = await client.step(s.sid, sampleLine(sample));
      const frame = s.session.addFrame(line);
      const selecting = s.selectQueued;
      s.selectQueued = false;
      const { markers, view } = s.game.frame(frame.t, frame.pointer, selecting);
      markers.forEach((m) => s.session.addMarker(m));
      s.renderer.draw(frame, view);
      el<HTMLDivElement>("hud").textContent =
        `${view.status}  |  h=${fmt9(frame.h)} H=${fmt9(frame.H)}` +
        `${frame.frozen ? "  FROZEN (clutch)" : ""}${frame.saturated ? "  [range edge]" : ""}`;
      if (view.done) await finishSession();
    } catch (err) {
      el<HTMLDivElement>("status").textContent = `error: ${err}`;
    } finally {
      s.inFlight = false;
    }
  }
  requestAnimationFrame(tick);
}

async function finishSession(): Promise<void> {
  const s = live;
  if (!s) return;
  s.stopped = true;
  const result = await client.metrics(s.session.logText(), s.taskText);
  const agg = result.aggregate === null ? "incomplete" : `${result.aggregate.toFixed(3)} ${result.units}`;
  el<HTMLDivElement>("metrics").textContent =
    `${result.metric}: ${agg}  per-run [${result.per_run.map((v) => (v === null ? "-" : v.toFixed(2))).join(", ")}]`;
}

function download(name: string, text: string): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

async function verifyChecksum(): Promise<void> {
  const s = live;
  if (!s) return;
  const configText = await client.defaultConfig(el<HTMLSelectElement>("technique").value);
  const replayLog = await client.replay(configText, s.session.samplesFileText());
  const offline = replayLog.split("\n").filter((l) => l.startsWith("F "));
  const ours = await s.session.engineChecksum();
  const theirs = await (await import("./formats.js")).frameChecksum(offline);
  el<HTMLDivElement>("status").textContent =
    ours === theirs ? `replay checksum MATCH (${ours.slice(0, 12)}...)` : "replay checksum MISMATCH";
}

function bindUi(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  canvas.addEventListener("click", () => canvas.requestPointerLock());
  window.addEventListener("mousemove", (e) => {
    if (document.pointerLockElement === canvas && live) {
      live.binding.applyMouse(e.movementX, e.movementY);
    }
  });
  window.addEventListener(
    "wheel",
    (e) => {
      if (document.pointerLockElement === canvas && live) {
        e.preventDefault();
        live.binding.applyWheel(e.deltaY);
      }
    },
    { passive: false },
  );
  window.addEventListener("mousedown", (e) => {
    if (document.pointerLockElement === canvas && live && e.button === 0) {
      live.selectQueued = true;
    }
  });
  el<HTMLButtonElement>("start").addEventListener("click", () => void startSession());
  el<HTMLButtonElement>("finish").addEventListener("click", () => void finishSession());
  el<HTMLButtonElement>("export-log").addEventListener("click", () => {
    if (live) download("session-log.txt", live.session.logText());
  });
  el<HTMLButtonElement>("export-samples").addEventListener("click", () => {
    if (live) download("session-samples.txt", live.session.samplesFileText());
  });
  el<HTMLButtonElement>("verify").addEventListener("click", () => void verifyChecksum());
}

bindUi();
void client.health().then((ok) => {
  el<HTMLDivElement>("status").textContent = ok
    ? "bridge reachable; pick a technique and task, then Start"
    : "bridge unreachable: run `airpoint serve --frontend frontend`";
});
