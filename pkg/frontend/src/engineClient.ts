/**
 * HTTP client for the engine bridge. Every pointer position in the demo
 * comes back through these calls; the UI draws whatever the engine says.
 */

import { EngineConfig, ResultDoc, TaskDoc } from "./formats.js";

export interface SessionInfo {
  session: string;
  config_hash: string;
  technique: string;
  display: { width: number; height: number };
  h_max: number;
}

export class EngineClient {
  constructor(readonly base: string = "") {}

  private async text(path: string, init?: RequestInit): Promise<string> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      const body = await resp.text();
      throw new Error(`${path} -> ${resp.status}: ${body.slice(0, 200)}`);
    }
    return resp.text();
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.text("/api/health");
      return JSON.parse(body).ok === true;
    } catch {
      return false;
    }
  }

  async defaultConfig(technique: string): Promise<string> {
    return this.text(`/api/config/${technique}`);
  }

  async defaultTask(kind: string): Promise<string> {
    return this.text(`/api/task/${kind}`);
  }

  async createSession(configText: string): Promise<SessionInfo> {
    const body = await this.text("/api/session", { method: "POST", body: configText });
    return JSON.parse(body) as SessionInfo;
  }

  async closeSession(sid: string): Promise<void> {
    await this.text(`/api/session/${sid}`, { method: "DELETE" });
  }

  /** One sample record line in, one frame record line back. */
  async step(sid: string, sampleLine: string): Promise<string> {
    const body = await this.text(`/api/session/${sid}/step`, {
      method: "POST",
      body: sampleLine,
    });
    return body.trimEnd();
  }

  /** Offline re-run of a full sample stream; returns the log file text. */
  async replay(configText: string, samplesText: string): Promise<string> {
    return this.text("/api/replay", {
      method: "POST",
      body: JSON.stringify({ config: configText, samples: samplesText }),
    });
  }

  /** Same task evaluation the cli performs on files. */
  async metrics(logText: string, taskText: string): Promise<ResultDoc> {
    const body = await this.text("/api/metrics", {
      method: "POST",
      body: JSON.stringify({ log: logText, task: taskText }),
    });
    return JSON.parse(body) as ResultDoc;
  }
}

export function parseConfig(text: string): EngineConfig {
  const cfg = JSON.parse(text) as EngineConfig;
  if (cfg.format !== "airpoint-config/1") throw new Error(`unexpected config format ${cfg.format}`);
  return cfg;
}

export function parseTask(text: string): TaskDoc {
  const task = JSON.parse(text) as TaskDoc;
  if (task.format !== "airpoint-task/1") throw new Error(`unexpected task format ${task.format}`);
  return task;
}
