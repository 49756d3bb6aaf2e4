/**
 * Session recording: collects the engine's frame lines verbatim plus the
 * demo's run/selection markers, and assembles the same log file text the
 * cli writes, so exported logs evaluate identically offline.
 */

import {
  FrameRecord,
  LOG_HEADER,
  MarkerRecord,
  SampleRecord,
  frameChecksum,
  markerLine,
  parseFrameLine,
  samplesText,
} from "./formats.js";

interface Entry {
  t: number;
  order: number; // run_start < frame < select < timeout < run_end
  seq: number;
  line: string;
}

const MARKER_ORDER: Record<MarkerRecord["kind"], number> = {
  run_start: 0,
  select: 2,
  timeout: 3,
  run_end: 4,
};

export class SessionRecord {
  readonly frames: FrameRecord[] = [];
  readonly frameLines: string[] = [];
  readonly markers: MarkerRecord[] = [];
  readonly samples: SampleRecord[] = [];
  private seq = 0;
  private entries: Entry[] = [];

  constructor(
    readonly configHash: string,
    readonly technique: string,
    readonly taskKind: string,
  ) {}

  addFrame(line: string): FrameRecord {
    const rec = parseFrameLine(line);
    this.frames.push(rec);
    this.frameLines.push(line);
    this.entries.push({ t: rec.t, order: 1, seq: this.seq++, line });
    return rec;
  }

  addSample(s: SampleRecord): void {
    this.samples.push(s);
  }

  addMarker(m: MarkerRecord): void {
    this.markers.push(m);
    this.entries.push({ t: m.t, order: MARKER_ORDER[m.kind], seq: this.seq++, line: markerLine(m) });
  }

  logText(): string {
    const head = `${LOG_HEADER} ${this.configHash || "-"} ${this.technique || "-"} ${this.taskKind || "-"}`;
    const sorted = [...this.entries].sort(
      (a, b) => a.t - b.t || a.order - b.order || a.seq - b.seq,
    );
    return [head, ...sorted.map((e) => e.line)].join("\n") + "\n";
  }

  samplesFileText(): string {
    return samplesText(this.samples);
  }

  /** Checksum of the engine's outputs, for offline replay verification. */
  engineChecksum(): Promise<string> {
    return frameChecksum(this.frameLines);
  }

  lastFrame(): FrameRecord | null {
    return this.frames.length ? this.frames[this.frames.length - 1] : null;
  }
}
