import { describe, expect, it } from "vitest";

import {
  LOG_HEADER,
  SAMPLES_HEADER,
  fmt9,
  frameChecksum,
  markerLine,
  parseFrameLine,
  sampleLine,
  samplesText,
} from "../src/formats.js";

// record lines produced by the engine cli, frozen for cross-checking
const GOLDEN_SAMPLE = "0.123456789 0.333333333 1.23456789 0.456 0 1.4 0";
const GOLDEN_FRAME_1 =
  "F 0.1 2060.20455 541.254209 0 0.503243425 4 0.646046403 0.504645217 0 10 0 0 0 0 0 0 0 2060.20455 541.254209";
const GOLDEN_FRAME_2 =
  "F 0.2 2088.30009 525.606105 0 0.552818855 4 0.675312592 0.446689277 0 10 0 0 0 0 0 0 0 2116.39563 509.958001";
const GOLDEN_CHECKSUM = "cae59e133b1932b1f1e3223e68e6dbf121948f14c9f16f70c8f38c5803ebd912";

describe("fmt9", () => {
  it("keeps nine significant digits and strips noise", () => {
    expect(fmt9(1 / 3)).toBe("0.333333333");
    expect(fmt9(0.123456789123)).toBe("0.123456789");
    expect(fmt9(1.4)).toBe("1.4");
    expect(fmt9(0)).toBe("0");
    expect(fmt9(-2.5)).toBe("-2.5");
  });

  it("round-trips through parseFloat", () => {
    for (const x of [Math.PI, 1e-7, 123456.789, -0.00012345]) {
      expect(parseFloat(fmt9(x))).toBeCloseTo(x, 6);
      expect(fmt9(parseFloat(fmt9(x)))).toBe(fmt9(x));
    }
  });

  it("rejects non-finite values", () => {
    expect(() => fmt9(Infinity)).toThrow();
    expect(() => fmt9(NaN)).toThrow();
  });
});

describe("sample records", () => {
  it("matches the cli serialization byte for byte", () => {
    const line = sampleLine({
      t: 0.123456789123,
      hand: [1 / 3, 1.23456789123, 0.456],
      shoulder: [0, 1.4, 0],
    });
    expect(line).toBe(GOLDEN_SAMPLE);
  });

  it("builds a well-formed samples file", () => {
    const text = samplesText([
      { t: 0.1, hand: [0.1, 1.2, 0.4], shoulder: [0, 1.4, 0] },
      { t: 0.2, hand: [0.2, 1.3, 0.4], shoulder: [0, 1.4, 0] },
    ]);
    const lines = text.split("\n");
    expect(lines[0]).toBe(SAMPLES_HEADER);
    expect(lines).toHaveLength(4); // header + 2 records + trailing newline
    expect(text.endsWith("\n")).toBe(true);
  });
});

describe("frame records", () => {
  it("parses an engine frame line", () => {
    const f = parseFrameLine(GOLDEN_FRAME_1);
    expect(f.t).toBe(0.1);
    expect(f.pointer).toEqual([2060.20455, 541.254209]);
    expect(f.frozen).toBe(false);
    expect(f.H).toBe(4);
    expect(f.rings).toBeNull();
    expect(f.predictionEnd).toEqual([2060.20455, 541.254209]);
  });

  it("parses ring fields when present", () => {
    const withRings =
      "F 0.3 100 200 1 0.5 16 0.25 0.75 1 40 1 1 100 200 90 195 2.5 110 205";
    const f = parseFrameLine(withRings);
    expect(f.frozen).toBe(true);
    expect(f.circleClutching).toBe(true);
    expect(f.saturated).toBe(true);
    expect(f.rings).toEqual({ posNow: [100, 200], posPrev: [90, 195], thickness: 2.5 });
  });

  it("rejects malformed lines", () => {
    expect(() => parseFrameLine("F 1 2 3")).toThrow();
    expect(() => parseFrameLine("X " + GOLDEN_FRAME_1.slice(2))).toThrow();
  });
});

describe("marker records", () => {
  it("serializes run markers and selections", () => {
    expect(markerLine({ kind: "run_start", t: 0.5, run: 0 })).toBe("!run_start 0.5 0");
    expect(markerLine({ kind: "select", t: 1.25, run: 2, pos: [1920, 540] })).toBe(
      "!select 1.25 2 1920 540",
    );
  });
});

describe("engine output checksum", () => {
  it("matches the value computed by the engine side", async () => {
    expect(await frameChecksum([GOLDEN_FRAME_1, GOLDEN_FRAME_2])).toBe(GOLDEN_CHECKSUM);
  });
});

describe("log header", () => {
  it("uses the shared tag", () => {
    expect(LOG_HEADER).toBe("#airpoint-log 1");
  });
});
