/**
 * Human input proxy: mouse motion plays the two pointing dimensions and
 * the scroll wheel plays the precision (third) dimension, synthesizing
 * the 3D hand samples a body tracker would produce.
 */

import { EngineConfig, SampleRecord } from "./formats.js";

export interface Sensitivity {
  /** normalized pointing units per mouse pixel */
  uvPerPixel: number;
  /** h units per wheel delta unit; default spans h in ~10 notches of 100 */
  hPerWheel: number;
}

export const DEFAULT_SENSITIVITY: Sensitivity = {
  uvPerPixel: 1 / 900,
  hPerWheel: 0.001,
};

const SHOULDER: [number, number, number] = [0, 1.4, 0];

export class InputBinding {
  u = 0.5;
  v = 0.5;
  h = 0.0;
  private lastT = -Infinity;

  constructor(
    readonly cfg: EngineConfig,
    readonly sens: Sensitivity = DEFAULT_SENSITIVITY,
  ) {}

  /** Pointer-captured mouse delta; +dy on screen means moving down. */
  applyMouse(dx: number, dy: number): void {
    this.u = clamp01(this.u + dx * this.sens.uvPerPixel);
    this.v = clamp01(this.v + dy * this.sens.uvPerPixel);
  }

  /** Wheel up (negative deltaY) raises precision. */
  applyWheel(deltaY: number): void {
    this.h = clamp01(this.h - deltaY * this.sens.hPerWheel);
  }

  /** Synthesize the hand sample for time t (seconds, strictly increasing). */
  sample(t: number): SampleRecord {
    if (t <= this.lastT) t = this.lastT + 1e-4;
    this.lastT = t;
    return { t, hand: this.handPosition(), shoulder: SHOULDER };
  }

  handPosition(): [number, number, number] {
    const vol = this.cfg.volume;
    const vGeom = 1 - this.v;
    if (this.cfg.adjustment === "vertical") {
      const [xLo, xHi] = vol.planar_bounds[0];
      const [zLo, zHi] = vol.planar_bounds[1];
      const [yLo, yHi] = vol.vertical_range;
      return [
        xLo + this.u * (xHi - xLo),
        yLo + this.h * (yHi - yLo),
        zLo + vGeom * (zHi - zLo),
      ];
    }
    const [azLo, azHi] = vol.angular_bounds[0];
    const [elLo, elHi] = vol.angular_bounds[1];
    const [rLo, rHi] = vol.radial_range;
    const az = azLo + this.u * (azHi - azLo);
    const el = elLo + vGeom * (elHi - elLo);
    const r = rLo + this.h * (rHi - rLo);
    return [
      SHOULDER[0] + r * Math.cos(el) * Math.sin(az),
      SHOULDER[1] + r * Math.sin(el),
      SHOULDER[2] + r * Math.cos(el) * Math.cos(az),
    ];
  }
}

function clamp01(x: number): number {
  return x < 0 ? 0 : x > 1 ? 1 : x;
}
