/**
 * Canvas rendering of the engine's frame output and the task scene. The
 * display is drawn at a scale factor so the 3840x1080 surface fits the
 * window; everything here is presentation only.
 */

import { FrameRecord } from "./formats.js";
import { TaskView } from "./tasks.js";

export class Renderer {
  readonly scale: number;

  constructor(
    readonly ctx: CanvasRenderingContext2D,
    readonly displayW: number,
    readonly displayH: number,
    canvasW: number,
  ) {
    this.scale = canvasW / displayW;
    ctx.canvas.width = canvasW;
    ctx.canvas.height = Math.round(displayH * this.scale);
  }

  private px(p: [number, number]): [number, number] {
    return [p[0] * this.scale, p[1] * this.scale];
  }

  draw(frame: FrameRecord | null, view: TaskView | null): void {
    const { ctx } = this;
    ctx.fillStyle = "#11141a";
    ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    if (view) this.drawTask(view);
    if (frame) this.drawFeedback(frame);
  }

  private drawTask(view: TaskView): void {
    const { ctx } = this;
    if (view.buttons) {
      for (const b of view.buttons) {
        const [x, y] = this.px([b.rect[0], b.rect[1]]);
        const w = b.rect[2] * this.scale;
        const h = b.rect[3] * this.scale;
        ctx.fillStyle = b.isTarget ? "#2e7d32" : "#37474f";
        ctx.strokeStyle = "#90a4ae";
        ctx.fillRect(x, y, w, h);
        ctx.strokeRect(x, y, w, h);
      }
    }
    if (view.polylines && view.erased) {
      ctx.strokeStyle = "#b0bec5";
      ctx.lineWidth = 2;
      view.polylines.forEach((line, i) => {
        // redraw only un-erased spans, approximated per segment
        for (let k = 1; k < line.length; k++) {
          const frac = Math.floor(((k - 1) / (line.length - 1)) * (view.erased![i].length - 1));
          if (view.erased![i][frac]) continue;
          ctx.beginPath();
          ctx.moveTo(...this.px(line[k - 1]));
          ctx.lineTo(...this.px(line[k]));
          ctx.stroke();
        }
      });
      ctx.lineWidth = 1;
    }
    if (view.object) {
      const [x, y] = this.px(view.object.pos);
      ctx.beginPath();
      ctx.fillStyle = view.object.pointerBehind || !view.object.behindOnly ? "#ffb300" : "#6d4c41";
      ctx.arc(x, y, Math.max(3, view.object.radius * this.scale), 0, Math.PI * 2);
      ctx.fill();
    }
  }

  private drawFeedback(frame: FrameRecord): void {
    const { ctx } = this;
    const [px, py] = this.px(frame.pointer);

    // speed rings at the current and previous pointer positions
    if (frame.rings) {
      ctx.strokeStyle = "rgba(255, 152, 0, 0.55)";
      for (const pos of [frame.rings.posNow, frame.rings.posPrev]) {
        const [rx, ry] = this.px(pos);
        ctx.lineWidth = Math.max(1, frame.rings.thickness * this.scale);
        ctx.beginPath();
        ctx.arc(rx, ry, 14, 0, Math.PI * 2);
        ctx.stroke();
      }
      ctx.lineWidth = 1;
    }

    // prediction line to the engine's extrapolated next position
    const [ex, ey] = this.px(frame.predictionEnd);
    ctx.strokeStyle = "#66bb6a";
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(ex, ey);
    ctx.stroke();

    // precision circle: radius tracks H, red while clutching
    ctx.setLineDash([4, 4]);
    ctx.strokeStyle = frame.circleClutching ? "#ef5350" : "#42a5f5";
    ctx.beginPath();
    ctx.arc(px, py, Math.max(2, frame.circleRadius * this.scale), 0, Math.PI * 2);
    ctx.stroke();
    ctx.setLineDash([]);

    // the pointer itself
    ctx.fillStyle = "#ffffff";
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, Math.PI * 2);
    ctx.fill();
  }
}
