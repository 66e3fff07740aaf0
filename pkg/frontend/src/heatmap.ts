/** Supportability map -> RGBA pixels, white = supported, rendered as a
 * top-down stability image. Pure so it is testable without a canvas. */

import type { SupportabilityReport } from "./types.js";

export function heatmapPixels(report: SupportabilityReport): {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
} {
  const [nx, nz] = report.lattice;
  const rgba = new Uint8ClampedArray(new ArrayBuffer(nx * nz * 4));
  for (let z = 0; z < nz; z++) {
    for (let x = 0; x < nx; x++) {
      const supported = report.map[x * nz + z] !== 0;
      const offset = (z * nx + x) * 4;
      const v = supported ? 255 : 24;
      rgba[offset] = v;
      rgba[offset + 1] = v;
      rgba[offset + 2] = v;
      rgba[offset + 3] = 255;
    }
  }
  return { width: nx, height: nz, rgba };
}

export function drawHeatmap(canvas: HTMLCanvasElement, report: SupportabilityReport): void {
  const { width, height, rgba } = heatmapPixels(report);
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
}
