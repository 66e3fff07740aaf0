import { describe, expect, it } from "vitest";

import { heatmapPixels } from "../src/heatmap.js";

describe("heatmapPixels", () => {
  it("maps supported cells to white and the rest to dark", () => {
    const { width, height, rgba } = heatmapPixels({
      supported_positions: 2,
      lattice: [2, 2],
      map: [1, 0, 0, 1], // row-major over (x, z)
    });
    expect([width, height]).toEqual([2, 2]);
    // pixel (x=0, z=0): supported -> white
    expect(rgba[0]).toBe(255);
    // pixel (x=1, z=0): map[1*2+0]=0 -> dark
    expect(rgba[4]).toBe(24);
    // pixel (x=0, z=1): map[0*2+1]=0 -> dark
    expect(rgba[(1 * 2 + 0) * 4]).toBe(24);
    // pixel (x=1, z=1): supported -> white
    expect(rgba[(1 * 2 + 1) * 4]).toBe(255);
    // alpha always opaque
    for (let i = 3; i < rgba.length; i += 4) expect(rgba[i]).toBe(255);
  });
});
