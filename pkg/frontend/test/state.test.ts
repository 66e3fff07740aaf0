import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { StudioController } from "../src/state.js";
import type { CombineRequestBody, CombineResponse } from "../src/types.js";

const DIM = 4;

function makeResponse(body: CombineRequestBody, marker: number): CombineResponse {
  // marker occupied voxels at the start of the volume, rest empty
  return {
    schema_version: 1,
    dim: DIM,
    grid: marker === 0 ? [[0, 64]] : [
      [1, marker],
      [0, 64 - marker],
    ],
    affordance_report: {
      supportability: { supported_positions: marker, lattice: [2, 2], map: [1, 0, 0, 0] },
      containability: {
        spheres_placed: 1,
        contained_volume: 0.1,
        bounding_box_volume: 1.0,
        ratio: 0.1,
      },
    },
    nearest: [
      { index: 0, class_label: "tub", distance: 1.0 },
      { index: 1, class_label: "table", distance: 2.0 },
    ],
  };
}

/** Mock server: records request bodies, lets the test resolve each reply. */
class MockServer {
  bodies: CombineRequestBody[] = [];
  private resolvers: Array<(r: CombineResponse) => void> = [];

  call = (body: CombineRequestBody): Promise<CombineResponse> => {
    this.bodies.push(body);
    return new Promise((resolve) => this.resolvers.push(resolve));
  };

  /** resolve request #i with a response marked by its occupied count */
  resolve(i: number, marker = i + 1): void {
    this.resolvers[i](makeResponse(this.bodies[i], marker));
  }
}

describe("StudioController", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces a slider sweep into one request per settle", async () => {
    const server = new MockServer();
    const rendered: number[] = [];
    const c = new StudioController(server.call, {
      onVolume: (v) => rendered.push(v.data.reduce((a, b) => a + b, 0)),
    });
    // rapid sweep 0.5 -> 0.95 inside one debounce window
    for (let p = 50; p <= 95; p += 5) {
      c.onSliderChange(0.5, p / 100);
      vi.advanceTimersByTime(30);
    }
    expect(server.bodies.length).toBe(0);
    vi.advanceTimersByTime(300);
    expect(server.bodies.length).toBe(1); // one settled request
    expect(server.bodies[0].top_percent).toBeCloseTo(0.95);
    server.resolve(0, 5);
    await vi.runAllTimersAsync();
    expect(rendered).toEqual([5]);
    expect(c.state.acknowledged?.top_percent).toBeCloseTo(0.95);
  });

  it("renders each returned grid across a slow sweep", async () => {
    const server = new MockServer();
    const rendered: number[] = [];
    const c = new StudioController(server.call, {
      onVolume: (v) => rendered.push(v.data.reduce((a, b) => a + b, 0)),
    });
    const stops = [0.5, 0.65, 0.8, 0.95];
    for (const [i, p] of stops.entries()) {
      c.onSliderChange(0.5, p);
      vi.advanceTimersByTime(301); // let each debounce window close
      server.resolve(i, i + 1);
      await vi.runAllTimersAsync();
    }
    expect(server.bodies.map((b) => b.top_percent)).toEqual(stops);
    expect(rendered).toEqual([1, 2, 3, 4]); // every reply rendered, in order
  });

  it("discards an out-of-order response", async () => {
    const server = new MockServer();
    const rendered: number[] = [];
    const c = new StudioController(server.call, {
      onVolume: (v) => rendered.push(v.data.reduce((a, b) => a + b, 0)),
    });
    c.onSliderChange(0.5, 0.6);
    vi.advanceTimersByTime(301); // request 0 sent
    c.onSliderChange(0.5, 0.9);
    vi.advanceTimersByTime(301); // request 1 sent
    expect(server.bodies.length).toBe(2);

    server.resolve(1, 9); // newer response lands first
    await vi.runAllTimersAsync();
    server.resolve(0, 6); // stale response arrives late
    await vi.runAllTimersAsync();

    expect(rendered).toEqual([9]); // stale grid never rendered
    expect(c.state.acknowledged?.top_percent).toBeCloseTo(0.9);
    expect(c.state.volume?.data.reduce((a: number, b: number) => a + b, 0)).toBe(9);
  });

  it("state percents mirror the last acknowledged request after settle", async () => {
    const server = new MockServer();
    const c = new StudioController(server.call);
    c.onSliderChange(0.3, 0.7);
    vi.advanceTimersByTime(301);
    server.resolve(0, 2);
    await vi.runAllTimersAsync();
    expect(c.state.acknowledged).toEqual({
      base: "tub",
      top: "table",
      base_percent: 0.3,
      top_percent: 0.7,
    });
    expect(c.state.requestInFlight).toBe(false);
  });

  it("clamps slider values so requests never leave [0, 1]", async () => {
    const server = new MockServer();
    const c = new StudioController(server.call);
    c.onSliderChange(-0.4, 1.7);
    vi.advanceTimersByTime(301);
    expect(server.bodies[0].base_percent).toBe(0);
    expect(server.bodies[0].top_percent).toBe(1);
  });

  it("network failure sets the error banner and retry re-sends", async () => {
    let fail = true;
    const bodies: CombineRequestBody[] = [];
    const c = new StudioController((body) => {
      bodies.push(body);
      if (fail) return Promise.reject(new Error("connection refused"));
      return Promise.resolve(makeResponse(body, 1));
    });
    c.onSliderChange(0.5, 0.8);
    vi.advanceTimersByTime(301);
    await vi.runAllTimersAsync();
    expect(c.state.error).toMatch(/connection refused/);

    fail = false;
    c.retry();
    await vi.runAllTimersAsync();
    expect(bodies.length).toBe(2);
    expect(c.state.error).toBeNull();
    expect(c.state.volume).not.toBeNull();
  });
});
