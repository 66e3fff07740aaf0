/**
 * Studio state machine.
 *
 * Slider moves are debounced into POST /combine calls; every request
 * carries a sequence number and a response is applied only when it is
 * newer than the last applied one, so stale (out-of-order) replies can
 * never overwrite fresher state.
 */

import { debounce, type Debounced } from "./debounce.js";
import { decodeRle, type VoxelVolume } from "./rle.js";
import type { AffordanceReport, CombineRequestBody, CombineResponse, NearestEntry } from "./types.js";

export interface StudioState {
  baseLabel: string;
  topLabel: string;
  basePercent: number;
  topPercent: number;
  volume: VoxelVolume | null;
  affordances: AffordanceReport | null;
  nearest: NearestEntry[];
  requestInFlight: boolean;
  /** parameters of the last acknowledged (applied) response */
  acknowledged: CombineRequestBody | null;
  error: string | null;
}

export interface StudioEvents {
  onState?: (state: StudioState) => void;
  onVolume?: (volume: VoxelVolume) => void;
}

export type CombineCall = (body: CombineRequestBody) => Promise<CombineResponse>;

const clamp01 = (p: number) => Math.min(1, Math.max(0, p));

export class StudioController {
  readonly state: StudioState;
  private sequence = 0;
  private applied = 0;
  private inFlightCount = 0;
  private scheduled: Debounced<[]>;
  private lastSent: CombineRequestBody | null = null;

  constructor(
    private combineCall: CombineCall,
    private events: StudioEvents = {},
    debounceMs = 300,
  ) {
    this.state = {
      baseLabel: "tub",
      topLabel: "table",
      basePercent: 0.5,
      topPercent: 0.5,
      volume: null,
      affordances: null,
      nearest: [],
      requestInFlight: false,
      acknowledged: null,
      error: null,
    };
    this.scheduled = debounce(() => this.send(), debounceMs);
  }

  setClasses(baseLabel: string, topLabel: string): void {
    this.state.baseLabel = baseLabel;
    this.state.topLabel = topLabel;
    this.scheduled();
  }

  onSliderChange(basePercent: number, topPercent: number): void {
    this.state.basePercent = clamp01(basePercent);
    this.state.topPercent = clamp01(topPercent);
    this.scheduled();
  }

  /** re-send after a network failure */
  retry(): void {
    this.state.error = null;
    this.scheduled();
    this.scheduled.flush();
  }

  private notify(): void {
    this.events.onState?.(this.state);
  }

  private send(): void {
    const body: CombineRequestBody = {
      base: this.state.baseLabel,
      top: this.state.topLabel,
      base_percent: this.state.basePercent,
      top_percent: this.state.topPercent,
    };
    this.lastSent = body;
    const seq = ++this.sequence;
    this.inFlightCount += 1;
    this.state.requestInFlight = true;
    this.notify();
    this.combineCall(body)
      .then((response) => this.apply(seq, body, response))
      .catch((error: unknown) => {
        if (seq > this.applied) {
          this.state.error = error instanceof Error ? error.message : String(error);
        }
      })
      .finally(() => {
        this.inFlightCount -= 1;
        this.state.requestInFlight = this.inFlightCount > 0;
        this.notify();
      });
  }

  private apply(seq: number, body: CombineRequestBody, response: CombineResponse): void {
    if (seq <= this.applied) {
      return; // stale: a newer response has already landed
    }
    this.applied = seq;
    this.state.volume = decodeRle(response.grid, response.dim);
    this.state.affordances = response.affordance_report;
    this.state.nearest = response.nearest;
    this.state.acknowledged = body;
    this.state.error = null;
    this.events.onVolume?.(this.state.volume);
  }
}
