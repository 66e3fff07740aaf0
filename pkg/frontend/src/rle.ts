/** Run-length grid payloads: decode to a flat occupancy volume. */

import type { RlePair } from "./types.js";

export interface VoxelVolume {
  dim: number;
  /** canonical order: x fastest, then z, then y */
  data: Uint8Array;
}

export function decodeRle(pairs: RlePair[], dim: number): VoxelVolume {
  const expected = dim * dim * dim;
  const data = new Uint8Array(expected);
  let at = 0;
  for (const [value, count] of pairs) {
    if (count < 0 || (value !== 0 && value !== 1)) {
      throw new Error(`malformed RLE pair [${value}, ${count}]`);
    }
    if (at + count > expected) {
      throw new Error(`RLE overflows ${expected} voxels`);
    }
    data.fill(value, at, at + count);
    at += count;
  }
  if (at !== expected) {
    throw new Error(`RLE totals ${at}, expected ${expected}`);
  }
  return { dim, data };
}

/** Index into the canonical flat order. */
export function voxelAt(volume: VoxelVolume, x: number, y: number, z: number): number {
  const d = volume.dim;
  return volume.data[y * d * d + z * d + x];
}

export function occupiedCount(volume: VoxelVolume): number {
  let n = 0;
  for (const v of volume.data) n += v;
  return n;
}

/** Occupied voxel centers, in voxel units, for instanced rendering. */
export function occupiedCenters(volume: VoxelVolume): Float32Array {
  const out: number[] = [];
  const d = volume.dim;
  for (let y = 0; y < d; y++) {
    for (let z = 0; z < d; z++) {
      for (let x = 0; x < d; x++) {
        if (volume.data[y * d * d + z * d + x]) {
          out.push(x + 0.5, y + 0.5, z + 0.5);
        }
      }
    }
  }
  return new Float32Array(out);
}
