/** Wire types for the design-server JSON API. */

export type RlePair = [number, number];

export interface ClassInfo {
  label: string;
  affordances: string[];
  sample_count: number;
}

export interface ClassesResponse {
  schema_version: number;
  classes: ClassInfo[];
}

export interface SupportabilityReport {
  supported_positions: number;
  lattice: [number, number];
  map: number[];
}

export interface ContainabilityReport {
  spheres_placed: number;
  contained_volume: number;
  bounding_box_volume: number;
  ratio: number;
}

export interface AffordanceReport {
  supportability: SupportabilityReport;
  containability: ContainabilityReport;
}

export interface NearestEntry {
  index: number;
  class_label: string;
  distance: number;
}

export interface CombineResponse {
  schema_version: number;
  dim: number;
  grid: RlePair[];
  affordance_report: AffordanceReport;
  nearest: NearestEntry[];
}

export interface CombineRequestBody {
  base: string;
  top: string;
  base_percent: number;
  top_percent: number;
}

export interface EssenceResponse {
  schema_version: number;
  label: string;
  sample_count: number;
  dim: number;
  grid: RlePair[];
}
