/** Wire types of the costlens service API. */

export interface SceneInfo {
  id: string;
  width: number;
  height: number;
}

export interface BaryPoint {
  alpha: number;
  beta: number;
  gamma: number;
}

export interface MetricCell {
  precision: number | null;
  recall: number | null;
  tp: number;
  fp: number;
  fn: number;
  fp_segments: number;
  fn_segments: number;
}

/** class name -> RoI label ("1", "2", "full") -> cell */
export type MetricsPayload = Record<string, Record<string, MetricCell>>;

export interface PaletteEntry {
  class: string;
  index: number;
  color: [number, number, number];
}

export interface DecideResponse {
  mask_png_b64: string;
  palette: PaletteEntry[];
  metrics: MetricsPayload;
  point: BaryPoint;
}

export interface SweepPoint {
  alpha: number;
  beta: number;
  gamma: number;
  value: number | null;
}

export interface SweepResponse {
  metric: string;
  class: string;
  roi: number | null;
  step: number;
  points: SweepPoint[];
}
