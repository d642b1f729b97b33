/* View state and the pixel <-> time/frequency mapping.
 *
 * The raster response carries its exact extent in X-Extent-* headers; all
 * coordinate math goes through that extent, so overlay boxes line up with
 * the raster no matter how the server quantized the zoom request. */

import type { SessionSettings } from "./types.js";

export interface Extent {
  t0: number;
  t1: number;
  f0: number;
  f1: number;
}

export interface Box {
  tMin: number;
  tMax: number;
  fMin: number;
  fMax: number;
}

export function pxToTime(x: number, widthPx: number, e: Extent): number {
  return e.t0 + (x / widthPx) * (e.t1 - e.t0);
}

export function pxToFreq(y: number, heightPx: number, e: Extent): number {
  return e.f1 - (y / heightPx) * (e.f1 - e.f0);
}

export function timeToPx(t: number, widthPx: number, e: Extent): number {
  return ((t - e.t0) / (e.t1 - e.t0)) * widthPx;
}

export function freqToPx(f: number, heightPx: number, e: Extent): number {
  return (1 - (f - e.f0) / (e.f1 - e.f0)) * heightPx;
}

/** Corners of a drag, in any order, to an ordered box in s/Hz. */
export function boxFromDrag(
  ax: number, ay: number, bx: number, by: number,
  widthPx: number, heightPx: number, e: Extent,
): Box {
  const t = [pxToTime(ax, widthPx, e), pxToTime(bx, widthPx, e)].sort((p, q) => p - q);
  const f = [pxToFreq(ay, heightPx, e), pxToFreq(by, heightPx, e)].sort((p, q) => p - q);
  return { tMin: t[0], tMax: t[1], fMin: Math.max(0, f[0]), fMax: f[1] };
}

export const DEFAULT_SETTINGS: SessionSettings = {
  gain_db: 0,
  clip_seconds: 15,
  window_size: 256,
  overlap_fraction: 0.75,
  window_fn: "hann",
  palette: "viridis",
  contrast_floor_db: -96,
  use_bto_codes: false,
};

/** Everything the widgets mirror; one instance per page. */
export class ViewState {
  fileName: string | null = null;
  segment = 0;
  nSegments = 1;
  extent: Extent | null = null;
  zoom: Box | null = null;
  selection: Box | null = null;
  selectedClass: string | null = null;
  selectedLabelId: string | null = null;
  site: string | null = null;
  settings: SessionSettings = { ...DEFAULT_SETTINGS };
  layout: "grid" | "flex" = "grid";
  columns = 5;
  showGuides = true;
}
