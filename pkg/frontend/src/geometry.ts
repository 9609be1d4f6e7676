import type { ImageInfo, ViewState } from "./types.js";

/** Rendered tile size for a source region: floor(scale * extent) per axis. */
export function outputDims(scale: number, w: number, h: number): { width: number; height: number } {
  return { width: Math.floor(scale * w), height: Math.floor(scale * h) };
}

/** Snap a slider value to its 0.1 granularity. */
export function quantizeSlider(value: number): number {
  return Math.round(value * 10) / 10;
}

export function clampScale(value: number, maxScale: number): number {
  if (!Number.isFinite(value)) return 1;
  return Math.min(maxScale, Math.max(1, value));
}

/**
 * Source pixels visible in a pane of `panePx` device pixels at `scale`.
 * Each source pixel occupies `scale` device pixels, so the pane shows
 * floor(panePx / scale) of them (at least 1).
 */
export function visibleCells(panePx: number, scale: number): number {
  return Math.max(1, Math.floor(panePx / scale));
}

/**
 * Clamp the viewport center so the visible region stays inside the image.
 * A region wider than the image pins the center to the image center.
 */
export function clampCenter(
  center: number,
  regionCells: number,
  imageCells: number,
): number {
  if (regionCells >= imageCells) return imageCells / 2;
  const half = regionCells / 2;
  return Math.min(imageCells - half, Math.max(half, center));
}

export interface Region {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Integer source region for the current view, guaranteed inside the image. */
export function visibleRegion(
  state: ViewState,
  panePx: number,
  image: ImageInfo,
): Region {
  const w = Math.min(visibleCells(panePx, state.scale), image.width);
  const h = Math.min(visibleCells(panePx, state.scale), image.height);
  const cx = clampCenter(state.centerX, w, image.width);
  const cy = clampCenter(state.centerY, h, image.height);
  const x = Math.min(image.width - w, Math.max(0, Math.round(cx - w / 2)));
  const y = Math.min(image.height - h, Math.max(0, Math.round(cy - h / 2)));
  return { x, y, w, h };
}
