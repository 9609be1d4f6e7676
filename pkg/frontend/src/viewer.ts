import { trailingDebounce, type Debounced } from "./debounce.js";
import { clampScale, quantizeSlider, visibleRegion, type Region } from "./geometry.js";
import { Pane, type PaintSink } from "./pane.js";
import type { FetchLike, ImageInfo, Meta, ViewState } from "./types.js";

export const DEBOUNCE_MS = 150;

export interface ViewerOptions {
  base: string;
  meta: Meta;
  /** square pane edge in device pixels */
  panePx: number;
  srSink: PaintSink;
  bicubicSink: PaintSink;
  fetchImpl: FetchLike;
  onError?: (message: string) => void;
  /** fires when a gesture lands, after debounce, with the issued geometry */
  onIssue?: (region: Region, state: ViewState) => void;
}

/**
 * Gesture-to-request orchestration for the side-by-side viewer.
 *
 * Pan and zoom mutate the view state immediately (so the UI can echo the
 * slider position without delay) but tile requests go through a trailing
 * 150 ms debounce: a burst of slider moves issues exactly one request.
 * In comparison mode the model pane and the bicubic pane receive the same
 * region in the same tick, so the two panes always show identical
 * geometry.
 */
export class Viewer {
  readonly state: ViewState;
  private readonly srPane: Pane;
  private readonly bicubicPane: Pane;
  private readonly schedule: Debounced<[]>;
  private readonly options: ViewerOptions;

  constructor(options: ViewerOptions) {
    this.options = options;
    const first = options.meta.images[0];
    this.state = {
      imageId: first ? first.id : "",
      centerX: first ? first.width / 2 : 0,
      centerY: first ? first.height / 2 : 0,
      scale: 1.0,
      comparison: true,
    };
    const err = options.onError ?? (() => undefined);
    this.srPane = new Pane(options.base, options.srSink, options.fetchImpl, err);
    this.bicubicPane = new Pane(options.base, options.bicubicSink, options.fetchImpl, err);
    this.schedule = trailingDebounce(() => this.issue(), DEBOUNCE_MS);
  }

  get empty(): boolean {
    return this.options.meta.images.length === 0;
  }

  currentImage(): ImageInfo | null {
    return this.options.meta.images.find((i) => i.id === this.state.imageId) ?? null;
  }

  /** Scale from the slider: snapped to 0.1 steps, clamped to the service max. */
  setScaleFromSlider(value: number): void {
    this.state.scale = clampScale(quantizeSlider(value), this.options.meta.max_scale);
    this.schedule();
  }

  /** Scale typed as text: any real value in range, e.g. 7.3. */
  setScaleExact(value: number): void {
    this.state.scale = clampScale(value, this.options.meta.max_scale);
    this.schedule();
  }

  panBy(dxCells: number, dyCells: number): void {
    this.state.centerX += dxCells;
    this.state.centerY += dyCells;
    this.schedule();
  }

  selectImage(id: string): void {
    const img = this.options.meta.images.find((i) => i.id === id);
    if (!img) return;
    this.state.imageId = img.id;
    this.state.centerX = img.width / 2;
    this.state.centerY = img.height / 2;
    this.schedule();
  }

  setComparison(on: boolean): void {
    this.state.comparison = on;
    this.schedule();
  }

  /** Force the pending gesture out immediately (initial load). */
  refreshNow(): void {
    this.schedule.cancel();
    this.issue();
  }

  private issue(): void {
    const img = this.currentImage();
    if (!img) return; // empty catalog: never request
    const region = visibleRegion(this.state, this.options.panePx, img);
    // keep the stored center at the clamped position so panning past the
    // edge does not accumulate an invisible offset
    this.state.centerX = region.x + region.w / 2;
    this.state.centerY = region.y + region.h / 2;
    this.options.onIssue?.(region, this.state);
    const base = {
      imageId: img.id,
      x: region.x,
      y: region.y,
      w: region.w,
      h: region.h,
      scale: this.state.scale,
    };
    this.srPane.request({ ...base, renderer: "iste" });
    if (this.state.comparison) {
      this.bicubicPane.request({ ...base, renderer: "bicubic" });
    }
  }
}
