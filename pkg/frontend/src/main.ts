import { fetchMeta } from "./requests.js";
import { Viewer } from "./viewer.js";
import type { PaintSink, } from "./pane.js";
import type { FetchLike, Meta, TileData, TileRequest } from "./types.js";

const PANE_PX = 480;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

/**
 * Paint a tile 1:1 into a canvas: the canvas buffer is resized to the tile
 * and the bitmap drawn at its native size.  No scaling happens here or in
 * CSS, so what the model rendered is what the screen shows.
 */
function canvasSink(canvas: HTMLCanvasElement, onPainted: (tile: TileData) => void): PaintSink {
  return {
    paint(tile: TileData, _req: TileRequest): void {
      void createImageBitmap(tile.blob).then((bmp) => {
        canvas.width = tile.width;
        canvas.height = tile.height;
        canvas.style.width = `${tile.width}px`;
        canvas.style.height = `${tile.height}px`;
        const ctx = canvas.getContext("2d");
        if (!ctx) return;
        ctx.imageSmoothingEnabled = false;
        ctx.drawImage(bmp, 0, 0);
        bmp.close();
        onPainted(tile);
      });
    },
  };
}

function showError(message: string): void {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message;
  banner.style.display = "block";
  window.setTimeout(() => {
    banner.style.display = "none";
  }, 4000);
}

async function boot(): Promise<void> {
  const base = new URLSearchParams(window.location.search).get("api") ?? "";
  const fetchImpl: FetchLike = (url) => fetch(url);

  let meta: Meta;
  try {
    meta = await fetchMeta(base, fetchImpl);
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
    el<HTMLDivElement>("empty-state").textContent =
      "Could not reach the tile service. Start it (texsr serve ...) and reload.";
    el<HTMLDivElement>("empty-state").style.display = "block";
    return;
  }

  if (meta.images.length === 0) {
    el<HTMLDivElement>("empty-state").textContent =
      "The service has no images loaded. Point it at a directory of images and reload.";
    el<HTMLDivElement>("empty-state").style.display = "block";
    return;
  }

  const readout = el<HTMLSpanElement>("readout");
  let lastMs: number | null = null;

  const viewer = new Viewer({
    base,
    meta,
    panePx: PANE_PX,
    srSink: canvasSink(el<HTMLCanvasElement>("sr-canvas"), (tile) => {
      lastMs = tile.renderMs;
      readout.textContent = `scale x${viewer.state.scale.toFixed(1)} | render ${lastMs.toFixed(1)} ms`;
    }),
    bicubicSink: canvasSink(el<HTMLCanvasElement>("bicubic-canvas"), () => undefined),
    fetchImpl,
    onError: showError,
  });

  const select = el<HTMLSelectElement>("image-select");
  for (const img of meta.images) {
    const opt = document.createElement("option");
    opt.value = img.id;
    opt.textContent = `${img.id} (${img.width}x${img.height})`;
    select.appendChild(opt);
  }
  select.addEventListener("change", () => viewer.selectImage(select.value));

  const slider = el<HTMLInputElement>("scale-slider");
  const scaleText = el<HTMLInputElement>("scale-text");
  slider.max = String(meta.max_scale);
  slider.addEventListener("input", () => {
    viewer.setScaleFromSlider(Number(slider.value));
    scaleText.value = viewer.state.scale.toFixed(1);
  });
  scaleText.addEventListener("change", () => {
    viewer.setScaleExact(Number(scaleText.value));
    slider.value = String(viewer.state.scale);
  });

  const comparison = el<HTMLInputElement>("comparison-toggle");
  comparison.checked = viewer.state.comparison;
  comparison.addEventListener("change", () => {
    el<HTMLDivElement>("bicubic-pane").style.display = comparison.checked ? "block" : "none";
    viewer.setComparison(comparison.checked);
  });

  // drag to pan; device pixels translate to source cells through the scale
  for (const id of ["sr-canvas", "bicubic-canvas"]) {
    const canvas = el<HTMLCanvasElement>(id);
    let dragging = false;
    let px = 0;
    let py = 0;
    canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      px = e.clientX;
      py = e.clientY;
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      viewer.panBy((px - e.clientX) / viewer.state.scale, (py - e.clientY) / viewer.state.scale);
      px = e.clientX;
      py = e.clientY;
    });
    canvas.addEventListener("pointerup", () => {
      dragging = false;
    });
  }

  slider.value = "1";
  scaleText.value = "1.0";
  viewer.refreshNow();
}

void boot();
