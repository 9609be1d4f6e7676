import type { FetchLike, Meta, TileData, TileRequest } from "./types.js";

export function buildTileUrl(base: string, req: TileRequest): string {
  const q = new URLSearchParams({
    image_id: req.imageId,
    x: String(req.x),
    y: String(req.y),
    w: String(req.w),
    h: String(req.h),
    scale: String(req.scale),
    renderer: req.renderer,
  });
  return `${base}/tile?${q.toString()}`;
}

export async function fetchMeta(base: string, fetchImpl: FetchLike): Promise<Meta> {
  const resp = await fetchImpl(`${base}/meta`);
  if (!resp.ok) {
    throw new Error(`GET /meta failed: ${resp.status} ${await resp.text()}`);
  }
  return (await resp.json()) as Meta;
}

export async function fetchTile(
  base: string,
  req: TileRequest,
  fetchImpl: FetchLike,
): Promise<TileData> {
  const resp = await fetchImpl(buildTileUrl(base, req));
  if (!resp.ok) {
    throw new Error(`tile request failed: ${resp.status} ${await resp.text()}`);
  }
  const blob = await resp.blob();
  return {
    blob,
    width: Number(resp.headers.get("X-Width") ?? 0),
    height: Number(resp.headers.get("X-Height") ?? 0),
    renderMs: Number(resp.headers.get("X-Render-Ms") ?? 0),
  };
}
