export interface ImageInfo {
  id: string;
  width: number;
  height: number;
}

export interface Meta {
  images: ImageInfo[];
  renderers: string[];
  max_scale: number;
  max_region?: number;
  checkpoint: string;
}

export type Renderer = "iste" | "bicubic";

export interface TileRequest {
  imageId: string;
  x: number;
  y: number;
  w: number;
  h: number;
  scale: number;
  renderer: Renderer;
}

export interface TileData {
  blob: Blob;
  width: number;
  height: number;
  renderMs: number;
}

export interface ViewState {
  imageId: string;
  /** viewport center in source-pixel coordinates */
  centerX: number;
  centerY: number;
  scale: number;
  comparison: boolean;
}

/** The subset of fetch the client needs; tests substitute stubs. */
export type FetchLike = (url: string) => Promise<ResponseLike>;

export interface ResponseLike {
  ok: boolean;
  status: number;
  headers: { get(name: string): string | null };
  blob(): Promise<Blob>;
  text(): Promise<string>;
  json(): Promise<unknown>;
}
