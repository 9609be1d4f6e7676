import { outputDims } from "./geometry.js";
import { fetchTile } from "./requests.js";
import type { FetchLike, TileData, TileRequest } from "./types.js";

export interface PaintSink {
  /** Draw a verified tile at its native size: one tile pixel per device pixel. */
  paint(tile: TileData, req: TileRequest): void;
}

/**
 * One display pane: issues tile requests, keeps at most one in flight,
 * and paints only responses that are still current.
 *
 * Every `request` bumps a generation counter; a response whose generation
 * is no longer the latest is dropped unpainted.  While a request is in
 * flight, newer requests overwrite a one-slot queue, so a stream of
 * gestures degrades to "latest wins" rather than a backlog.  A tile whose
 * dimensions disagree with floor(scale * region) is rejected and re-tried
 * exactly once.
 */
export class Pane {
  private generation = 0;
  private inflight = false;
  private queued: TileRequest | null = null;

  constructor(
    private readonly base: string,
    private readonly sink: PaintSink,
    private readonly fetchImpl: FetchLike,
    private readonly onError: (message: string) => void = () => undefined,
  ) {}

  get currentGeneration(): number {
    return this.generation;
  }

  get busy(): boolean {
    return this.inflight;
  }

  request(req: TileRequest): void {
    this.generation += 1;
    if (this.inflight) {
      this.queued = req;
      return;
    }
    void this.run(req, this.generation, 0);
  }

  private async run(req: TileRequest, gen: number, retries: number): Promise<void> {
    this.inflight = true;
    let tile: TileData | null = null;
    let failure: string | null = null;
    try {
      tile = await fetchTile(this.base, req, this.fetchImpl);
    } catch (err) {
      failure = err instanceof Error ? err.message : String(err);
    }

    if (gen !== this.generation) {
      // superseded while in flight; whatever came back is stale
      this.finish();
      return;
    }

    if (failure !== null) {
      this.onError(failure);
      this.finish();
      return;
    }

    const want = outputDims(req.scale, req.w, req.h);
    const got = tile as TileData;
    if (got.width !== want.width || got.height !== want.height) {
      if (retries === 0) {
        void this.run(req, gen, 1);
        return;
      }
      this.onError(
        `tile dims ${got.width}x${got.height} do not match expected ` +
          `${want.width}x${want.height}`,
      );
      this.finish();
      return;
    }

    this.sink.paint(got, req);
    this.finish();
  }

  private finish(): void {
    this.inflight = false;
    const next = this.queued;
    this.queued = null;
    if (next !== null) {
      void this.run(next, this.generation, 0);
    }
  }
}
