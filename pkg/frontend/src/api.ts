/** Thin typed client over the service endpoints; fetch is injectable so
 * tests can feed recorded fixtures through the same code path. */

import type {
  BaryPoint,
  DecideResponse,
  SceneInfo,
  SweepResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public detail = "",
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
    private base = "",
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let error = resp.statusText;
      let detail = "";
      try {
        const doc = await resp.json();
        error = doc.error ?? error;
        detail = doc.detail ?? "";
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, error, detail);
    }
    return (await resp.json()) as T;
  }

  scenes(): Promise<SceneInfo[]> {
    return this.json<SceneInfo[]>("/api/scenes");
  }

  decide(scene: string, point: BaryPoint): Promise<DecideResponse> {
    return this.json<DecideResponse>("/api/decide", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ scene, ...point }),
    });
  }

  sweep(
    metric: string,
    className: string,
    roi: string,
    step: number,
  ): Promise<SweepResponse> {
    const params = new URLSearchParams({
      metric,
      class: className,
      roi,
      step: String(step),
    });
    return this.json<SweepResponse>(`/api/sweep?${params}`);
  }

  corners(): Promise<Record<string, { order: string[]; matrix: number[][] }>> {
    return this.json("/api/corners");
  }

  previewUrl(sceneId: string): string {
    return `${this.base}/api/scenes/${sceneId}/preview`;
  }

  gtUrl(sceneId: string): string {
    return `${this.base}/api/scenes/${sceneId}/gt`;
  }
}
