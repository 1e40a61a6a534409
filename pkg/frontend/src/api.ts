/** Typed client for the segmentation service; the UI's only data path. */

export type Axis = "axial" | "sagittal" | "coronal";

export interface VolumeMeta {
  dims: [number, number, number];
  spacing: [number, number, number];
  origin: [number, number, number];
  intensity_min: number;
  intensity_max: number;
}

export interface ServerStroke {
  label: 1 | 2;
  axis: Axis;
  slice_index: number;
  brush_radius_voxels: number;
  polyline: Array<[number, number]>;
}

export interface SeedPayload {
  dims: [number, number, number];
  strokes: ServerStroke[];
}

export interface SeedCounts {
  foreground: number;
  background: number;
}

export interface SegmentRequest {
  margin_fraction?: number;
  connectivity?: 6 | 26;
  max_iterations?: number;
  workers?: number;
}

export interface SegmentSummary {
  iterations_run: number;
  converged: boolean;
  wall_time_ms: number;
  changed_total: number;
  foreground_voxels: number;
  mask_sha256: string;
}

export interface MaskSliceRLE {
  axis: Axis;
  index: number;
  width: number;
  height: number;
  rows: number[][];
}

export interface MetricsReport {
  dsc: number;
  hausdorff_voxel: number;
  volume_a_cm3: number;
  volume_r_cm3: number;
  voxels_a: number;
  voxels_r: number;
  voxels_intersection: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) throw new ApiError(response.status, await parseDetail(response));
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getVolume(): Promise<VolumeMeta> {
    return this.request<VolumeMeta>("/api/volume");
  }

  sliceUrl(axis: Axis, index: number, window?: number, level?: number): string {
    const params = new URLSearchParams();
    if (window !== undefined) params.set("window", String(window));
    if (level !== undefined) params.set("level", String(level));
    const query = params.toString();
    return `${this.baseUrl}/api/slice/${axis}/${index}${query ? "?" + query : ""}`;
  }

  postSeeds(payload: SeedPayload): Promise<SeedCounts> {
    return this.post<SeedCounts>("/api/seeds", payload);
  }

  clearSeeds(): Promise<SeedCounts> {
    return this.request<SeedCounts>("/api/seeds", { method: "DELETE" });
  }

  segment(req: SegmentRequest = {}): Promise<SegmentSummary> {
    return this.post<SegmentSummary>("/api/segment", req);
  }

  maskSlice(axis: Axis, index: number): Promise<MaskSliceRLE> {
    return this.request<MaskSliceRLE>(`/api/mask/slice/${axis}/${index}`);
  }

  postEdit(ops: string): Promise<SegmentSummary> {
    return this.post<SegmentSummary>("/api/post", { ops });
  }

  metrics(): Promise<MetricsReport> {
    return this.request<MetricsReport>("/api/metrics");
  }
}
