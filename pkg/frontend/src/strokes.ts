/**
 * Stroke building: pointer paths in voxel coordinates -> seed payloads,
 * plus the in-plane brush rule mirrored locally for the immediate echo.
 */

import type { Axis, SeedPayload, ServerStroke } from "./api.js";

export interface UiStroke {
  label: 1 | 2;
  axis: Axis;
  sliceIndex: number;
  radius: number;
  points: Array<[number, number]>;
}

/** Liang-Barsky test: does segment p0-p1 touch [0, w-1] x [0, h-1]? */
function segmentTouchesRect(
  p0: [number, number],
  p1: [number, number],
  width: number,
  height: number,
): boolean {
  const [x0, y0] = p0;
  const dx = p1[0] - x0;
  const dy = p1[1] - y0;
  let t0 = 0;
  let t1 = 1;
  const edges: Array<[number, number]> = [
    [-dx, x0],
    [dx, width - 1 - x0],
    [-dy, y0],
    [dy, height - 1 - y0],
  ];
  for (const [p, q] of edges) {
    if (p === 0) {
      if (q < 0) return false;
    } else {
      const r = q / p;
      if (p < 0) {
        if (r > t1) return false;
        if (r > t0) t0 = r;
      } else {
        if (r < t0) return false;
        if (r < t1) t1 = r;
      }
    }
  }
  return true;
}

/** Clamp a pointer path into slice bounds; empty when the path never
 * touches the slice. Pointer samples are dense, so endpoint clamping is an
 * adequate stand-in for exact per-segment clipping. */
export function clipStroke(
  points: Array<[number, number]>,
  width: number,
  height: number,
): Array<[number, number]> {
  let touches = false;
  for (let i = 0; i < points.length && !touches; i++) {
    const next = points[Math.min(i + 1, points.length - 1)];
    touches = segmentTouchesRect(points[i], next, width, height);
  }
  if (!touches) return [];
  return points.map(([u, v]) => [
    Math.min(Math.max(u, 0), width - 1),
    Math.min(Math.max(v, 0), height - 1),
  ]);
}

export function toServerStroke(stroke: UiStroke): ServerStroke {
  return {
    label: stroke.label,
    axis: stroke.axis,
    slice_index: stroke.sliceIndex,
    brush_radius_voxels: stroke.radius,
    polyline: stroke.points.map(([u, v]) => [u, v]),
  };
}

export function buildSeedPayload(
  dims: [number, number, number],
  strokes: UiStroke[],
): SeedPayload {
  return { dims, strokes: strokes.map(toServerStroke) };
}

/**
 * Lattice points whose centers lie within `radius` of segment p0-p1
 * (Euclidean, inclusive), clipped to the slice. Matches the server's
 * rasterization rule so the local echo shows exactly what will be painted.
 */
export function segmentVoxels(
  p0: [number, number],
  p1: [number, number],
  radius: number,
  width: number,
  height: number,
): Array<[number, number]> {
  const [u0, v0] = p0;
  const [u1, v1] = p1;
  const loU = Math.max(0, Math.floor(Math.min(u0, u1) - radius));
  const hiU = Math.min(width - 1, Math.ceil(Math.max(u0, u1) + radius));
  const loV = Math.max(0, Math.floor(Math.min(v0, v1) - radius));
  const hiV = Math.min(height - 1, Math.ceil(Math.max(v0, v1) + radius));
  const du = u1 - u0;
  const dv = v1 - v0;
  const len2 = du * du + dv * dv;
  const r2 = radius * radius;
  const hits: Array<[number, number]> = [];
  for (let v = loV; v <= hiV; v++) {
    for (let u = loU; u <= hiU; u++) {
      let d2: number;
      if (len2 === 0) {
        d2 = (u - u0) ** 2 + (v - v0) ** 2;
      } else {
        const t = Math.min(Math.max(((u - u0) * du + (v - v0) * dv) / len2, 0), 1);
        d2 = (u - (u0 + t * du)) ** 2 + (v - (v0 + t * dv)) ** 2;
      }
      if (d2 <= r2) hits.push([u, v]);
    }
  }
  return hits;
}

/** All voxels a full stroke paints (deduplicated), for the local echo. */
export function strokeVoxels(
  stroke: UiStroke,
  width: number,
  height: number,
): Array<[number, number]> {
  const seen = new Set<number>();
  const out: Array<[number, number]> = [];
  const add = (pts: Array<[number, number]>) => {
    for (const [u, v] of pts) {
      const key = v * width + u;
      if (!seen.has(key)) {
        seen.add(key);
        out.push([u, v]);
      }
    }
  };
  const pts = stroke.points;
  if (pts.length === 1) {
    add(segmentVoxels(pts[0], pts[0], stroke.radius, width, height));
  } else {
    for (let i = 0; i + 1 < pts.length; i++) {
      add(segmentVoxels(pts[i], pts[i + 1], stroke.radius, width, height));
    }
  }
  return out;
}
