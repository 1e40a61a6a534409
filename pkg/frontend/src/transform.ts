/**
 * Canvas <-> voxel coordinate mapping for a rendered slice.
 *
 * A slice of `width x height` voxels is drawn scaled by `scale` canvas
 * pixels per voxel with a top-left offset; voxel centers are at half-voxel
 * positions. canvasToVoxel is the exact inverse of voxelToCanvas.
 */

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitTransform(
  sliceWidth: number,
  sliceHeight: number,
  canvasWidth: number,
  canvasHeight: number,
): ViewTransform {
  const scale = Math.min(canvasWidth / sliceWidth, canvasHeight / sliceHeight);
  return {
    scale,
    offsetX: (canvasWidth - sliceWidth * scale) / 2,
    offsetY: (canvasHeight - sliceHeight * scale) / 2,
  };
}

export function voxelToCanvas(t: ViewTransform, u: number, v: number): { x: number; y: number } {
  return {
    x: t.offsetX + (u + 0.5) * t.scale,
    y: t.offsetY + (v + 0.5) * t.scale,
  };
}

export function canvasToVoxel(t: ViewTransform, x: number, y: number): { u: number; v: number } {
  return {
    u: (x - t.offsetX) / t.scale - 0.5,
    v: (y - t.offsetY) / t.scale - 0.5,
  };
}
