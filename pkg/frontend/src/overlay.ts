/** Mask and seed-echo pixel buffers composited over the slice image. */

export type Rgb = [number, number, number];

export const MASK_COLOR: Rgb = [80, 220, 100];
export const FG_COLOR: Rgb = [70, 160, 255];
export const BG_COLOR: Rgb = [255, 110, 90];

/** Expand a decoded binary mask into RGBA bytes at the given opacity. */
export function maskToRgba(
  mask: Uint8Array,
  width: number,
  height: number,
  color: Rgb,
  opacity: number,
): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(width * height * 4);
  const alpha = Math.round(Math.min(Math.max(opacity, 0), 1) * 255);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      rgba[4 * i] = color[0];
      rgba[4 * i + 1] = color[1];
      rgba[4 * i + 2] = color[2];
      rgba[4 * i + 3] = alpha;
    }
  }
  return rgba;
}
