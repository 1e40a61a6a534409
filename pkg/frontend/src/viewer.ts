/** Canvas rendering: base slice PNG, mask overlay, seed echo. */

import type { Axis } from "./api.js";
import { BG_COLOR, FG_COLOR, MASK_COLOR, maskToRgba } from "./overlay.js";
import { fitTransform, type ViewTransform } from "./transform.js";

export interface SliceGeometry {
  width: number;
  height: number;
}

/** In-plane slice sizes and slice counts per axis for (nx, ny, nz) dims. */
export function sliceGeometry(dims: [number, number, number], axis: Axis): SliceGeometry {
  const [nx, ny, nz] = dims;
  if (axis === "axial") return { width: nx, height: ny };
  if (axis === "sagittal") return { width: ny, height: nz };
  return { width: nx, height: nz };
}

export function sliceCount(dims: [number, number, number], axis: Axis): number {
  const [nx, ny, nz] = dims;
  return axis === "axial" ? nz : axis === "sagittal" ? nx : ny;
}

export class SliceViewer {
  private base: ImageBitmap | null = null;
  private maskBuffer: Uint8Array | null = null;
  private echo: Uint8Array;
  private geometry: SliceGeometry = { width: 1, height: 1 };
  transform: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };
  overlayOpacity = 0.45;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.echo = new Uint8Array(0);
  }

  setGeometry(geometry: SliceGeometry): void {
    this.geometry = geometry;
    this.echo = new Uint8Array(geometry.width * geometry.height);
    this.transform = fitTransform(
      geometry.width,
      geometry.height,
      this.canvas.width,
      this.canvas.height,
    );
  }

  setBase(bitmap: ImageBitmap): void {
    this.base = bitmap;
  }

  setMask(decoded: Uint8Array | null): void {
    this.maskBuffer = decoded;
  }

  clearEcho(): void {
    this.echo.fill(0);
  }

  paintEcho(voxels: Array<[number, number]>, label: 1 | 2): void {
    for (const [u, v] of voxels) {
      this.echo[v * this.geometry.width + u] = label;
    }
  }

  private drawBuffer(buffer: Uint8ClampedArray<ArrayBuffer>): void {
    const { width, height } = this.geometry;
    const ctx = this.canvas.getContext("2d")!;
    const off = document.createElement("canvas");
    off.width = width;
    off.height = height;
    off.getContext("2d")!.putImageData(new ImageData(buffer, width, height), 0, 0);
    const t = this.transform;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(off, t.offsetX, t.offsetY, width * t.scale, height * t.scale);
  }

  render(): void {
    const ctx = this.canvas.getContext("2d")!;
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    const { width, height } = this.geometry;
    const t = this.transform;
    if (this.base) {
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(this.base, t.offsetX, t.offsetY, width * t.scale, height * t.scale);
    }
    if (this.maskBuffer && this.overlayOpacity > 0) {
      this.drawBuffer(maskToRgba(this.maskBuffer, width, height, MASK_COLOR, this.overlayOpacity));
    }
    if (this.echo.some((v) => v !== 0)) {
      const fg = Uint8Array.from(this.echo, (v) => (v === 1 ? 1 : 0));
      const bg = Uint8Array.from(this.echo, (v) => (v === 2 ? 1 : 0));
      if (fg.some((v) => v)) this.drawBuffer(maskToRgba(fg, width, height, FG_COLOR, 0.8));
      if (bg.some((v) => v)) this.drawBuffer(maskToRgba(bg, width, height, BG_COLOR, 0.8));
    }
  }
}
