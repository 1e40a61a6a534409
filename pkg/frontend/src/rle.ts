/**
 * Run-length codec for binary mask slices.
 *
 * The wire format is per-row alternating run lengths starting with the zero
 * value: `[width]` is an empty row, `[0, width]` a full one. Decoding flips
 * 0/1 after every run.
 */

export function decodeRows(rows: number[][], width: number): Uint8Array {
  const out = new Uint8Array(rows.length * width);
  for (let r = 0; r < rows.length; r++) {
    let pos = 0;
    let val = 0;
    for (const run of rows[r]) {
      if (run < 0) throw new Error(`row ${r}: negative run length ${run}`);
      if (val === 1) out.fill(1, r * width + pos, r * width + pos + run);
      pos += run;
      val = 1 - val;
    }
    if (pos !== width) {
      throw new Error(`row ${r} decodes to ${pos} values, expected ${width}`);
    }
  }
  return out;
}

export function encodeRows(mask: Uint8Array, width: number, height: number): number[][] {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} != ${width}x${height}`);
  }
  const rows: number[][] = [];
  for (let r = 0; r < height; r++) {
    const runs: number[] = [];
    let val = 0;
    let count = 0;
    for (let c = 0; c < width; c++) {
      const bit = mask[r * width + c] ? 1 : 0;
      if (bit === val) {
        count++;
      } else {
        runs.push(count);
        val = bit;
        count = 1;
      }
    }
    runs.push(count);
    rows.push(runs);
  }
  return rows;
}

/** Total number of set voxels across decoded rows. */
export function countOnes(rows: number[][]): number {
  let total = 0;
  for (const runs of rows) {
    for (let i = 1; i < runs.length; i += 2) total += runs[i];
  }
  return total;
}
