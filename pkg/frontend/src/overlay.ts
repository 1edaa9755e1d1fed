/** Mask/ground-truth compositing model (pure pixel math, DOM-free).
 *
 * The service returns masks as grayscale PNGs whose pixel values are class
 * indices; the palette legend from the same response colorizes them here.
 * Opacity 0 shows the scene preview only, 1 the prediction only; a
 * highlighted class keeps its full color while every other class is dimmed.
 */

import type { PaletteEntry } from "./types.js";

export function paletteLookup(palette: PaletteEntry[]): Map<number, [number, number, number]> {
  const map = new Map<number, [number, number, number]>();
  for (const entry of palette) {
    map.set(entry.index, entry.color);
  }
  return map;
}

/** Colorize class indices into an RGBA buffer. */
export function colorizeIndices(
  indices: ArrayLike<number>,
  palette: PaletteEntry[],
  highlightIndex: number | null = null,
): Uint8ClampedArray<ArrayBuffer> {
  const lookup = paletteLookup(palette);
  const out = new Uint8ClampedArray(indices.length * 4);
  for (let i = 0; i < indices.length; i++) {
    const color = lookup.get(indices[i]) ?? [0, 0, 0];
    const dim = highlightIndex !== null && indices[i] !== highlightIndex ? 0.25 : 1.0;
    out[i * 4] = Math.round(color[0] * dim);
    out[i * 4 + 1] = Math.round(color[1] * dim);
    out[i * 4 + 2] = Math.round(color[2] * dim);
    out[i * 4 + 3] = 255;
  }
  return out;
}

/** Blend the colorized mask over the base image at the given opacity. */
export function compositeOver(
  base: Uint8ClampedArray,
  mask: Uint8ClampedArray,
  opacity: number,
): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(base.length);
  const w = Math.min(Math.max(opacity, 0), 1);
  for (let i = 0; i < base.length; i += 4) {
    out[i] = Math.round((1 - w) * base[i] + w * mask[i]);
    out[i + 1] = Math.round((1 - w) * base[i + 1] + w * mask[i + 1]);
    out[i + 2] = Math.round((1 - w) * base[i + 2] + w * mask[i + 2]);
    out[i + 3] = 255;
  }
  return out;
}
