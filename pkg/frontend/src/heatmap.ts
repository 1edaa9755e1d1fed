/** Client-side rendering of a sweep surface as the triangle backdrop.
 *
 * Same color convention as the service-side rasterizer: linear blue (high)
 * to red (low) over the surface's own defined range; undefined points and
 * the outside of the triangle stay transparent.
 */

import { toBarycentric, type TriangleLayout } from "./triangle.js";
import type { SweepPoint } from "./types.js";

export function valueToColor(
  value: number,
  vmin: number,
  vmax: number,
): [number, number, number] {
  const t = vmax === vmin ? 0.5 : (value - vmin) / (vmax - vmin);
  return [Math.round(255 * (1 - t)), 0, Math.round(255 * t)];
}

export function surfaceRange(points: SweepPoint[]): [number, number] | null {
  const defined = points.filter((p) => p.value !== null).map((p) => p.value as number);
  if (!defined.length) {
    return null;
  }
  return [Math.min(...defined), Math.max(...defined)];
}

function nearestPoint(points: SweepPoint[], a: number, b: number, g: number): SweepPoint {
  let best = points[0];
  let bestDist = Infinity;
  for (const p of points) {
    const d =
      (p.alpha - a) * (p.alpha - a) +
      (p.beta - b) * (p.beta - b) +
      (p.gamma - g) * (p.gamma - g);
    if (d < bestDist) {
      bestDist = d;
      best = p;
    }
  }
  return best;
}

/** RGBA pixel buffer for the backdrop (nearest-grid-point shading). */
export function rasterizeSurface(
  points: SweepPoint[],
  layout: TriangleLayout,
  width: number,
  height: number,
): Uint8ClampedArray<ArrayBuffer> {
  const data = new Uint8ClampedArray(width * height * 4);
  const range = surfaceRange(points);
  if (!range) {
    return data;
  }
  const [vmin, vmax] = range;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const bary = toBarycentric(layout, { x, y });
      if (bary.alpha < -1e-9 || bary.beta < -1e-9 || bary.gamma < -1e-9) {
        continue;
      }
      const p = nearestPoint(points, bary.alpha, bary.beta, bary.gamma);
      if (p.value === null) {
        continue;
      }
      const [r, g, b] = valueToColor(p.value, vmin, vmax);
      const offset = (y * width + x) * 4;
      data[offset] = r;
      data[offset + 1] = g;
      data[offset + 2] = b;
      data[offset + 3] = 235;
    }
  }
  return data;
}
