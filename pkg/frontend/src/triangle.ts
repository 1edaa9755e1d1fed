/** Triangle geometry: the value-space simplex drawn on screen.
 *
 * Layout convention matches the published figures: the robotistic corner at
 * the top, altruistic bottom-left, egoistic bottom-right. Barycentric
 * (alpha, beta, gamma) weights map to those three corners in that order.
 */

import type { BaryPoint } from "./types.js";

export interface Vec2 {
  x: number;
  y: number;
}

export interface TriangleLayout {
  top: Vec2;
  left: Vec2;
  right: Vec2;
}

export function defaultLayout(width: number, height: number, pad = 0.08): TriangleLayout {
  const px = pad * width;
  const py = pad * height;
  return {
    top: { x: width / 2, y: py },
    left: { x: px, y: height - py },
    right: { x: width - px, y: height - py },
  };
}

export function toPixel(layout: TriangleLayout, p: BaryPoint): Vec2 {
  return {
    x: p.alpha * layout.top.x + p.beta * layout.left.x + p.gamma * layout.right.x,
    y: p.alpha * layout.top.y + p.beta * layout.left.y + p.gamma * layout.right.y,
  };
}

/** Invert the affine map; the result is unclamped and may leave the simplex. */
export function toBarycentric(layout: TriangleLayout, pos: Vec2): BaryPoint {
  const { top, left, right } = layout;
  const det =
    (left.y - right.y) * (top.x - right.x) +
    (right.x - left.x) * (top.y - right.y);
  const alpha =
    ((left.y - right.y) * (pos.x - right.x) +
      (right.x - left.x) * (pos.y - right.y)) /
    det;
  const beta =
    ((right.y - top.y) * (pos.x - right.x) +
      (top.x - right.x) * (pos.y - right.y)) /
    det;
  return { alpha, beta, gamma: 1 - alpha - beta };
}

/** Euclidean projection onto the probability simplex (nearest valid point). */
export function clampToSimplex(p: BaryPoint): BaryPoint {
  const v = [p.alpha, p.beta, p.gamma];
  const sorted = [...v].sort((a, b) => b - a);
  let cumulative = 0;
  let rho = -1;
  let theta = 0;
  for (let i = 0; i < 3; i++) {
    cumulative += sorted[i];
    const candidate = (cumulative - 1) / (i + 1);
    if (sorted[i] - candidate > 0) {
      rho = i;
      theta = candidate;
    }
  }
  void rho;
  const clamped = v.map((x) => Math.max(x - theta, 0));
  const sum = clamped[0] + clamped[1] + clamped[2];
  return { alpha: clamped[0] / sum, beta: clamped[1] / sum, gamma: clamped[2] / sum };
}

export function isInsideSimplex(p: BaryPoint, tol = 1e-9): boolean {
  return (
    p.alpha >= -tol &&
    p.beta >= -tol &&
    p.gamma >= -tol &&
    Math.abs(p.alpha + p.beta + p.gamma - 1) <= 1e-6
  );
}
