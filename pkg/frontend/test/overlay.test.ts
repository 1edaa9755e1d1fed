import assert from "node:assert/strict";
import { test } from "node:test";

import { colorizeIndices, compositeOver } from "../src/overlay.js";
import { surfaceRange, valueToColor } from "../src/heatmap.js";
import type { PaletteEntry } from "../src/types.js";

const palette: PaletteEntry[] = [
  { class: "road", index: 0, color: [128, 64, 128] },
  { class: "person", index: 11, color: [220, 20, 60] },
];

test("colorize maps class indices through the palette", () => {
  const rgba = colorizeIndices([0, 11], palette);
  assert.deepEqual([...rgba.slice(0, 3)], [128, 64, 128]);
  assert.deepEqual([...rgba.slice(4, 7)], [220, 20, 60]);
});

test("highlighting a class dims every other class", () => {
  const rgba = colorizeIndices([0, 11], palette, 11);
  assert.deepEqual([...rgba.slice(0, 3)], [32, 16, 32]);     // road dimmed
  assert.deepEqual([...rgba.slice(4, 7)], [220, 20, 60]);    // person kept
});

test("opacity 0 shows the base image only, 1 the mask only", () => {
  const base = new Uint8ClampedArray([10, 20, 30, 255]);
  const mask = new Uint8ClampedArray([200, 100, 0, 255]);
  assert.deepEqual([...compositeOver(base, mask, 0)], [10, 20, 30, 255]);
  assert.deepEqual([...compositeOver(base, mask, 1)], [200, 100, 0, 255]);
  const half = compositeOver(base, mask, 0.5);
  assert.deepEqual([...half], [105, 60, 15, 255]);
});

test("heatmap ramp endpoints: blue high, red low, midpoint for constants", () => {
  assert.deepEqual(valueToColor(1, 0, 1), [0, 0, 255]);
  assert.deepEqual(valueToColor(0, 0, 1), [255, 0, 0]);
  assert.deepEqual(valueToColor(0.3, 0.3, 0.3), [128, 0, 128]);
});

test("surface range ignores undefined points", () => {
  const range = surfaceRange([
    { alpha: 1, beta: 0, gamma: 0, value: 0.25 },
    { alpha: 0, beta: 1, gamma: 0, value: null },
    { alpha: 0, beta: 0, gamma: 1, value: 0.75 },
  ]);
  assert.deepEqual(range, [0.25, 0.75]);
  assert.equal(surfaceRange([{ alpha: 1, beta: 0, gamma: 0, value: null }]), null);
});
