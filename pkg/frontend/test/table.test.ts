import assert from "node:assert/strict";
import { test } from "node:test";

import { buildTable, formatDelta, formatRate, UNDEFINED_CELL } from "../src/table.js";
import type { DecideResponse, MetricsPayload } from "../src/types.js";

function cell(precision: number | null, recall: number | null) {
  return { precision, recall, tp: 0, fp: 0, fn: 0, fp_segments: 2, fn_segments: 3 };
}

test("rates format as fixed two-decimal percentages", () => {
  assert.equal(formatRate(0.8914027149321267), "89.14%");
  assert.equal(formatRate(1), "100.00%");
  assert.equal(formatRate(0), "0.00%");
});

test("undefined metrics render as an em dash, never zero", () => {
  assert.equal(formatRate(null), UNDEFINED_CELL);
  assert.equal(formatDelta(null, 0.5), UNDEFINED_CELL);
  assert.equal(formatDelta(0.5, null), UNDEFINED_CELL);
});

test("deltas are signed two-decimal point differences", () => {
  assert.equal(formatDelta(0.75, 0.5), "+25.00");
  assert.equal(formatDelta(0.4, 0.5), "-10.00");
  assert.equal(formatDelta(0.5, 0.5), "+0.00");
});

test("two classes x three RoIs yield six ordered rows", () => {
  const metrics: MetricsPayload = {
    person: { "1": cell(0.9, 0.8), "2": cell(0.7, 0.6), full: cell(0.5, 0.4) },
    building: { "1": cell(0.3, 0.2), "2": cell(0.1, 0.0), full: cell(null, null) },
  };
  const rows = buildTable(metrics, null);
  assert.equal(rows.length, 6);
  assert.deepEqual(rows.map((r) => r.roi), ["1", "2", "full", "1", "2", "full"]);
  assert.equal(rows[5].precision, UNDEFINED_CELL);
  assert.equal(rows[0].deltaPrecision, UNDEFINED_CELL);   // no baseline yet
});

test("rows against an identical baseline show zero deltas", () => {
  const metrics: MetricsPayload = { person: { "1": cell(0.9, 0.8) } };
  const baseline = { metrics, point: { alpha: 1, beta: 0, gamma: 0 },
                     mask_png_b64: "", palette: [] } as DecideResponse;
  const rows = buildTable(metrics, baseline);
  assert.equal(rows[0].deltaPrecision, "+0.00");
  assert.equal(rows[0].deltaRecall, "+0.00");
});
