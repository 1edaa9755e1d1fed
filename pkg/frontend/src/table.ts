/** Metric table model: rows of displayed strings, deltas vs the robotistic
 * vertex baseline. Undefined metrics render as an em dash, never as 0. */

import type { DecideResponse, MetricsPayload } from "./types.js";

export interface TableRow {
  className: string;
  roi: string;
  precision: string;
  recall: string;
  fpSegments: number;
  fnSegments: number;
  deltaPrecision: string;
  deltaRecall: string;
}

export const UNDEFINED_CELL = "—";

export function formatRate(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return UNDEFINED_CELL;
  }
  return (100 * value).toFixed(2) + "%";
}

export function formatDelta(
  value: number | null | undefined,
  base: number | null | undefined,
): string {
  if (value === null || value === undefined || base === null || base === undefined) {
    return UNDEFINED_CELL;
  }
  const diff = 100 * (value - base);
  const sign = diff >= 0 ? "+" : "";
  return sign + diff.toFixed(2);
}

function roiOrder(labels: string[]): string[] {
  return [...labels].sort((a, b) => {
    if (a === "full") return 1;
    if (b === "full") return -1;
    return Number(a) - Number(b);
  });
}

export function buildTable(
  metrics: MetricsPayload,
  baseline: DecideResponse | null,
): TableRow[] {
  const rows: TableRow[] = [];
  for (const className of Object.keys(metrics)) {
    for (const roi of roiOrder(Object.keys(metrics[className]))) {
      const cell = metrics[className][roi];
      const base = baseline?.metrics?.[className]?.[roi];
      rows.push({
        className,
        roi,
        precision: formatRate(cell.precision),
        recall: formatRate(cell.recall),
        fpSegments: cell.fp_segments,
        fnSegments: cell.fn_segments,
        deltaPrecision: formatDelta(cell.precision, base?.precision),
        deltaRecall: formatDelta(cell.recall, base?.recall),
      });
    }
  }
  return rows;
}
