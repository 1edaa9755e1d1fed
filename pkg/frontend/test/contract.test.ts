/** Contract tests against recorded service fixtures.
 *
 * The fixtures under test/fixtures/ were captured from a live service run
 * on the seeded dataset (scripts/record-fixtures.py), so every number here
 * is a real service response. The UI layer must display those numbers
 * verbatim and perform no metric computation of its own.
 */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { test } from "node:test";

import { ApiClient } from "../src/api.js";
import {
  applyResponse,
  beginRequest,
  initialState,
  VERTEX_ALTRUISTIC,
  VERTEX_ROBOTISTIC,
  withPoint,
  withScenes,
  type ExplorerState,
} from "../src/state.js";
import { buildTable, formatRate } from "../src/table.js";
import type { DecideResponse, SceneInfo } from "../src/types.js";

function fixture<T>(name: string): T {
  const url = new URL(`../../test/fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

const scenesFixture = fixture<SceneInfo[]>("scenes.json");
const robotistic = fixture<DecideResponse>("decide_robotistic.json");
const altruistic = fixture<DecideResponse>("decide_altruistic.json");

function fixtureFetch(counter: { decides: number }) {
  return async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, "http://service.test");
    if (url.pathname === "/api/scenes") {
      return Response.json(scenesFixture);
    }
    if (url.pathname === "/api/decide" && init?.method === "POST") {
      counter.decides += 1;
      const body = JSON.parse(String(init.body));
      if (body.alpha === 1) {
        return Response.json(robotistic);
      }
      if (body.beta === 1) {
        return Response.json(altruistic);
      }
      return Response.json({ error: "unexpected point" }, { status: 422 });
    }
    if (url.pathname === "/api/sweep") {
      return Response.json(fixture("sweep_recall_person_roi1.json"));
    }
    if (url.pathname === "/api/corners") {
      return Response.json(fixture("corners.json"));
    }
    return Response.json({ error: "not found" }, { status: 404 });
  };
}

async function decideInto(state: ExplorerState, api: ApiClient,
                          point: { alpha: number; beta: number; gamma: number },
): Promise<ExplorerState> {
  const [next, seq] = beginRequest(withPoint(state, point));
  const response = await api.decide(next.sceneId as string, point);
  return applyResponse(next, seq, response);
}

test("selecting the robotistic vertex renders all-zero metric deltas", async () => {
  const counter = { decides: 0 };
  const api = new ApiClient(fixtureFetch(counter));
  let state = withScenes(initialState(), await api.scenes());
  assert.equal(state.sceneId, scenesFixture[0].id);

  state = await decideInto(state, api, VERTEX_ROBOTISTIC);
  assert.ok(state.baseline, "vertex response becomes the baseline");
  const rows = buildTable(state.response!.metrics, state.baseline);
  assert.ok(rows.length > 0);
  for (const row of rows) {
    if (row.precision !== "—") {
      assert.equal(row.deltaPrecision, "+0.00");
    }
    if (row.recall !== "—") {
      assert.equal(row.deltaRecall, "+0.00");
    }
  }
});

test("a drag to the altruistic vertex updates mask and metrics from one decide call", async () => {
  const counter = { decides: 0 };
  const api = new ApiClient(fixtureFetch(counter));
  let state = withScenes(initialState(), await api.scenes());
  state = await decideInto(state, api, VERTEX_ROBOTISTIC);
  const maskBefore = state.response!.mask_png_b64;
  const callsBefore = counter.decides;

  state = await decideInto(state, api, VERTEX_ALTRUISTIC);
  assert.equal(counter.decides, callsBefore + 1, "exactly one /api/decide request");
  assert.notEqual(state.response!.mask_png_b64, maskBefore, "mask updated");
  assert.equal(state.baseline!.mask_png_b64, maskBefore, "baseline untouched");

  const rows = buildTable(state.response!.metrics, state.baseline);
  const person1 = rows.find((r) => r.className === "person" && r.roi === "1")!;
  // displayed numbers are the recorded fixture values, formatted, verbatim
  const cell = altruistic.metrics["person"]["1"];
  assert.equal(person1.precision, formatRate(cell.precision));
  assert.equal(person1.recall, formatRate(cell.recall));
  assert.equal(person1.fpSegments, cell.fp_segments);
  assert.equal(person1.fnSegments, cell.fn_segments);
  // and the trade-off direction carried by the fixtures is visible in the UI
  const base = robotistic.metrics["person"]["1"];
  assert.ok((cell.recall as number) > (base.recall as number));
  assert.ok((cell.precision as number) < (base.precision as number));
  assert.ok(person1.deltaRecall.startsWith("+"));
  assert.ok(person1.deltaPrecision.startsWith("-"));
});

test("every rendered cell equals the fixture payload, verbatim", async () => {
  const counter = { decides: 0 };
  const api = new ApiClient(fixtureFetch(counter));
  let state = withScenes(initialState(), await api.scenes());
  state = await decideInto(state, api, VERTEX_ROBOTISTIC);
  state = await decideInto(state, api, VERTEX_ALTRUISTIC);
  const rows = buildTable(state.response!.metrics, state.baseline);
  for (const row of rows) {
    const cell = altruistic.metrics[row.className][row.roi];
    assert.equal(row.precision, formatRate(cell.precision));
    assert.equal(row.recall, formatRate(cell.recall));
    assert.equal(row.fpSegments, cell.fp_segments);
    assert.equal(row.fnSegments, cell.fn_segments);
  }
});

test("api client surfaces service errors with status and detail", async () => {
  const api = new ApiClient(async () =>
    Response.json({ error: "simplex violation", detail: "sum 0.9" },
                  { status: 422 }));
  await assert.rejects(
    api.decide("s", { alpha: 0.5, beta: 0.3, gamma: 0.1 }),
    (err: Error & { status?: number }) => {
      assert.equal(err.status, 422);
      assert.match(err.message, /simplex/);
      return true;
    },
  );
});
