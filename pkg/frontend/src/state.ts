/** Explorer state and its transitions.
 *
 * The UI never computes a metric itself: every displayed number comes
 * verbatim from a service response. Decide requests follow latest-wins:
 * each request carries a sequence number and a response is dropped when a
 * newer request has already been applied.
 */

import type { BaryPoint, DecideResponse, SceneInfo } from "./types.js";

export const VERTEX_ROBOTISTIC: BaryPoint = { alpha: 1, beta: 0, gamma: 0 };
export const VERTEX_ALTRUISTIC: BaryPoint = { alpha: 0, beta: 1, gamma: 0 };
export const VERTEX_EGOISTIC: BaryPoint = { alpha: 0, beta: 0, gamma: 1 };

export interface ExplorerState {
  scenes: SceneInfo[];
  sceneId: string | null;
  point: BaryPoint;
  opacity: number;
  highlightClass: string | null;
  metric: "recall" | "precision";
  metricClass: string;
  roi: string;
  response: DecideResponse | null;
  baseline: DecideResponse | null;
  nextSeq: number;
  appliedSeq: number;
  stale: boolean;
}

export function initialState(): ExplorerState {
  return {
    scenes: [],
    sceneId: null,
    point: VERTEX_ROBOTISTIC,
    opacity: 0.65,
    highlightClass: null,
    metric: "recall",
    metricClass: "person",
    roi: "1",
    response: null,
    baseline: null,
    nextSeq: 1,
    appliedSeq: 0,
    stale: false,
  };
}

export function withScenes(state: ExplorerState, scenes: SceneInfo[]): ExplorerState {
  return {
    ...state,
    scenes,
    sceneId: scenes.length ? scenes[0].id : null,
  };
}

export function selectScene(state: ExplorerState, sceneId: string): ExplorerState {
  return { ...state, sceneId, response: null, baseline: null };
}

export function withPoint(state: ExplorerState, point: BaryPoint): ExplorerState {
  return { ...state, point };
}

/** Allocate a request sequence number. */
export function beginRequest(state: ExplorerState): [ExplorerState, number] {
  const seq = state.nextSeq;
  return [{ ...state, nextSeq: seq + 1 }, seq];
}

export function isVertex(point: BaryPoint, vertex: BaryPoint, tol = 1e-9): boolean {
  return (
    Math.abs(point.alpha - vertex.alpha) <= tol &&
    Math.abs(point.beta - vertex.beta) <= tol &&
    Math.abs(point.gamma - vertex.gamma) <= tol
  );
}

/** Apply a decide response unless a newer one already landed. */
export function applyResponse(
  state: ExplorerState,
  seq: number,
  response: DecideResponse,
): ExplorerState {
  if (seq < state.appliedSeq) {
    return state;
  }
  const next: ExplorerState = {
    ...state,
    response,
    appliedSeq: seq,
    stale: false,
  };
  if (isVertex(response.point, VERTEX_ROBOTISTIC)) {
    next.baseline = response;
  }
  return next;
}

export function applyBaseline(state: ExplorerState, response: DecideResponse): ExplorerState {
  return { ...state, baseline: response };
}

export function markStale(state: ExplorerState): ExplorerState {
  return { ...state, stale: true };
}
