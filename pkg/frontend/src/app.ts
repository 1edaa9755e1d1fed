/** DOM wiring: triangle widget, scene viewer with mask overlay, metric table.
 *
 * All computation displayed here is done by the service; this file only
 * draws responses and translates pointer positions into barycentric
 * coordinates. At most one decide request is in flight per drag thanks to
 * the debounce + latest-wins sequence numbers in the state module.
 */

import { ApiClient } from "./api.js";
import { debounce } from "./debounce.js";
import { rasterizeSurface } from "./heatmap.js";
import { colorizeIndices, compositeOver } from "./overlay.js";
import {
  applyResponse,
  beginRequest,
  initialState,
  markStale,
  selectScene,
  VERTEX_ROBOTISTIC,
  withPoint,
  withScenes,
  type ExplorerState,
} from "./state.js";
import { buildTable } from "./table.js";
import {
  clampToSimplex,
  defaultLayout,
  toBarycentric,
  toPixel,
  type TriangleLayout,
} from "./triangle.js";
import type { BaryPoint, DecideResponse, SweepPoint } from "./types.js";

const api = new ApiClient();
let state: ExplorerState = initialState();
let sweepPoints: SweepPoint[] = [];
let maskPixels: { data: Uint8ClampedArray<ArrayBuffer>; width: number; height: number } | null = null;
let previewPixels: { data: Uint8ClampedArray<ArrayBuffer>; width: number; height: number } | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const triangleCanvas = el<HTMLCanvasElement>("triangle");
const viewCanvas = el<HTMLCanvasElement>("view");
const sceneSelect = el<HTMLSelectElement>("scene");
const metricSelect = el<HTMLSelectElement>("metric");
const classSelect = el<HTMLSelectElement>("metric-class");
const roiSelect = el<HTMLSelectElement>("roi");
const opacityInput = el<HTMLInputElement>("opacity");
const highlightSelect = el<HTMLSelectElement>("highlight");
const banner = el<HTMLDivElement>("banner");
const tableBody = el<HTMLTableSectionElement>("metric-rows");
const coords = el<HTMLSpanElement>("coords");

const layout: TriangleLayout = defaultLayout(triangleCanvas.width, triangleCanvas.height);

function drawTriangle() {
  const ctx = triangleCanvas.getContext("2d")!;
  const { width, height } = triangleCanvas;
  ctx.clearRect(0, 0, width, height);
  if (sweepPoints.length) {
    const backdrop = rasterizeSurface(sweepPoints, layout, width, height);
    ctx.putImageData(new ImageData(backdrop, width, height), 0, 0);
  }
  ctx.strokeStyle = "#222";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(layout.top.x, layout.top.y);
  ctx.lineTo(layout.left.x, layout.left.y);
  ctx.lineTo(layout.right.x, layout.right.y);
  ctx.closePath();
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.font = "13px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("robotistic", layout.top.x, layout.top.y - 8);
  ctx.fillText("altruistic", layout.left.x, layout.left.y + 16);
  ctx.fillText("egoistic", layout.right.x, layout.right.y + 16);
  const marker = toPixel(layout, state.point);
  ctx.beginPath();
  ctx.arc(marker.x, marker.y, 7, 0, 2 * Math.PI);
  ctx.fillStyle = "#fff";
  ctx.fill();
  ctx.stroke();
  const p = state.point;
  coords.textContent =
    `alpha=${p.alpha.toFixed(3)} beta=${p.beta.toFixed(3)} gamma=${p.gamma.toFixed(3)}`;
}

function drawView() {
  const ctx = viewCanvas.getContext("2d")!;
  ctx.clearRect(0, 0, viewCanvas.width, viewCanvas.height);
  if (!previewPixels) {
    return;
  }
  const { width, height } = previewPixels;
  viewCanvas.width = width;
  viewCanvas.height = height;
  let shown = previewPixels.data;
  if (maskPixels && maskPixels.width === width && maskPixels.height === height) {
    shown = compositeOver(previewPixels.data, maskPixels.data, Number(opacityInput.value));
  }
  ctx.putImageData(new ImageData(shown, width, height), 0, 0);
}

function renderTable() {
  tableBody.replaceChildren();
  if (!state.response) {
    return;
  }
  for (const row of buildTable(state.response.metrics, state.baseline)) {
    const tr = document.createElement("tr");
    for (const cell of [
      row.className, row.roi, row.precision, row.recall,
      String(row.fpSegments), String(row.fnSegments),
      row.deltaPrecision, row.deltaRecall,
    ]) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    tableBody.appendChild(tr);
  }
}

async function decodePng(b64: string): Promise<{ data: Uint8ClampedArray<ArrayBuffer>; width: number; height: number }> {
  const img = new Image();
  img.src = "data:image/png;base64," + b64;
  await img.decode();
  const canvas = document.createElement("canvas");
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(img, 0, 0);
  const rgba = ctx.getImageData(0, 0, canvas.width, canvas.height);
  return { data: rgba.data, width: canvas.width, height: canvas.height };
}

async function applyDecide(response: DecideResponse, seq: number) {
  state = applyResponse(state, seq, response);
  if (state.response !== response) {
    return; // a newer response already landed
  }
  const decoded = await decodePng(response.mask_png_b64);
  const indices = new Uint8Array(decoded.width * decoded.height);
  for (let i = 0; i < indices.length; i++) {
    indices[i] = decoded.data[i * 4]; // grayscale: R channel is the class index
  }
  const highlight = highlightSelect.value === "" ? null : Number(highlightSelect.value);
  maskPixels = {
    data: colorizeIndices(indices, response.palette, highlight),
    width: decoded.width,
    height: decoded.height,
  };
  banner.hidden = true;
  drawView();
  renderTable();
}

const requestDecide = debounce(async (point: BaryPoint) => {
  const sceneId = state.sceneId;
  if (!sceneId) {
    return;
  }
  const [next, seq] = beginRequest(state);
  state = next;
  try {
    const response = await api.decide(sceneId, point);
    await applyDecide(response, seq);
  } catch {
    state = markStale(state);
    banner.hidden = false;
  }
}, 100);

function setPoint(point: BaryPoint) {
  state = withPoint(state, clampToSimplex(point));
  drawTriangle();
  requestDecide(state.point);
}

function pointerToBary(event: PointerEvent): BaryPoint {
  const rect = triangleCanvas.getBoundingClientRect();
  const pos = {
    x: ((event.clientX - rect.left) / rect.width) * triangleCanvas.width,
    y: ((event.clientY - rect.top) / rect.height) * triangleCanvas.height,
  };
  return toBarycentric(layout, pos);
}

let dragging = false;
triangleCanvas.addEventListener("pointerdown", (event) => {
  dragging = true;
  triangleCanvas.setPointerCapture(event.pointerId);
  setPoint(pointerToBary(event));
});
triangleCanvas.addEventListener("pointermove", (event) => {
  if (dragging) {
    setPoint(pointerToBary(event));
  }
});
triangleCanvas.addEventListener("pointerup", () => {
  dragging = false;
});

async function loadPreview() {
  if (!state.sceneId) {
    return;
  }
  const img = new Image();
  img.src = api.previewUrl(state.sceneId);
  await img.decode();
  const canvas = document.createElement("canvas");
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  const ctx = canvas.getContext("2d")!;
  ctx.drawImage(img, 0, 0);
  previewPixels = {
    data: ctx.getImageData(0, 0, canvas.width, canvas.height).data,
    width: canvas.width,
    height: canvas.height,
  };
  drawView();
}

async function loadSweep() {
  try {
    const surface = await api.sweep(
      metricSelect.value, classSelect.value, roiSelect.value, 0.1);
    sweepPoints = surface.points;
  } catch {
    sweepPoints = [];
  }
  drawTriangle();
}

async function switchScene(sceneId: string) {
  state = selectScene(state, sceneId);
  maskPixels = null;
  await loadPreview();
  // refresh the baseline for delta rows, then the current point
  const [next, seq] = beginRequest(state);
  state = next;
  try {
    const baseline = await api.decide(sceneId, VERTEX_ROBOTISTIC);
    await applyDecide(baseline, seq);
  } catch {
    state = markStale(state);
    banner.hidden = false;
  }
  if (JSON.stringify(state.point) !== JSON.stringify(VERTEX_ROBOTISTIC)) {
    requestDecide(state.point);
  }
}

async function boot() {
  try {
    const scenes = await api.scenes();
    state = withScenes(state, scenes);
    sceneSelect.replaceChildren(
      ...scenes.map((s) => new Option(`${s.id} (${s.width}x${s.height})`, s.id)),
    );
    const palette = await api.corners(); // warms the connection; legend arrives with decide
    void palette;
  } catch {
    state = markStale(state);
    banner.hidden = false;
    return;
  }
  sceneSelect.addEventListener("change", () => void switchScene(sceneSelect.value));
  metricSelect.addEventListener("change", () => void loadSweep());
  classSelect.addEventListener("change", () => void loadSweep());
  roiSelect.addEventListener("change", () => void loadSweep());
  opacityInput.addEventListener("input", () => drawView());
  highlightSelect.addEventListener("change", () => {
    if (state.response) {
      void applyDecide(state.response, state.appliedSeq);
    }
  });
  if (state.sceneId) {
    await switchScene(state.sceneId);
  }
  await loadSweep();
  drawTriangle();
}

void boot();
