"""HTTP API over a loaded scene set, for the explorer UI and for scripts.

Endpoints (all JSON unless noted):

* ``GET /api/scenes``                    -> [{id, width, height}]
* ``GET /api/scenes/{id}/gt``            -> ground-truth label PNG (class indices)
* ``GET /api/scenes/{id}/preview``       -> flat class-color PNG
* ``POST /api/decide``                   -> {mask_png_b64, palette, metrics}
* ``GET /api/sweep?metric=&class=&roi=&step=`` -> {points: [{alpha,beta,gamma,value}]}
* ``GET /api/corners``                   -> the three corner matrices

The server is a ThreadingHTTPServer over immutable shared state; the only
mutable structures are result caches keyed by quantized request parameters,
guarded by a lock with last-writer-wins semantics. Barycentric coordinates
are quantized to 1e-3 and decisions are computed from the quantized point,
so a cache hit is bit-identical to a fresh computation.
"""

import base64
import json
import re
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from .catalog import CITYSCAPES_PALETTE, builtin_cityscapes_catalog
from .costspace import (BUILTIN_AGGREGATE_MATRICES, BarycentricPoint,
                        DEFAULT_EPSILON, DEFAULT_SKY_COST,
                        barycentric_combination, expand_aggregate_matrix,
                        matrix_to_json)
from .decision import decide
from .errors import CostlensError, DataFormatError, ValidationError
from .evaluation import pixel_metrics, segment_report
from .fields import (colorize_labels, load_dataset, mask_png_bytes, png_bytes_rgb,
                     u8_png_bytes)
from .geography import DEFAULT_ROI_CLASSES, derive_roi, prior_field, roi_mask
from .sweep import evaluate_surface, simplex_grid


class ServiceError(CostlensError):
    def __init__(self, status: int, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.detail = detail


class SessionState:
    """Immutable dataset view plus derived artifacts and response caches."""

    def __init__(self, dataset_dir, metric_classes=("person", "building"),
                 metric_rois=(1, 2), epsilon=DEFAULT_EPSILON,
                 sky_cost=DEFAULT_SKY_COST):
        self.catalog = builtin_cityscapes_catalog()
        manifest, bundles = load_dataset(dataset_dir,
                                         num_classes=self.catalog.num_classes,
                                         ignore_index=self.catalog.ignore_index)
        self.manifest = manifest
        self.scenes = {b.scene_id: b for b in bundles}
        self.order = [b.scene_id for b in bundles]
        self.epsilon = float(epsilon)
        self.sky_cost = float(sky_cost)
        self.metric_classes = tuple(metric_classes)
        self.metric_rois = tuple(metric_rois)
        self.palette = CITYSCAPES_PALETTE

        prior = prior_field([b.labels for b in bundles], self.catalog)
        anchors = [self.catalog.index_of(n) for n in DEFAULT_ROI_CLASSES]
        self.roi = derive_roi(prior, anchors)

        self.corners = {
            name: expand_aggregate_matrix(builder(), self.catalog,
                                          epsilon=self.epsilon, sky_cost=self.sky_cost)
            for name, builder in BUILTIN_AGGREGATE_MATRICES.items()
        }
        self._decide_cache: dict = {}
        self._sweep_cache: dict = {}
        self._lock = threading.Lock()

    # -- decisions -------------------------------------------------------

    def quantize(self, alpha, beta, gamma) -> tuple[int, int, int]:
        weights = (alpha, beta, gamma)
        for w in weights:
            if not isinstance(w, (int, float)) or not np.isfinite(w) or w < 0 or w > 1:
                raise ServiceError(422, "simplex violation",
                                   f"weights must lie in [0, 1], got {weights}")
        if abs(sum(weights) - 1.0) > 1e-3:
            raise ServiceError(422, "simplex violation",
                               f"alpha + beta + gamma must equal 1, got {sum(weights):.6f}")
        qa, qb = round(alpha * 1000), round(beta * 1000)
        qg = 1000 - qa - qb
        if qg < 0:
            qg = 0
            qa = min(qa, 1000)
            qb = 1000 - qa
        return qa, qb, qg

    def decide_scene(self, scene_id: str, qpoint: tuple[int, int, int]):
        if scene_id not in self.scenes:
            raise ServiceError(404, "unknown scene", scene_id)
        key = (scene_id, qpoint)
        with self._lock:
            hit = self._decide_cache.get(key)
        if hit is not None:
            return hit
        point = BarycentricPoint(qpoint[0] / 1000, qpoint[1] / 1000, qpoint[2] / 1000)
        matrix = barycentric_combination(point, self.corners["robotistic"],
                                         self.corners["altruistic"],
                                         self.corners["egoistic"])
        bundle = self.scenes[scene_id]
        mask = decide(bundle.probabilities, matrix)
        payload = {
            "mask_png_b64": base64.b64encode(mask_png_bytes(mask)).decode("ascii"),
            "palette": self.palette_legend(),
            "metrics": self.mask_metrics(mask, bundle),
            "point": {"alpha": point.alpha, "beta": point.beta, "gamma": point.gamma},
        }
        with self._lock:
            self._decide_cache[key] = payload
        return payload

    def palette_legend(self):
        return [
            {"class": c.name, "index": c.index, "color": list(self.palette[c.index])}
            for c in self.catalog.classes
        ]

    def mask_metrics(self, mask, bundle):
        out: dict = {}
        scopes = [(str(r), roi_mask(self.roi, r)) for r in self.metric_rois]
        scopes.append(("full", None))
        for name in self.metric_classes:
            k = self.catalog.index_of(name)
            per_roi = {}
            for label, scope in scopes:
                prc, rec, counts = pixel_metrics(mask, bundle.labels, k, roi=scope,
                                                 ignore_index=self.catalog.ignore_index)
                seg = segment_report(mask, bundle.labels, k, roi=scope,
                                     ignore_index=self.catalog.ignore_index)
                per_roi[label] = {
                    "precision": prc, "recall": rec,
                    "tp": counts.tp, "fp": counts.fp, "fn": counts.fn,
                    "fp_segments": seg.fp_count, "fn_segments": seg.fn_count,
                }
            out[name] = per_roi
        return out

    def sweep(self, metric: str, class_name: str, roi_id: int | None, step: float):
        if metric not in ("recall", "precision"):
            raise ServiceError(422, "unknown metric", metric)
        if not 0 < step <= 1:
            raise ServiceError(422, "invalid step", str(step))
        n = max(1, round(1 / step))
        try:
            k = self.catalog.index_of(class_name)
        except ValidationError as exc:
            raise ServiceError(422, "unknown class", str(exc)) from exc
        if roi_id is not None and not 1 <= roi_id <= self.roi.num_regions:
            raise ServiceError(422, "unknown RoI id", str(roi_id))
        key = (metric, k, roi_id, n)
        with self._lock:
            hit = self._sweep_cache.get(key)
        if hit is not None:
            return hit
        scope = roi_mask(self.roi, roi_id) if roi_id is not None else None
        surface = evaluate_surface(
            [self.scenes[i] for i in self.order],
            (self.corners["robotistic"], self.corners["altruistic"],
             self.corners["egoistic"]),
            simplex_grid(n), metric, k, roi=scope, roi_id=roi_id,
            ignore_index=self.catalog.ignore_index)
        points = [
            {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma,
             "value": None if np.isnan(v) else float(v)}
            for p, v in zip(surface.grid.points, surface.values)
        ]
        payload = {"metric": metric, "class": class_name, "roi": roi_id,
                   "step": 1.0 / n, "points": points}
        with self._lock:
            self._sweep_cache[key] = payload
        return payload


_SCENE_ASSET = re.compile(r"^/api/scenes/([^/]+)/(gt|preview)$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def _make_handler(state: SessionState, static_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        server_version = "costlens"

        def log_message(self, fmt, *args):   # keep test output quiet
            pass

        # -- plumbing ----------------------------------------------------

        def _send(self, status: int, body: bytes, content_type: str):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, doc, status: int = 200):
            self._send(status, json.dumps(doc).encode(), "application/json")

        def _send_error_json(self, status: int, error: str, detail: str = ""):
            self._send_json({"error": error, "detail": detail}, status=status)

        # -- routes --------------------------------------------------------

        def do_GET(self):
            try:
                url = urlparse(self.path)
                if url.path == "/api/scenes":
                    body = [
                        {"id": sid, "width": state.scenes[sid].labels.width,
                         "height": state.scenes[sid].labels.height}
                        for sid in state.order
                    ]
                    return self._send_json(body)
                match = _SCENE_ASSET.match(url.path)
                if match:
                    return self._scene_asset(match.group(1), match.group(2))
                if url.path == "/api/corners":
                    return self._send_json({
                        name: matrix_to_json(BUILTIN_AGGREGATE_MATRICES[name]())
                        for name in BUILTIN_AGGREGATE_MATRICES
                    })
                if url.path == "/api/sweep":
                    return self._sweep(parse_qs(url.query))
                if url.path == "/api/roi":
                    return self._send(200, png_bytes_rgb(
                        colorize_labels(state.roi.ids, ((0, 0, 0),) + tuple(
                            CITYSCAPES_PALETTE[:state.roi.num_regions]), None)),
                        "image/png")
                return self._static(url.path)
            except ServiceError as exc:
                self._send_error_json(exc.status, str(exc), exc.detail)
            except (CostlensError, ValueError) as exc:
                self._send_error_json(422, "invalid request", str(exc))
            except Exception as exc:   # pragma: no cover - defensive
                self._send_error_json(500, "internal error", str(exc))

        def do_POST(self):
            try:
                if urlparse(self.path).path != "/api/decide":
                    return self._send_error_json(404, "not found", self.path)
                length = int(self.headers.get("Content-Length", 0))
                try:
                    doc = json.loads(self.rfile.read(length) or b"{}")
                except json.JSONDecodeError as exc:
                    return self._send_error_json(400, "invalid JSON body", str(exc))
                scene = doc.get("scene")
                if not isinstance(scene, str):
                    return self._send_error_json(422, "missing scene id")
                state_eps = doc.get("epsilon"), doc.get("sky_cost")
                if any(v is not None for v in state_eps):
                    return self._decide_custom(doc)
                qpoint = state.quantize(doc.get("alpha", -1), doc.get("beta", -1),
                                        doc.get("gamma", -1))
                return self._send_json(state.decide_scene(scene, qpoint))
            except ServiceError as exc:
                self._send_error_json(exc.status, str(exc), exc.detail)
            except (CostlensError, ValueError) as exc:
                self._send_error_json(422, "invalid request", str(exc))
            except Exception as exc:   # pragma: no cover - defensive
                self._send_error_json(500, "internal error", str(exc))

        def _decide_custom(self, doc):
            """Decide with overridden expansion parameters (not cached)."""
            scene = doc["scene"]
            if scene not in state.scenes:
                raise ServiceError(404, "unknown scene", scene)
            qa, qb, qg = state.quantize(doc.get("alpha", -1), doc.get("beta", -1),
                                        doc.get("gamma", -1))
            epsilon = float(doc.get("epsilon") or state.epsilon)
            sky_cost = float(doc.get("sky_cost") or state.sky_cost)
            corners = [
                expand_aggregate_matrix(BUILTIN_AGGREGATE_MATRICES[n](), state.catalog,
                                        epsilon=epsilon, sky_cost=sky_cost)
                for n in ("robotistic", "altruistic", "egoistic")
            ]
            point = BarycentricPoint(qa / 1000, qb / 1000, qg / 1000)
            matrix = barycentric_combination(point, *corners)
            bundle = state.scenes[scene]
            mask = decide(bundle.probabilities, matrix)
            return self._send_json({
                "mask_png_b64": base64.b64encode(mask_png_bytes(mask)).decode("ascii"),
                "palette": state.palette_legend(),
                "metrics": state.mask_metrics(mask, bundle),
                "point": {"alpha": point.alpha, "beta": point.beta, "gamma": point.gamma},
            })

        def _scene_asset(self, scene_id: str, kind: str):
            if scene_id not in state.scenes:
                raise ServiceError(404, "unknown scene", scene_id)
            bundle = state.scenes[scene_id]
            if kind == "gt":
                return self._send(200, u8_png_bytes(bundle.labels.values), "image/png")
            body = png_bytes_rgb(colorize_labels(bundle.labels.values, state.palette,
                                                 state.catalog.ignore_index))
            return self._send(200, body, "image/png")

        def _sweep(self, query):
            metric = (query.get("metric") or ["recall"])[0]
            class_name = (query.get("class") or ["person"])[0]
            roi_raw = (query.get("roi") or [None])[0]
            step_raw = (query.get("step") or ["0.1"])[0]
            try:
                roi_id = int(roi_raw) if roi_raw not in (None, "", "full") else None
                step = float(step_raw)
            except ValueError as exc:
                raise ServiceError(422, "invalid sweep parameters", str(exc)) from exc
            return self._send_json(state.sweep(metric, class_name, roi_id, step))

        def _static(self, path: str):
            if static_dir is None:
                if path in ("/", "/index.html"):
                    return self._send(200, _FALLBACK_INDEX, "text/html; charset=utf-8")
                return self._send_error_json(404, "not found", path)
            rel = path.lstrip("/") or "index.html"
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                return self._send_error_json(404, "not found", path)
            ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
            return self._send(200, target.read_bytes(), ctype)

    return Handler


_FALLBACK_INDEX = (
    b"<!doctype html><title>costlens</title><h1>costlens service</h1>"
    b"<p>API endpoints: /api/scenes, /api/scenes/{id}/gt, /api/scenes/{id}/preview, "
    b"POST /api/decide, /api/sweep, /api/corners</p>"
    b"<p>No explorer assets directory was configured (serve --static).</p>"
)


def create_server(dataset_dir, host="127.0.0.1", port=0, static_dir=None,
                  metric_classes=("person", "building"), metric_rois=(1, 2)):
    """Build a ready-to-run ThreadingHTTPServer (port 0 picks a free port)."""
    state = SessionState(dataset_dir, metric_classes=metric_classes,
                         metric_rois=metric_rois)
    static = Path(static_dir) if static_dir else None
    if static is not None and not static.is_dir():
        raise ValidationError(f"{static}: static asset directory does not exist")
    handler = _make_handler(state, static)
    try:
        server = ThreadingHTTPServer((host, port), handler)
    except OSError as exc:
        raise OSError(f"cannot bind {host}:{port}: {exc}") from exc
    server.daemon_threads = True
    return server


def run_service(dataset_dir, host="127.0.0.1", port=8077, static_dir=None,
                metric_classes=("person", "building"), metric_rois=(1, 2)):
    """Serve until SIGINT/SIGTERM; used by the CLI ``serve`` subcommand."""
    server = create_server(dataset_dir, host=host, port=port, static_dir=static_dir,
                           metric_classes=metric_classes, metric_rois=metric_rois)

    def _shutdown(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGINT, _shutdown)
    signal.signal(signal.SIGTERM, _shutdown)
    host_shown, port_shown = server.server_address[:2]
    print(f"costlens service on http://{host_shown}:{port_shown}/", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()
