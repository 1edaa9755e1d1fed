"""Command line interface: decide / metrics / priors / roi / sweep / gen /
compare / serve.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 I/O error.
All outputs are written to a temporary file first and renamed on success, so
a failing run never leaves partial artifacts behind. COSTLENS_THREADS caps
internal parallelism.
"""

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import (CITYSCAPES_PALETTE, builtin_cityscapes_catalog, load_catalog)
from .costspace import (BUILTIN_AGGREGATE_MATRICES, AggregateCostMatrix,
                        BarycentricPoint, CostMatrix, DEFAULT_EPSILON,
                        DEFAULT_SKY_COST, barycentric_combination,
                        expand_aggregate_matrix, load_matrix)
from .decision import decide, decide_bayes, decide_ml
from .errors import CostlensError, ValidationError
from .evaluation import pixel_metrics, segment_report
from .fields import (_atomic_write, colorize_labels, load_dataset, load_label_field,
                     load_mask, load_probability_field, save_mask, save_rgb_image)
from .geography import (DEFAULT_ROI_CLASSES, derive_roi, load_prior_field,
                        load_roi_map, prior_field, roi_mask, save_prior_field,
                        save_roi_map)
from .sweep import evaluate_surface, render_heatmap, simplex_grid, surface_to_csv
from .synth import generate_suite, write_dataset

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit2(message)


class SystemExit2(Exception):
    """Usage error carrying the argparse message (mapped to exit 1)."""


def _build_parser() -> _Parser:
    parser = _Parser(prog="costlens",
                     description="Cost-based decision rules over softmax "
                                 "probability fields and their consequences.")
    parser.add_argument("--version", action="version", version=f"costlens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="apply a decision rule to one SPF field")
    p.add_argument("--probs", required=True, help="input SPF probability field")
    p.add_argument("--cost", help="builtin name (robotistic|altruistic|egoistic) or matrix JSON")
    p.add_argument("--bary", help="alpha,beta,gamma combination of the builtin corners")
    p.add_argument("--rule", choices=("bayes", "ml"), help="shortcut decision rule")
    p.add_argument("--priors", help="priors JSON (required for --rule ml)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="intra-aggregate cost used when expanding aggregate matrices")
    p.add_argument("--sky-cost", type=float, default=DEFAULT_SKY_COST,
                   help="sky prediction-row cost used when expanding aggregate matrices")
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="output mask (.png or .pgm)")

    p = sub.add_parser("metrics", help="precision/recall and segment FP/FN report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--roi", help="RoI map PNG")
    p.add_argument("--roi-id", type=int, action="append",
                   help="RoI id to evaluate (repeatable; default: all ids in the map)")
    p.add_argument("--classes", required=True, help="comma-separated class names")
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="metrics JSON")

    p = sub.add_parser("priors", help="pixel-wise prior field from a label directory")
    p.add_argument("--labels", required=True, help="directory of label PNGs")
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="output prior field (.spf)")

    p = sub.add_parser("roi", help="derive RoI map from a prior field")
    p.add_argument("--priors", required=True, help="prior field SPF")
    p.add_argument("--classes", default=",".join(DEFAULT_ROI_CLASSES),
                   help="ordered anchor class names")
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="output RoI map PNG")

    p = sub.add_parser("sweep", help="metric surface over the corner triangle")
    p.add_argument("--dataset", required=True, help="dataset directory with manifest.json")
    p.add_argument("--corners", default="robotistic,altruistic,egoistic",
                   help="three builtin names or matrix JSON files")
    p.add_argument("--metric", choices=("recall", "precision"), required=True)
    p.add_argument("--class", dest="class_name", required=True)
    p.add_argument("--roi", type=int, help="RoI id (map derived from dataset GT priors)")
    p.add_argument("--step", default="1/20", help="grid step, e.g. 1/20 or 0.05")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--sky-cost", type=float, default=DEFAULT_SKY_COST)
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="surface CSV")
    p.add_argument("--render", help="optional heatmap raster (.png or .ppm)")
    p.add_argument("--render-size", default="480x420", help="heatmap WxH")

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--size", default="128x256", help="HxW")
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--out", required=True, help="output dataset directory")

    p = sub.add_parser("compare", help="precision/recall rows for the three builtin "
                                       "matrices over classes x RoIs")
    p.add_argument("--dataset", required=True)
    p.add_argument("--classes", default="person,building")
    p.add_argument("--rois", default="1,2", help="comma-separated RoI ids, or 'full'")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--sky-cost", type=float, default=DEFAULT_SKY_COST)
    p.add_argument("--catalog", help="catalog JSON (default: builtin Cityscapes)")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("serve", help="HTTP API over a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory of explorer assets to serve at /")
    p.add_argument("--classes", default="person,building",
                   help="classes reported by /api/decide")
    p.add_argument("--rois", default="1,2", help="RoI ids reported by /api/decide")

    return parser


def _load_catalog_arg(path):
    return load_catalog(path) if path else builtin_cityscapes_catalog()


def _resolve_cost_source(args, catalog):
    """Named builtin | matrix file | barycentric point; exactly one allowed."""
    sources = [s for s in (args.cost, args.bary, args.rule) if s]
    if len(sources) != 1:
        raise ValidationError(
            "conflicting cost sources: give exactly one of --cost, --bary, --rule"
        )
    if args.rule:
        return ("rule", args.rule)
    if args.bary:
        weights = _parse_floats(args.bary, 3, "--bary")
        point = BarycentricPoint(*weights)
        corners = [
            expand_aggregate_matrix(BUILTIN_AGGREGATE_MATRICES[name](), catalog,
                                    epsilon=args.epsilon, sky_cost=args.sky_cost)
            for name in ("robotistic", "altruistic", "egoistic")
        ]
        return ("matrix", barycentric_combination(point, *corners))
    if args.cost in BUILTIN_AGGREGATE_MATRICES:
        agg = BUILTIN_AGGREGATE_MATRICES[args.cost]()
        return ("matrix", expand_aggregate_matrix(agg, catalog, epsilon=args.epsilon,
                                                  sky_cost=args.sky_cost))
    loaded = load_matrix(args.cost, catalog)
    if isinstance(loaded, AggregateCostMatrix):
        loaded = expand_aggregate_matrix(loaded, catalog, epsilon=args.epsilon,
                                         sky_cost=args.sky_cost)
    return ("matrix", loaded)


def _parse_floats(text, count, flag):
    parts = text.split(",")
    if len(parts) != count:
        raise ValidationError(f"{flag} expects {count} comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _parse_size(text, flag="--size"):
    try:
        h, w = (int(p) for p in text.lower().split("x"))
    except ValueError as exc:
        raise ValidationError(f"{flag} expects HxW, got {text!r}") from exc
    return h, w


def _parse_step(text) -> int:
    try:
        step = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"--step expects a fraction or decimal, got {text!r}") from exc
    if step <= 0 or step > 1:
        raise ValidationError("--step must lie in (0, 1]")
    n = round(1 / step)
    if n < 1:
        raise ValidationError(f"--step {text} yields no grid")
    return n


def _write_json(path, doc):
    _atomic_write(path, (json.dumps(doc, indent=2) + "\n").encode())


def _cmd_decide(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    kind, payload = _resolve_cost_source(args, catalog)
    field = load_probability_field(args.probs)
    if kind == "rule":
        if payload == "bayes":
            mask = decide_bayes(field)
        else:
            if not args.priors:
                raise ValidationError("--rule ml requires --priors")
            doc = json.loads(Path(args.priors).read_text())
            from .catalog import PriorVector
            mask = decide_ml(field, PriorVector(np.asarray(doc["values"], dtype=np.float64)))
    else:
        mask = decide(field, payload)
    save_mask(mask, args.out)
    return EXIT_OK


def _roi_scopes(args, shape, catalog):
    """(label, binary mask or None) pairs for the requested RoI restriction."""
    if not args.roi:
        return [("full", None)]
    roi = load_roi_map(args.roi)
    if roi.ids.shape != shape:
        raise ValidationError(f"RoI map shape {roi.ids.shape} does not match {shape}")
    ids = args.roi_id or sorted(int(v) for v in np.unique(roi.ids))
    return [(str(i), roi_mask(roi, i)) for i in ids]


def _cmd_metrics(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    gt = load_label_field(args.gt, num_classes=catalog.num_classes,
                          ignore_index=catalog.ignore_index)
    pred = load_mask(args.pred, num_classes=catalog.num_classes)
    if pred.values.shape != gt.values.shape:
        raise ValidationError("prediction and ground truth shapes differ")
    class_names = [c.strip() for c in args.classes.split(",") if c.strip()]
    report: dict = {}
    for name in class_names:
        k = catalog.index_of(name)
        per_roi = {}
        for label, scope in _roi_scopes(args, gt.values.shape, catalog):
            prc, rec, counts = pixel_metrics(pred, gt, k, roi=scope,
                                             ignore_index=catalog.ignore_index)
            seg = segment_report(pred, gt, k, roi=scope,
                                 ignore_index=catalog.ignore_index)
            per_roi[label] = {
                "precision": prc, "recall": rec,
                "tp": counts.tp, "fp": counts.fp, "fn": counts.fn,
                "fp_segments": seg.fp_count, "fn_segments": seg.fn_count,
            }
        report[name] = per_roi
    report["_meta"] = {
        "pred": args.pred, "gt": args.gt, "roi": args.roi,
        "roi_ids": args.roi_id, "classes": class_names,
    }
    _write_json(args.out, report)
    return EXIT_OK


def _label_files(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir()
                   if p.suffix.lower() in (".png", ".pgm"))
    if not files:
        raise ValidationError(f"{directory}: no label images found")
    return files


def _cmd_priors(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    labels = [load_label_field(p, num_classes=catalog.num_classes,
                               ignore_index=catalog.ignore_index)
              for p in _label_files(args.labels)]
    save_prior_field(prior_field(labels, catalog), args.out)
    return EXIT_OK


def _cmd_roi(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    prior = load_prior_field(args.priors)
    names = [c.strip() for c in args.classes.split(",") if c.strip()]
    indices = [catalog.index_of(n) for n in names]
    save_roi_map(derive_roi(prior, indices), args.out)
    return EXIT_OK


def _expanded_corners(names_or_files, catalog, epsilon, sky_cost):
    parts = [c.strip() for c in names_or_files.split(",")]
    if len(parts) != 3:
        raise ValidationError("--corners expects three names or files")
    corners = []
    for part in parts:
        if part in BUILTIN_AGGREGATE_MATRICES:
            matrix = BUILTIN_AGGREGATE_MATRICES[part]()
        else:
            matrix = load_matrix(part, catalog)
        if isinstance(matrix, AggregateCostMatrix):
            matrix = expand_aggregate_matrix(matrix, catalog, epsilon=epsilon,
                                             sky_cost=sky_cost)
        corners.append(matrix)
    return tuple(corners)


def _dataset_roi(bundles, catalog, roi_id):
    prior = prior_field([b.labels for b in bundles], catalog)
    indices = [catalog.index_of(n) for n in DEFAULT_ROI_CLASSES]
    roi = derive_roi(prior, indices)
    return roi_mask(roi, roi_id)


def _cmd_sweep(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    _, bundles = load_dataset(args.dataset, num_classes=catalog.num_classes,
                              ignore_index=catalog.ignore_index)
    corners = _expanded_corners(args.corners, catalog, args.epsilon, args.sky_cost)
    grid = simplex_grid(_parse_step(args.step))
    scope = _dataset_roi(bundles, catalog, args.roi) if args.roi else None
    surface = evaluate_surface(bundles, corners, grid, args.metric,
                               catalog.index_of(args.class_name),
                               roi=scope, roi_id=args.roi,
                               ignore_index=catalog.ignore_index)
    surface_to_csv(surface, args.out)
    if args.render:
        try:
            w, h = (int(p) for p in args.render_size.lower().split("x"))
        except ValueError as exc:
            raise ValidationError(f"--render-size expects WxH: {exc}") from exc
        save_rgb_image(render_heatmap(surface, w, h), args.render)
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.count < 1:
        raise ValidationError("--count must be at least 1")
    h, w = _parse_size(args.size)
    bundles = generate_suite(args.count, args.seed, height=h, width=w,
                             noise=args.noise)
    write_dataset(bundles, args.out,
                  extra_manifest={"seed": args.seed, "noise": args.noise})
    return EXIT_OK


def _cmd_compare(args) -> int:
    catalog = _load_catalog_arg(args.catalog)
    _, bundles = load_dataset(args.dataset, num_classes=catalog.num_classes,
                              ignore_index=catalog.ignore_index)
    class_names = [c.strip() for c in args.classes.split(",") if c.strip()]
    roi_parts = [r.strip() for r in args.rois.split(",") if r.strip()]
    scopes = []
    for part in roi_parts:
        if part == "full":
            scopes.append(("full", None))
        else:
            scopes.append((part, _dataset_roi(bundles, catalog, int(part))))
    rows = ["cost_matrix,class,roi,precision,recall"]
    for name in ("altruistic", "robotistic", "egoistic"):
        matrix = expand_aggregate_matrix(BUILTIN_AGGREGATE_MATRICES[name](), catalog,
                                         epsilon=args.epsilon, sky_cost=args.sky_cost)
        masks = [decide(b.probabilities, matrix) for b in bundles]
        for cname in class_names:
            k = catalog.index_of(cname)
            for roi_label, scope in scopes:
                tp = fp = fn = 0
                for b, mask in zip(bundles, masks):
                    _, _, counts = pixel_metrics(mask, b.labels, k, roi=scope,
                                                 ignore_index=catalog.ignore_index)
                    tp, fp, fn = tp + counts.tp, fp + counts.fp, fn + counts.fn
                prc = f"{100.0 * tp / (tp + fp):.2f}" if tp + fp else "undefined"
                rec = f"{100.0 * tp / (tp + fn):.2f}" if tp + fn else "undefined"
                rows.append(f"{name},{cname},{roi_label},{prc},{rec}")
    _atomic_write(args.out, ("\n".join(rows) + "\n").encode())
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import run_service

    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    rois = [int(r) for r in args.rois.split(",") if r.strip()]
    run_service(args.dataset, host=args.host, port=args.port,
                static_dir=args.static, metric_classes=classes, metric_rois=rois)
    return EXIT_OK


_COMMANDS = {
    "decide": _cmd_decide,
    "metrics": _cmd_metrics,
    "priors": _cmd_priors,
    "roi": _cmd_roi,
    "sweep": _cmd_sweep,
    "gen": _cmd_gen,
    "compare": _cmd_compare,
    "serve": _cmd_serve,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit2 as exc:
        print(f"costlens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:   # --help / --version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"costlens: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CostlensError as exc:
        print(f"costlens: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"costlens: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"costlens: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
