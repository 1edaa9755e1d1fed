"""Consequence measurement: pixel precision/recall, mean IoU and segment-level
false positives / false negatives (connected components with zero overlap).

Conventions: ground-truth ignore pixels never enter any count; components are
8-connected; a 0/0 precision or recall is reported as None (undefined), never
silently 0 or 1; per-segment IoU is measured against the opposing class-mask
union, which is equivalent to best-match IoU for the IoU == 0 criterion.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .catalog import ClassCatalog
from .errors import ValidationError
from .validation import as_label_array, check_same_shape

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class PixelCounts:
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class Segment:
    """One maximal 8-connected component of same-class pixels."""

    class_index: int
    pixels: np.ndarray          # (n, 2) row/col indices in raster order
    bbox: tuple[int, int, int, int]   # top, left, bottom, right (inclusive)

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def area(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SegmentMatch:
    segment: Segment
    iou: float


@dataclass(frozen=True)
class SegmentReport:
    class_index: int
    predicted: tuple[SegmentMatch, ...]
    ground_truth: tuple[SegmentMatch, ...]

    @property
    def fp_count(self) -> int:
        return sum(1 for m in self.predicted if m.iou == 0.0)

    @property
    def fn_count(self) -> int:
        return sum(1 for m in self.ground_truth if m.iou == 0.0)


def _roi_array(roi, shape) -> np.ndarray:
    if roi is None:
        return np.ones(shape, dtype=bool)
    arr = np.asarray(getattr(roi, "values", roi))
    if arr.shape != shape:
        raise ValidationError(f"RoI shape {arr.shape} does not match {shape}")
    return arr.astype(bool)


def pixel_metrics(pred, gt, class_index: int, roi=None,
                  ignore_index: int | None = 255):
    """Precision, recall and raw counts of one class, optionally RoI-restricted.

    Returns (precision, recall, PixelCounts); precision or recall is None
    when its denominator is zero (class absent on that side).
    """
    p = as_label_array(pred)
    g = as_label_array(gt)
    check_same_shape(p, g)
    scope = _roi_array(roi, g.shape)
    if ignore_index is not None:
        scope = scope & (g != ignore_index)
    pred_k = (p == class_index) & scope
    gt_k = (g == class_index) & scope
    tp = int(np.count_nonzero(pred_k & gt_k))
    fp = int(np.count_nonzero(pred_k & ~gt_k))
    fn = int(np.count_nonzero(~pred_k & gt_k))
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    return precision, recall, PixelCounts(tp, fp, fn)


def mean_iou(pred, gt, catalog: ClassCatalog) -> float:
    """Mean over present classes of TP / (TP + FP + FN), full frame, ignore excluded."""
    p = as_label_array(pred)
    g = as_label_array(gt)
    check_same_shape(p, g)
    valid = np.ones(g.shape, dtype=bool)
    if catalog.ignore_index is not None:
        valid = g != catalog.ignore_index
    ious = []
    for k in range(catalog.num_classes):
        pred_k = (p == k) & valid
        gt_k = (g == k) & valid
        tp = np.count_nonzero(pred_k & gt_k)
        fp = np.count_nonzero(pred_k & ~gt_k)
        fn = np.count_nonzero(~pred_k & gt_k)
        if tp + fp + fn > 0:
            ious.append(tp / (tp + fp + fn))
    if not ious:
        raise ValidationError("no class present in either mask (all pixels ignored)")
    return float(np.mean(ious))


def connected_components(mask, class_index: int) -> list[Segment]:
    """Maximal 8-connected components of one class, ordered by bounding-box corner."""
    arr = as_label_array(mask)
    binary = arr == class_index
    labels, count = ndimage.label(binary, structure=_EIGHT_CONNECTED)
    segments = []
    for lab in range(1, count + 1):
        pixels = np.argwhere(labels == lab)   # argwhere yields raster order
        top, left = pixels.min(axis=0)
        bottom, right = pixels.max(axis=0)
        segments.append(Segment(class_index, pixels,
                                (int(top), int(left), int(bottom), int(right))))
    segments.sort(key=lambda s: (s.bbox[0], s.bbox[1]))   # stable: label order breaks ties
    return segments


def _union_iou(member: np.ndarray, opposing: np.ndarray) -> float:
    inter = np.count_nonzero(member & opposing)
    union = np.count_nonzero(member | opposing)
    return inter / union if union else 0.0


def segment_report(pred, gt, class_index: int, roi=None,
                   ignore_index: int | None = 255) -> SegmentReport:
    """Per-segment IoU bookkeeping for one class.

    A predicted segment with zero overlap against the ground-truth class
    union is a false positive; a ground-truth segment with zero overlap
    against the predicted class union is a false negative. With a RoI, only
    segments intersecting it are attributed. Segments lying entirely on
    ignore ground truth are dropped.
    """
    p = as_label_array(pred)
    g = as_label_array(gt)
    check_same_shape(p, g)
    scope = _roi_array(roi, g.shape)
    valid = np.ones(g.shape, dtype=bool)
    if ignore_index is not None:
        valid = g != ignore_index
    gt_union = (g == class_index)
    pred_union = (p == class_index) & valid

    predicted = []
    for seg in connected_components(p, class_index):
        member = np.zeros(g.shape, dtype=bool)
        member[seg.pixels[:, 0], seg.pixels[:, 1]] = True
        member &= valid
        if not member.any():
            continue
        if roi is not None and not (member & scope).any():
            continue
        predicted.append(SegmentMatch(seg, _union_iou(member, gt_union)))

    ground_truth = []
    for seg in connected_components(g, class_index):
        member = np.zeros(g.shape, dtype=bool)
        member[seg.pixels[:, 0], seg.pixels[:, 1]] = True
        if roi is not None and not (member & scope).any():
            continue
        ground_truth.append(SegmentMatch(seg, _union_iou(member, pred_union)))

    return SegmentReport(class_index, tuple(predicted), tuple(ground_truth))
