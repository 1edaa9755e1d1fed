"""Pixel-wise prior fields over a label dataset and RoI derivation.

A prior field records, per pixel location, how often each class occurs there
across a dataset. Regions of interest are obtained by restricting the priors
to a handful of anchor classes (road, sidewalk, building, sky by default)
and assigning every pixel to the anchor with the highest local frequency.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import ClassCatalog
from .errors import DataFormatError, ValidationError
from .fields import (ProbabilityField, _atomic_write, _freeze, load_label_field,
                     save_probability_field)

DEFAULT_ROI_CLASSES = ("road", "sidewalk", "building", "sky")


@dataclass(frozen=True)
class PriorField:
    """H x W x N per-pixel empirical class frequencies.

    ``observed`` counts the non-ignore labels seen at each pixel; pixels with
    zero observations carry an all-zero distribution and are excluded from
    the normalization invariant.
    """

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        obs = np.array(self.observed, dtype=np.int64, copy=True)
        if arr.ndim != 3 or obs.shape != arr.shape[:2]:
            raise ValidationError("prior field needs (H, W, N) values and (H, W) counts")
        counted = obs > 0
        sums = arr.sum(axis=2)
        if counted.any() and np.abs(sums[counted] - 1.0).max() > 1e-6:
            raise ValidationError("prior frequencies of observed pixels must sum to 1")
        if (~counted).any() and sums[~counted].max() > 0.0:
            raise ValidationError("pixels without observations must carry zero frequencies")
        _freeze(self, "values", arr)
        _freeze(self, "observed", obs)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def num_classes(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class RoiMap:
    """Per-pixel region identifiers in 1..R (one region per anchor class).

    ``uncovered`` flags pixels where no anchor class was ever observed; they
    are still assigned to region 1 (earliest anchor) to keep the partition
    total.
    """

    ids: np.ndarray
    classes: tuple[int, ...] | None = None
    uncovered: np.ndarray | None = None

    def __post_init__(self):
        arr = np.array(self.ids, dtype=np.uint8, copy=True)
        if arr.ndim != 2 or arr.min() < 1:
            raise ValidationError("RoI map must be 2-D with 1-based region ids")
        if self.classes is not None and arr.max() > len(self.classes):
            raise ValidationError("RoI id exceeds the number of anchor classes")
        _freeze(self, "ids", arr)
        if self.uncovered is not None:
            unc = np.array(self.uncovered, dtype=bool, copy=True)
            if unc.shape != arr.shape:
                raise ValidationError("uncovered flags must match the RoI map shape")
            _freeze(self, "uncovered", unc)

    @property
    def num_regions(self) -> int:
        return len(self.classes) if self.classes is not None else int(self.ids.max())


def prior_field(labels: Sequence, catalog: ClassCatalog) -> PriorField:
    """Per-pixel class frequencies over a dataset of same-shaped label fields."""
    maps = list(labels)
    if not maps:
        raise ValidationError("empty dataset")
    arrays = [np.asarray(getattr(m, "values", m)) for m in maps]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValidationError("label fields must share one shape")
    n = catalog.num_classes
    counts = np.zeros(shape + (n,), dtype=np.int64)
    for a in arrays:
        valid = np.ones(a.shape, dtype=bool)
        if catalog.ignore_index is not None:
            valid = a != catalog.ignore_index
        vals = a[valid]
        if vals.size and (vals.min() < 0 or vals.max() >= n):
            raise ValidationError("label map contains values outside the class range")
        for k in range(n):
            counts[:, :, k] += (a == k) & valid
    observed = counts.sum(axis=2)
    values = np.zeros(counts.shape, dtype=np.float64)
    seen = observed > 0
    values[seen] = counts[seen] / observed[seen, None]
    return PriorField(values, observed)


def derive_roi(prior: PriorField, roi_classes: Sequence[int]) -> RoiMap:
    """Assign each pixel to the anchor class with the highest local frequency.

    Region ids are 1-based in ``roi_classes`` order; ties (including the
    all-zero case of pixels never covered by any anchor) resolve to the
    earliest anchor, and such pixels are flagged as uncovered.
    """
    anchors = list(roi_classes)
    if not anchors:
        raise ValidationError("need at least one RoI class")
    if any(not 0 <= k < prior.num_classes for k in anchors):
        raise ValidationError(f"RoI class indices must lie in 0..{prior.num_classes - 1}")
    sub = prior.values[:, :, anchors]
    ids = sub.argmax(axis=2).astype(np.uint8) + 1
    uncovered = sub.sum(axis=2) == 0.0
    return RoiMap(ids, classes=tuple(anchors), uncovered=uncovered)


def roi_mask(roi: RoiMap, roi_id: int) -> np.ndarray:
    """Binary membership mask of one region."""
    if not 1 <= roi_id <= roi.num_regions:
        raise ValidationError(f"RoI id {roi_id} out of range 1..{roi.num_regions}")
    return roi.ids == roi_id


# --- persistence ------------------------------------------------------------

def save_prior_field(prior: PriorField, path) -> None:
    """Store a prior field in the SPF container (uncounted pixels all-zero)."""
    import struct

    from .fields import SPF_MAGIC

    h, w, n = prior.values.shape
    header = SPF_MAGIC + struct.pack("<III", h, w, n)
    payload = np.ascontiguousarray(prior.values, dtype="<f4").tobytes()
    _atomic_write(path, header + payload)


def load_prior_field(path) -> PriorField:
    """Read a prior field from SPF; pixels with all-zero rows are uncounted."""
    import struct

    from .fields import SPF_MAGIC, _MAX_ELEMENTS

    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != SPF_MAGIC:
        raise DataFormatError(f"{path}: not an SPF file (bad magic)")
    h, w, n = struct.unpack("<III", raw[4:16])
    if min(h, w, n) == 0 or h * w * n > _MAX_ELEMENTS:
        raise DataFormatError(f"{path}: dimension overflow ({h} x {w} x {n})")
    if len(raw) != 16 + 4 * h * w * n:
        raise DataFormatError(f"{path}: payload size mismatch")
    arr = np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w, n).astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataFormatError(f"{path}: non-finite values")
    sums = arr.sum(axis=2)
    observed = (sums > 0.0).astype(np.int64)
    good = (sums == 0.0) | (np.abs(sums - 1.0) <= 1e-3)
    if not good.all():
        raise DataFormatError(f"{path}: pixel frequency rows must sum to 1 (or 0 if uncounted)")
    drift = (sums > 0.0) & (np.abs(sums - 1.0) > 1e-6)
    if drift.any():
        arr[drift] /= sums[drift, None]
    return PriorField(arr, observed)


def save_roi_map(roi: RoiMap, path) -> None:
    from PIL import Image
    import io

    buf = io.BytesIO()
    Image.fromarray(roi.ids, mode="L").save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())


def load_roi_map(path) -> RoiMap:
    from .fields import _load_u8_image

    arr = _load_u8_image(path)
    if arr.min() < 1:
        raise DataFormatError(f"{path}: RoI ids must be 1-based")
    return RoiMap(arr)
