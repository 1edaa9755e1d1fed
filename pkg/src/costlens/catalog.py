"""Semantic class universe: ordered classes, aggregate grouping and class priors.

Every other module translates between aggregate space and full class space
through a ClassCatalog. The built-in catalog covers the 19 Cityscapes train
classes in trainId order with the six standard aggregates; the sky class is
deliberately kept out of every aggregate and the ignore label is 255.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

SKY_AGGREGATE = "sky"

CITYSCAPES_IGNORE = 255

_CITYSCAPES_NAMES = (
    "road", "sidewalk", "building", "wall", "fence", "pole",
    "traffic light", "traffic sign", "vegetation", "terrain", "sky",
    "person", "rider", "car", "truck", "bus", "train", "motorcycle", "bicycle",
)

_CITYSCAPES_AGGREGATES = {
    "road": ("road",),
    "flat": ("sidewalk", "terrain"),
    "static": ("building", "wall", "fence", "pole", "motorcycle", "bicycle", "vegetation"),
    "info": ("traffic light", "traffic sign"),
    "humans": ("person", "rider"),
    "dynamic": ("car", "truck", "bus", "train"),
}

# Standard Cityscapes trainId color scheme, used for previews and legends.
CITYSCAPES_PALETTE = (
    (128, 64, 128), (244, 35, 232), (70, 70, 70), (102, 102, 156),
    (190, 153, 153), (153, 153, 153), (250, 170, 30), (220, 220, 0),
    (107, 142, 35), (152, 251, 152), (70, 130, 180), (220, 20, 60),
    (255, 0, 0), (0, 0, 142), (0, 0, 70), (0, 60, 100),
    (0, 80, 100), (0, 0, 230), (119, 11, 32),
)


@dataclass(frozen=True)
class ClassDescriptor:
    name: str
    index: int


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered class set with a flat aggregate partition.

    Invariants enforced at construction: class names unique, indices
    contiguous 0..N-1, aggregates non-empty and a partition of all non-sky
    indices, and the sky class (if any) in no aggregate.
    """

    classes: tuple[ClassDescriptor, ...]
    aggregates: dict[str, tuple[int, ...]]
    sky_index: int | None = None
    ignore_index: int | None = CITYSCAPES_IGNORE

    def __post_init__(self):
        n = len(self.classes)
        if n == 0:
            raise ValidationError("catalog needs at least one class")
        names = [c.name for c in self.classes]
        if len(set(names)) != n:
            raise ValidationError("class names must be unique")
        if sorted(c.index for c in self.classes) != list(range(n)):
            raise ValidationError("class indices must be contiguous 0..N-1")
        if self.sky_index is not None and not 0 <= self.sky_index < n:
            raise ValidationError(f"sky_index {self.sky_index} out of range")
        seen: dict[int, str] = {}
        for agg_name, members in self.aggregates.items():
            if len(members) == 0:
                raise ValidationError(f"aggregate {agg_name!r} is empty")
            for idx in members:
                if not 0 <= idx < n:
                    raise ValidationError(f"aggregate {agg_name!r} has invalid index {idx}")
                if idx == self.sky_index:
                    raise ValidationError("sky class must not belong to an aggregate")
                if idx in seen:
                    raise ValidationError(
                        f"class {idx} appears in aggregates {seen[idx]!r} and {agg_name!r}"
                    )
                seen[idx] = agg_name
        expected = set(range(n)) - ({self.sky_index} if self.sky_index is not None else set())
        if set(seen) != expected:
            missing = sorted(expected - set(seen))
            raise ValidationError(f"classes {missing} belong to no aggregate")
        object.__setattr__(self, "_agg_by_index", seen)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def name_of(self, index: int) -> str:
        self._check_index(index)
        return self.classes[index].name

    def index_of(self, name: str) -> int:
        for c in self.classes:
            if c.name == name:
                return c.index
        raise ValidationError(f"unknown class name {name!r}")

    def aggregate_of(self, index: int) -> str:
        """Aggregate name housing ``index``, or the sky designation."""
        self._check_index(index)
        if index == self.sky_index:
            return SKY_AGGREGATE
        return self._agg_by_index[index]

    def members_of(self, aggregate: str) -> tuple[int, ...]:
        if aggregate not in self.aggregates:
            raise ValidationError(f"unknown aggregate {aggregate!r}")
        return tuple(self.aggregates[aggregate])

    def _check_index(self, index: int):
        if not 0 <= index < self.num_classes:
            raise ValidationError(f"class index {index} out of range 0..{self.num_classes - 1}")

    def to_json(self) -> dict:
        return {
            "classes": [{"name": c.name, "index": c.index} for c in self.classes],
            "aggregates": {name: list(members) for name, members in self.aggregates.items()},
            "sky_index": self.sky_index,
            "ignore_index": self.ignore_index,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ClassCatalog":
        try:
            classes = tuple(
                ClassDescriptor(entry["name"], int(entry["index"]))
                for entry in sorted(doc["classes"], key=lambda e: e["index"])
            )
            aggregates = {name: tuple(int(i) for i in members)
                          for name, members in doc["aggregates"].items()}
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed catalog document: {exc}") from exc
        return cls(
            classes=classes,
            aggregates=aggregates,
            sky_index=doc.get("sky_index"),
            ignore_index=doc.get("ignore_index"),
        )


@dataclass(frozen=True)
class PriorVector:
    """Per-class probabilities p(k); entries sum to 1 over the class set."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("priors must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("priors contain non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("priors must lie in [0, 1]")
        if abs(arr.sum() - 1.0) > 1e-6:
            raise ValidationError(f"priors sum to {arr.sum():.9f}, expected 1")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def builtin_cityscapes_catalog() -> ClassCatalog:
    """The 19-class Cityscapes catalog in trainId order with six aggregates."""
    classes = tuple(ClassDescriptor(name, i) for i, name in enumerate(_CITYSCAPES_NAMES))
    by_name = {name: i for i, name in enumerate(_CITYSCAPES_NAMES)}
    aggregates = {
        agg: tuple(by_name[n] for n in members)
        for agg, members in _CITYSCAPES_AGGREGATES.items()
    }
    return ClassCatalog(
        classes=classes,
        aggregates=aggregates,
        sky_index=by_name["sky"],
        ignore_index=CITYSCAPES_IGNORE,
    )


def aggregate_of(catalog: ClassCatalog, class_index: int) -> str:
    """Aggregate name of ``class_index`` in ``catalog`` (or the sky designation)."""
    return catalog.aggregate_of(class_index)


def class_frequencies(labels: Sequence, catalog: ClassCatalog) -> PriorVector:
    """Pixel-count frequency of every class over a label dataset.

    Ignore-labelled pixels contribute neither to counts nor to the
    normalizer. Raises on an empty dataset or out-of-range label values.
    """
    maps = list(labels)
    if not maps:
        raise ValidationError("empty dataset")
    n = catalog.num_classes
    counts = np.zeros(n, dtype=np.int64)
    for lab in maps:
        arr = np.asarray(getattr(lab, "values", lab))
        flat = arr.reshape(-1).astype(np.int64)
        if catalog.ignore_index is not None:
            flat = flat[flat != catalog.ignore_index]
        if flat.size and (flat.min() < 0 or flat.max() >= n):
            raise ValidationError("label map contains values outside the class range")
        counts += np.bincount(flat, minlength=n)
    total = counts.sum()
    if total == 0:
        raise ValidationError("dataset contains no labelled (non-ignore) pixels")
    return PriorVector(counts / total)


def save_catalog(catalog: ClassCatalog, path) -> None:
    Path(path).write_text(json.dumps(catalog.to_json(), indent=2) + "\n")


def load_catalog(path) -> ClassCatalog:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return ClassCatalog.from_json(doc)
