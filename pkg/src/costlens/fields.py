"""Pixel-grid containers and their file formats.

SPF ("Softmax Probability Field") is the binary dump format for per-pixel
class distributions: magic ``SPF1``, three little-endian uint32 (height,
width, num_classes), then height*width*num_classes little-endian float32,
row-major and channel-last. Label fields and masks travel as 8-bit
single-channel PNG or binary PGM (P5), with 255 reserved for ignore.

All containers are immutable after construction; loading validates and,
for probability fields, renormalizes per-pixel sums that drift from 1 by
more than 1e-5 (up to the 1e-3 tolerance; beyond that the data is wrong,
not merely rounded).
"""

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataFormatError, ValidationError

SPF_MAGIC = b"SPF1"

# Per-pixel sum tolerances: beyond RENORM_TOL the data is rejected; within
# KEEP_TOL the stored bytes are considered normalized already (this is what
# makes load(save(x)) == x bit-exact for valid fields).
RENORM_TOL = 1e-3
KEEP_TOL = 1e-5

_MAX_ELEMENTS = 1 << 31


def _writable_copy(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    return out


def _freeze(obj, name: str, arr: np.ndarray):
    arr.flags.writeable = False
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class ProbabilityField:
    """H x W x N per-pixel posterior distribution (float32 storage)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _writable_copy(self.values, np.float32)
        if arr.ndim != 3 or min(arr.shape) == 0:
            raise ValidationError(f"probability field must be H x W x N, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("probability field contains non-finite values")
        if arr.min() < 0.0:
            raise ValidationError("probability field contains negative values")
        sums = arr.sum(axis=2, dtype=np.float64)
        dev = np.abs(sums - 1.0)
        worst = float(dev.max())
        if worst > RENORM_TOL:
            i, j = np.unravel_index(int(dev.argmax()), dev.shape)
            raise ValidationError(
                f"unnormalized distribution at pixel ({i}, {j}): sum {sums[i, j]:.6f}"
            )
        stale = dev > KEEP_TOL
        if stale.any():
            arr[stale] = (arr[stale].astype(np.float64) / sums[stale, None]).astype(np.float32)
        if arr.max() > 1.0:
            raise ValidationError("probability field contains values above 1")
        _freeze(self, "values", arr)

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
class LabelField:
    """H x W ground-truth class indices; ``ignore_index`` pixels carry no class."""

    values: np.ndarray
    num_classes: int
    ignore_index: int | None = 255

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.ndim != 2 or min(raw.shape) == 0:
            raise ValidationError(f"label field must be 2-D, got shape {raw.shape}")
        if raw.min() < 0 or raw.max() > 255:
            raise ValidationError("label values must fit 8 bit")
        arr = _writable_copy(raw, np.uint8)
        bad = arr >= self.num_classes
        if self.ignore_index is not None:
            bad &= arr != self.ignore_index
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ValidationError(
                f"label value {int(arr[i, j])} at ({i}, {j}) invalid for {self.num_classes} classes"
            )
        _freeze(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Mask:
    """H x W predicted class indices (no ignore values allowed)."""

    values: np.ndarray
    num_classes: int

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.ndim != 2 or min(raw.shape) == 0:
            raise ValidationError(f"mask must be 2-D, got shape {raw.shape}")
        if raw.min() < 0 or raw.max() >= self.num_classes:
            raise ValidationError(
                f"mask value {int(raw.max() if raw.max() >= self.num_classes else raw.min())} "
                f"invalid for {self.num_classes} classes"
            )
        _freeze(self, "values", _writable_copy(raw, np.uint8))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SceneBundle:
    """One scene: softmax field plus ground truth (and an optional image ref)."""

    scene_id: str
    probabilities: ProbabilityField
    labels: LabelField
    image_ref: str | None = None

    def __post_init__(self):
        p, l = self.probabilities, self.labels
        if (p.height, p.width) != (l.height, l.width):
            raise ValidationError(
                f"scene {self.scene_id!r}: probability field {p.height}x{p.width} "
                f"does not match labels {l.height}x{l.width}"
            )


def _atomic_write(path, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_probability_field(field: ProbabilityField, path) -> None:
    header = SPF_MAGIC + struct.pack(
        "<III", field.height, field.width, field.num_classes
    )
    payload = np.ascontiguousarray(field.values, dtype="<f4").tobytes()
    _atomic_write(path, header + payload)


def load_probability_field(path) -> ProbabilityField:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != SPF_MAGIC:
        raise DataFormatError(f"{path}: not an SPF file (bad magic)")
    h, w, n = struct.unpack("<III", raw[4:16])
    if min(h, w, n) == 0 or h * w * n > _MAX_ELEMENTS:
        raise DataFormatError(f"{path}: dimension overflow ({h} x {w} x {n})")
    expected = 16 + 4 * h * w * n
    if len(raw) != expected:
        raise DataFormatError(
            f"{path}: payload size {len(raw) - 16} does not match {h} x {w} x {n} float32"
        )
    arr = np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w, n)
    if not np.all(np.isfinite(arr)):
        raise DataFormatError(f"{path}: non-finite values in probability data")
    try:
        return ProbabilityField(arr)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _save_u8_image(values: np.ndarray, path) -> None:
    path = Path(path)
    img = Image.fromarray(values, mode="L")
    suffix = path.suffix.lower()
    fmt = {"png": "PNG", "pgm": "PPM"}.get(suffix.lstrip("."), None)
    if fmt is None:
        raise ValidationError(f"{path}: unsupported extension {suffix!r} (use .png or .pgm)")
    import io

    buf = io.BytesIO()
    img.save(buf, format=fmt)
    _atomic_write(path, buf.getvalue())


def _load_u8_image(path) -> np.ndarray:
    try:
        img = Image.open(path)
        img.load()
    except (OSError, Image.UnidentifiedImageError) as exc:
        raise DataFormatError(f"{path}: cannot decode image: {exc}") from exc
    if img.mode != "L":
        raise DataFormatError(f"{path}: expected 8-bit single-channel image, got mode {img.mode!r}")
    return np.asarray(img, dtype=np.uint8)


def save_label_field(field: LabelField, path) -> None:
    _save_u8_image(field.values, path)


def load_label_field(path, num_classes: int, ignore_index: int | None = 255) -> LabelField:
    arr = _load_u8_image(path)
    try:
        return LabelField(arr, num_classes=num_classes, ignore_index=ignore_index)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def save_mask(mask: Mask, path) -> None:
    _save_u8_image(mask.values, path)


def u8_png_bytes(values: np.ndarray) -> bytes:
    """PNG encoding of an 8-bit single-channel array (same encoder as save_mask)."""
    import io

    buf = io.BytesIO()
    Image.fromarray(np.asarray(values, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_png_bytes(mask: Mask) -> bytes:
    """PNG encoding of a mask, identical to what save_mask writes for .png."""
    return u8_png_bytes(mask.values)


def load_mask(path, num_classes: int) -> Mask:
    arr = _load_u8_image(path)
    try:
        return Mask(arr, num_classes=num_classes)
    except ValidationError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def colorize_labels(values: np.ndarray, palette, ignore_index: int | None = 255) -> np.ndarray:
    """Flat class-color rendering of a label/mask array as an H x W x 3 uint8 image."""
    arr = np.asarray(values)
    out = np.zeros(arr.shape + (3,), dtype=np.uint8)
    for idx, color in enumerate(palette):
        out[arr == idx] = color
    if ignore_index is not None:
        out[arr == ignore_index] = (0, 0, 0)
    return out


def png_bytes_rgb(image: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(image, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_rgb_image(image: np.ndarray, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower().lstrip(".")
    if suffix == "png":
        _atomic_write(path, png_bytes_rgb(image))
    elif suffix == "ppm":
        h, w = image.shape[:2]
        header = f"P6\n{w} {h}\n255\n".encode("ascii")
        _atomic_write(path, header + np.ascontiguousarray(image, dtype=np.uint8).tobytes())
    else:
        raise ValidationError(f"{path}: unsupported raster extension {suffix!r} (use .png or .ppm)")


# --- dataset manifests -----------------------------------------------------

MANIFEST_NAME = "manifest.json"


def load_dataset(directory, num_classes: int | None = None,
                 ignore_index: int | None = 255) -> tuple[dict, list[SceneBundle]]:
    """Read a dataset directory (manifest + SPF fields + GT labels).

    Returns the manifest document and the scene bundles in manifest order.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DataFormatError(f"{directory}: no {MANIFEST_NAME} found")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{manifest_path}: invalid JSON: {exc}") from exc
    scenes = manifest.get("scenes")
    if not isinstance(scenes, list) or not scenes:
        raise DataFormatError(f"{manifest_path}: manifest lists no scenes")
    n = num_classes or int(manifest.get("num_classes", 0))
    if n <= 0:
        raise DataFormatError(f"{manifest_path}: num_classes missing from manifest")
    bundles = []
    for entry in scenes:
        try:
            scene_id = entry["id"]
            probs = load_probability_field(directory / entry["probs"])
            labels = load_label_field(directory / entry["labels"], num_classes=n,
                                      ignore_index=ignore_index)
        except KeyError as exc:
            raise DataFormatError(f"{manifest_path}: scene entry missing key {exc}") from exc
        bundles.append(SceneBundle(scene_id, probs, labels,
                                   image_ref=entry.get("preview")))
    return manifest, bundles
