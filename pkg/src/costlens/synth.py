"""Seeded synthetic street scenes: ground truth plus a softmax field with
controllable confusion noise.

Scenes are desk-scale stand-ins for a segmentation network on urban data:
sky on top, buildings around the horizon, a sidewalk band, a road band at
the bottom, and poles / signs / vehicles / persons painted over them in
order (later paint occludes earlier, so an occluder can split a ground-truth
component in two).

The softmax field mixes the one-hot ground truth with a per-pixel confusion
kernel. The kernel mass sits on classes visible near the pixel (box-blurred
neighborhood) and on statically confusable pairs, and the mixing amplitude
grows at class boundaries, so uncertainty lives exactly where a real network
is unsure: occlusions and object borders. At noise 0 the field is the one-hot
ground truth and argmax recovers the labels everywhere.

Randomness comes exclusively from numpy's PCG64 generator (O'Neill's
pcg64_xsl_rr_128_64, 128-bit state, stream stability guaranteed by numpy)
seeded per scene, so every generated byte is a pure function of the spec.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import CITYSCAPES_PALETTE
from .errors import ValidationError
from .fields import (LabelField, ProbabilityField, SceneBundle, colorize_labels,
                     save_label_field, save_probability_field, save_rgb_image,
                     _atomic_write)

# Cityscapes trainId indices used by the painter.
ROAD, SIDEWALK, BUILDING, WALL, FENCE, POLE = 0, 1, 2, 3, 4, 5
TRAFFIC_LIGHT, TRAFFIC_SIGN, VEGETATION, TERRAIN, SKY = 6, 7, 8, 9, 10
PERSON, RIDER, CAR, TRUCK, BUS, TRAIN = 11, 12, 13, 14, 15, 16
MOTORCYCLE, BICYCLE = 17, 18

NUM_CLASSES = 19


@dataclass(frozen=True)
class Band:
    """Full-width horizontal band, rows [top, bottom)."""
    top: int
    bottom: int
    class_index: int


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle, rows [top, bottom) x cols [left, right)."""
    top: int
    left: int
    bottom: int
    right: int
    class_index: int


@dataclass(frozen=True)
class Ellipse:
    """Filled ellipse centered at (cy, cx) with radii (ry, rx)."""
    cy: float
    cx: float
    ry: float
    rx: float
    class_index: int


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    height: int
    width: int
    inventory: tuple = ()
    noise: float = 0.3
    blur_radius: int = 2
    base_class: int = SKY

    def __post_init__(self):
        if self.height < 8 or self.width < 8:
            raise ValidationError("scene must be at least 8 x 8")
        if not np.isfinite(self.noise) or self.noise < 0.0:
            raise ValidationError("noise must be finite and non-negative")
        if self.blur_radius < 0:
            raise ValidationError("blur radius must be non-negative")
        for obj in self.inventory:
            self._check(obj)

    def _check(self, obj):
        h, w = self.height, self.width
        if isinstance(obj, Band):
            ok = 0 <= obj.top < obj.bottom <= h
        elif isinstance(obj, Box):
            ok = 0 <= obj.top < obj.bottom <= h and 0 <= obj.left < obj.right <= w
        elif isinstance(obj, Ellipse):
            ok = (0 <= obj.cy < h and 0 <= obj.cx < w
                  and 0 < obj.ry <= h and 0 < obj.rx <= w)
        else:
            raise ValidationError(f"unknown inventory object {obj!r}")
        if not ok:
            raise ValidationError(f"invalid geometry: {obj!r} does not fit {h} x {w}")
        if not 0 <= obj.class_index < NUM_CLASSES:
            raise ValidationError(f"invalid class index in {obj!r}")


def paint_labels(spec: SceneSpec) -> np.ndarray:
    """Rasterize the inventory in order; later objects occlude earlier ones."""
    labels = np.full((spec.height, spec.width), spec.base_class, dtype=np.uint8)
    yy, xx = np.mgrid[0:spec.height, 0:spec.width]
    for obj in spec.inventory:
        if isinstance(obj, Band):
            labels[obj.top:obj.bottom, :] = obj.class_index
        elif isinstance(obj, Box):
            labels[obj.top:obj.bottom, obj.left:obj.right] = obj.class_index
        else:
            inside = ((yy - obj.cy) / obj.ry) ** 2 + ((xx - obj.cx) / obj.rx) ** 2 <= 1.0
            labels[inside] = obj.class_index
    return labels


def _box_blur_onehot(labels: np.ndarray, radius: int) -> np.ndarray:
    """Per-class neighborhood frequency via an exact integer box filter."""
    h, w = labels.shape
    if radius == 0:
        out = np.zeros((h, w, NUM_CLASSES))
        out[np.arange(h)[:, None], np.arange(w)[None, :], labels] = 1.0
        return out
    counts = np.zeros((h, w, NUM_CLASSES), dtype=np.int64)
    k = 2 * radius + 1
    for c in range(NUM_CLASSES):
        binary = (labels == c).astype(np.int64)
        padded = np.pad(binary, radius, mode="edge")
        csum = padded.cumsum(axis=0).cumsum(axis=1)
        csum = np.pad(csum, ((1, 0), (1, 0)))
        counts[:, :, c] = (csum[k:, k:] - csum[:-k, k:] - csum[k:, :-k] + csum[:-k, :-k])
    return counts / float(k * k)


# Classes a network tends to drift toward inside one object: same-aggregate
# mates are visually close and cheap to confuse under every built-in matrix.
_MATE_GROUPS = (
    (PERSON, RIDER), (RIDER, BICYCLE), (CAR, TRUCK, BUS, TRAIN),
    (SIDEWALK, TERRAIN), (BUILDING, WALL, FENCE), (TRAFFIC_SIGN, TRAFFIC_LIGHT),
    (VEGETATION, TERRAIN),
)

# Confidence model constants: networks are nearly certain in object interiors
# and unsure at borders; the floor keeps every class strictly representable.
_INTERIOR_AMPL = 0.03
_BOUNDARY_AMPL = 6.0
_KERNEL_FLOOR = 2e-4
_MATE_WEIGHT = 0.25
_MIXING_CAP = 0.93


def _mate_matrix() -> np.ndarray:
    mates = np.zeros((NUM_CLASSES, NUM_CLASSES))
    for group in _MATE_GROUPS:
        for a in group:
            for b in group:
                if a != b:
                    mates[a, b] = 1.0
    return mates


_MATES = _mate_matrix()


def generate_scene(spec: SceneSpec, scene_id: str | None = None) -> SceneBundle:
    """Deterministically derive (ground truth, softmax field) from a spec."""
    labels = paint_labels(spec)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    h, w = spec.height, spec.width

    onehot = np.zeros((h, w, NUM_CLASSES))
    onehot[np.arange(h)[:, None], np.arange(w)[None, :], labels] = 1.0

    if spec.noise == 0.0:
        probs = onehot.astype(np.float32)
    else:
        neighborhood = _box_blur_onehot(labels, spec.blur_radius)
        boundary = 1.0 - np.take_along_axis(
            neighborhood, labels[:, :, None].astype(np.int64), axis=2)[:, :, 0]

        # Confusion kernel: mass on classes visible nearby, a mate leak inside
        # objects, and a tiny uniform floor; never on the true class itself.
        kernel = (2.0 * neighborhood * (1.0 - onehot)
                  + _MATE_WEIGHT * _MATES[labels]
                  + _KERNEL_FLOOR)
        kernel *= 1.0 - onehot
        kernel /= kernel.sum(axis=2)[:, :, None]

        # Mixing amplitude: near zero in interiors, strong at boundaries.
        base = rng.random((h, w)) ** 2
        edge = rng.random((h, w))
        mixing = np.clip(
            spec.noise * (_INTERIOR_AMPL * base + _BOUNDARY_AMPL * boundary * edge),
            0.0, _MIXING_CAP)

        probs64 = ((1.0 - mixing)[:, :, None] * onehot
                   + mixing[:, :, None] * kernel)
        probs64 = _blend_phantoms(probs64, labels, rng, spec)
        probs = probs64.astype(np.float32)

    bundle_id = scene_id or f"scene_{spec.seed:08d}"
    return SceneBundle(
        bundle_id,
        ProbabilityField(probs),
        LabelField(labels, num_classes=NUM_CLASSES, ignore_index=255),
    )


def _blend_phantoms(probs: np.ndarray, labels: np.ndarray, rng,
                    spec: SceneSpec) -> np.ndarray:
    """Hallucinated person patches over structures and vehicles.

    A partially visible pedestrian shows up as a blob of person mass whose
    strength varies: weak blobs only matter to person-hungry matrices, strong
    ones fool even the argmax. Strength scales with the noise temperature and
    vanishes at zero noise.
    """
    h, w = labels.shape
    strength_scale = min(1.0, spec.noise / 0.3)
    count = int(rng.integers(1, 4))
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(count):
        cy = rng.uniform(0.3 * h, 0.92 * h)
        cx = rng.uniform(0.04 * w, 0.96 * w)
        ry = rng.uniform(0.03, 0.08) * h
        rx = max(1.0, ry * rng.uniform(0.35, 0.6))
        inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        # Only hallucinate over background structure, never over real humans.
        inside &= (labels != PERSON) & (labels != RIDER)
        if not inside.any():
            continue
        blend = rng.uniform(0.25, 0.9) * strength_scale
        probs[inside] *= 1.0 - blend
        probs[inside, PERSON] += blend
    return probs


def random_scene_spec(seed: int, height: int = 128, width: int = 256,
                      noise: float = 0.3) -> SceneSpec:
    """Randomized street-scene inventory with the canonical vertical geography."""
    rng = np.random.Generator(np.random.PCG64(seed))
    h, w = height, width
    horizon = int(h * rng.uniform(0.38, 0.46))
    road_top = int(h * rng.uniform(0.60, 0.68))
    inventory: list = [Band(horizon, h, SIDEWALK), Band(road_top, h, ROAD)]

    # Terrain strip on one sidewalk edge.
    if rng.random() < 0.8:
        strip = max(1, int(h * rng.uniform(0.03, 0.07)))
        inventory.append(Band(road_top - strip, road_top, TERRAIN))

    # Building blocks straddling the horizon.
    x = 0
    while x < w - 8:
        bw = int(rng.uniform(0.12, 0.3) * w)
        top = int(h * rng.uniform(0.04, 0.2))
        if rng.random() < 0.8:
            inventory.append(Box(top, x, horizon + int(0.02 * h) + 1, min(x + bw, w), BUILDING))
        x += bw + int(rng.uniform(0, 0.06 * w))

    # Vegetation blobs near the skyline, occasional wall/fence on the sidewalk.
    for _ in range(rng.integers(1, 4)):
        cx = rng.uniform(0.05 * w, 0.95 * w)
        cy = rng.uniform(0.18 * h, 0.4 * h)
        inventory.append(Ellipse(cy, cx, rng.uniform(0.04, 0.1) * h,
                                 rng.uniform(0.03, 0.08) * w, VEGETATION))
    if rng.random() < 0.5:
        top = horizon + int(0.01 * h)
        left = int(rng.uniform(0, 0.6) * w)
        width_ = int(rng.uniform(0.15, 0.35) * w)
        inventory.append(Box(top, left, top + max(2, int(0.05 * h)), min(left + width_, w),
                             WALL if rng.random() < 0.5 else FENCE))

    # Poles carrying signs or lights.
    for _ in range(rng.integers(1, 4)):
        px = int(rng.uniform(0.05, 0.95) * w)
        top = int(rng.uniform(0.22, 0.35) * h)
        inventory.append(Box(top, px, road_top, min(px + max(1, w // 128), w), POLE))
        sign = TRAFFIC_SIGN if rng.random() < 0.6 else TRAFFIC_LIGHT
        sw_ = max(2, int(0.015 * w))
        left = max(0, min(px - sw_ // 2, w - sw_ - 1))
        inventory.append(Box(max(0, top - max(2, int(0.04 * h))), left,
                             top, left + sw_, sign))

    # Persons behind traffic (painted before vehicles, so they end up occluded).
    back_persons = []
    for _ in range(rng.integers(1, 3)):
        back_persons.append(_person(rng, h, w, road_top, occluded=True))
    inventory.extend(back_persons)

    # Vehicles on the road band.
    for _ in range(rng.integers(1, 4)):
        vw = max(3, int(rng.uniform(0.08, 0.2) * w))
        vh = max(3, int(rng.uniform(0.08, 0.16) * h))
        left = int(rng.uniform(0, w - vw - 1))
        bottom = int(rng.uniform(road_top + 0.4 * (h - road_top), h - 1))
        cls = int(rng.choice((CAR, CAR, CAR, TRUCK, BUS, TRAIN)))
        inventory.append(Box(max(0, bottom - vh), left, bottom, left + vw, cls))
        if rng.random() < 0.25:
            two_w = max(2, int(0.02 * w))
            tl = min(max(0, left + vw), w - two_w)
            inventory.append(Box(max(0, bottom - vh // 2), tl, bottom, tl + two_w,
                                 int(rng.choice((MOTORCYCLE, BICYCLE)))))

    # Foreground persons on road and sidewalk.
    for _ in range(rng.integers(2, 5)):
        inventory.append(_person(rng, h, w, road_top, occluded=False))

    # Persons against buildings near the horizon (splits GT building blocks).
    for _ in range(rng.integers(1, 3)):
        ry = rng.uniform(0.06, 0.12) * h
        cy = horizon + rng.uniform(-0.2, 0.6) * ry
        cx = rng.uniform(0.05 * w, 0.95 * w)
        inventory.append(Ellipse(float(np.clip(cy, 1, h - 2)), cx, ry,
                                 max(1.2, ry * rng.uniform(0.3, 0.5)), PERSON))

    return SceneSpec(seed=seed, height=h, width=w, inventory=tuple(inventory),
                     noise=noise)


def _person(rng, h, w, road_top, occluded: bool) -> Ellipse:
    ry = rng.uniform(0.05, 0.11) * h
    rx = max(1.2, ry * rng.uniform(0.3, 0.5))
    cx = rng.uniform(0.04 * w, 0.96 * w)
    if occluded:
        cy = rng.uniform(road_top, min(h - 2, road_top + 0.25 * (h - road_top)))
    else:
        lo = road_top - 0.1 * h
        cy = rng.uniform(lo, h - ry - 1)
    cls = RIDER if rng.random() < 0.2 else PERSON
    return Ellipse(float(np.clip(cy, 1, h - 2)), cx, ry, rx, cls)


def generate_suite(count: int, base_seed: int, height: int = 128, width: int = 256,
                   noise: float = 0.3) -> list[SceneBundle]:
    """Independent scenes with seeds base_seed .. base_seed + count - 1."""
    if count < 1:
        raise ValidationError("count must be at least 1")
    return [
        generate_scene(random_scene_spec(base_seed + i, height, width, noise))
        for i in range(count)
    ]


def write_dataset(bundles, directory, extra_manifest: dict | None = None) -> Path:
    """Write SPF + PNG pairs, flat-color previews and a manifest JSON."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for b in bundles:
        probs_name = f"{b.scene_id}.spf"
        labels_name = f"{b.scene_id}_gt.png"
        preview_name = f"{b.scene_id}_preview.png"
        save_probability_field(b.probabilities, directory / probs_name)
        save_label_field(b.labels, directory / labels_name)
        save_rgb_image(colorize_labels(b.labels.values, CITYSCAPES_PALETTE),
                       directory / preview_name)
        entries.append({
            "id": b.scene_id, "probs": probs_name, "labels": labels_name,
            "preview": preview_name, "height": b.labels.height, "width": b.labels.width,
        })
    manifest = {"num_classes": NUM_CLASSES, "scenes": entries}
    if extra_manifest:
        manifest.update(extra_manifest)
    _atomic_write(directory / "manifest.json",
                  (json.dumps(manifest, indent=2) + "\n").encode())
    return directory / "manifest.json"
