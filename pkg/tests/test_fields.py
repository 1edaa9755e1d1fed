import struct

import numpy as np
import pytest

from costlens.errors import DataFormatError, ValidationError
from costlens.fields import (LabelField, Mask, ProbabilityField, SceneBundle,
                             load_label_field, load_mask, load_probability_field,
                             save_label_field, save_mask, save_probability_field,
                             SPF_MAGIC)


def _random_field(rng, h, w, n):
    raw = rng.random((h, w, n)) + 1e-6
    return ProbabilityField((raw / raw.sum(axis=2, keepdims=True)).astype(np.float32))


def test_probability_field_shape_and_props():
    field = ProbabilityField(np.full((2, 3, 4), 0.25, dtype=np.float32))
    assert (field.height, field.width, field.num_classes) == (2, 3, 4)


def test_probability_field_rejects_bad_sum():
    bad = np.full((1, 1, 2), 0.25, dtype=np.float32)   # sums to 0.5
    with pytest.raises(ValidationError, match="unnormalized"):
        ProbabilityField(bad)


def test_probability_field_renormalizes_within_tolerance():
    arr = np.array([[[0.50025, 0.50025]]], dtype=np.float32)   # sum 1.0005
    field = ProbabilityField(arr)
    assert field.values.sum(dtype=np.float64) == pytest.approx(1.0, abs=1e-6)


def test_probability_field_rejects_negative_and_nonfinite():
    with pytest.raises(ValidationError):
        ProbabilityField(np.array([[[-0.1, 1.1]]], dtype=np.float32))
    with pytest.raises(ValidationError):
        ProbabilityField(np.array([[[np.nan, 1.0]]], dtype=np.float32))


def test_spf_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    field = _random_field(rng, 2, 2, 3)
    path = tmp_path / "f.spf"
    save_probability_field(field, path)
    again = load_probability_field(path)
    assert again.values.shape == (2, 2, 3)
    assert np.array_equal(again.values, field.values)


def test_spf_round_trip_many_seeds(tmp_path):
    rng = np.random.default_rng(7)
    for seed in range(100):
        h, w, n = rng.integers(1, 6), rng.integers(1, 6), rng.integers(2, 8)
        field = _random_field(rng, int(h), int(w), int(n))
        path = tmp_path / f"f{seed}.spf"
        save_probability_field(field, path)
        assert np.array_equal(load_probability_field(path).values, field.values)


def test_spf_bad_magic(tmp_path):
    path = tmp_path / "bad.spf"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(DataFormatError, match="magic"):
        load_probability_field(path)


def test_spf_dimension_overflow(tmp_path):
    path = tmp_path / "big.spf"
    path.write_bytes(SPF_MAGIC + struct.pack("<III", 2**20, 2**20, 19))
    with pytest.raises(DataFormatError, match="overflow"):
        load_probability_field(path)


def test_spf_truncated_payload(tmp_path):
    path = tmp_path / "short.spf"
    path.write_bytes(SPF_MAGIC + struct.pack("<III", 2, 2, 2) + b"\x00" * 8)
    with pytest.raises(DataFormatError, match="payload"):
        load_probability_field(path)


def test_spf_unnormalized_pixel(tmp_path):
    arr = np.full((1, 1, 2), 0.25, dtype="<f4")
    path = tmp_path / "u.spf"
    path.write_bytes(SPF_MAGIC + struct.pack("<III", 1, 1, 2) + arr.tobytes())
    with pytest.raises(DataFormatError, match="unnormalized"):
        load_probability_field(path)


def test_spf_nonfinite(tmp_path):
    arr = np.array([[[np.inf, 0.5]]], dtype="<f4")
    path = tmp_path / "inf.spf"
    path.write_bytes(SPF_MAGIC + struct.pack("<III", 1, 1, 2) + arr.tobytes())
    with pytest.raises(DataFormatError, match="non-finite"):
        load_probability_field(path)


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_label_round_trip(tmp_path, suffix):
    rng = np.random.default_rng(3)
    for seed in range(50):
        arr = rng.integers(0, 19, size=(5, 7)).astype(np.uint8)
        arr[rng.random(arr.shape) < 0.1] = 255
        field = LabelField(arr, num_classes=19)
        path = tmp_path / f"l{seed}{suffix}"
        save_label_field(field, path)
        again = load_label_field(path, num_classes=19)
        assert np.array_equal(again.values, arr)


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_mask_round_trip(tmp_path, suffix):
    rng = np.random.default_rng(4)
    for seed in range(50):
        arr = rng.integers(0, 19, size=(6, 4)).astype(np.uint8)
        mask = Mask(arr, num_classes=19)
        path = tmp_path / f"m{seed}{suffix}"
        save_mask(mask, path)
        assert np.array_equal(load_mask(path, num_classes=19).values, arr)


def test_mask_png_pixel_values_are_class_indices(tmp_path):
    from PIL import Image

    arr = np.arange(19, dtype=np.uint8).reshape(1, 19)
    path = tmp_path / "m.png"
    save_mask(Mask(arr, num_classes=19), path)
    img = Image.open(path)
    assert img.mode == "L"
    assert np.array_equal(np.asarray(img), arr)


def test_label_value_out_of_range_errors_on_load(tmp_path):
    arr = np.full((2, 2), 200, dtype=np.uint8)
    path = tmp_path / "bad.png"
    from PIL import Image

    Image.fromarray(arr, mode="L").save(path)
    with pytest.raises(DataFormatError):
        load_label_field(path, num_classes=19, ignore_index=255)


def test_mask_rejects_ignore_value():
    with pytest.raises(ValidationError):
        Mask(np.full((2, 2), 255), num_classes=19)


def test_scene_bundle_shape_mismatch():
    probs = ProbabilityField(np.full((2, 2, 2), 0.5, dtype=np.float32))
    labels = LabelField(np.zeros((3, 2), dtype=np.uint8), num_classes=2)
    with pytest.raises(ValidationError, match="match"):
        SceneBundle("s", probs, labels)


def test_fields_are_immutable():
    field = ProbabilityField(np.full((1, 1, 2), 0.5, dtype=np.float32))
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 1.0
