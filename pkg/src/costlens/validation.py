"""Input validation helpers shared by the estimator layer and the functional API."""

import numpy as np

from .errors import ValidationError
from .fields import ProbabilityField


def as_probability_array(X, num_classes: int | None = None) -> np.ndarray:
    """Coerce input to a float64 (..., N) array of per-pixel distributions.

    Accepts a ProbabilityField or any array whose last axis enumerates the
    classes. Distributions must be finite, non-negative and sum to 1 within
    1e-3 per element (renormalized on the fly beyond 1e-5 drift, mirroring
    the field loader).
    """
    if isinstance(X, ProbabilityField):
        arr = X.values.astype(np.float64)
    else:
        arr = np.asarray(X, dtype=np.float64)
    if arr.ndim < 1 or arr.shape[-1] < 2:
        raise ValidationError(f"expected (..., N) class distributions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("probabilities contain non-finite values")
    if arr.min() < 0.0:
        raise ValidationError("probabilities contain negative values")
    sums = arr.sum(axis=-1)
    dev = np.abs(sums - 1.0)
    if dev.max() > 1e-3:
        raise ValidationError("unnormalized distribution: per-element sums deviate from 1")
    stale = dev > 1e-5
    if stale.any():
        arr = arr.copy()
        arr[stale] /= sums[stale, None]
    if num_classes is not None and arr.shape[-1] != num_classes:
        raise ValidationError(
            f"expected {num_classes} classes on the last axis, got {arr.shape[-1]}"
        )
    return arr


def as_cost_entries(cost, num_classes: int | None = None) -> np.ndarray:
    """Coerce a CostMatrix or raw square array to float64 entries."""
    entries = np.asarray(getattr(cost, "entries", cost), dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValidationError(f"cost matrix must be square, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise ValidationError("cost matrix contains non-finite entries")
    if num_classes is not None and entries.shape[0] != num_classes:
        raise ValidationError(
            f"cost matrix size {entries.shape[0]} does not match {num_classes} classes"
        )
    return entries


def as_label_array(x) -> np.ndarray:
    """Unwrap Mask/LabelField/array inputs into a 2-D integer array."""
    arr = np.asarray(getattr(x, "values", x))
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D label array, got shape {arr.shape}")
    return arr.astype(np.int64)


def check_same_shape(*arrays) -> tuple[int, int]:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValidationError(f"shape mismatch between inputs: {sorted(shapes)}")
    return arrays[0].shape
