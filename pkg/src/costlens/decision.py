"""Per-pixel expected-cost minimization and its two classic shortcuts.

For a pixel distribution p and cost matrix C the decided class is
argmin_k sum_k' C[k, k'] * p(k'), ties broken toward the lowest class
index. Under a simple symmetric matrix this is exactly argmax p (the
Bayes / MAP rule); under inverse-prior costs it is the Maximum Likelihood
rule argmax p(k|x) / p(k). Expected costs are always accumulated in
float64, whatever the storage precision of the field.

Pixels are independent, so the grid may be partitioned across threads;
results are bit-identical for every partitioning because the per-pixel
contraction order is fixed (unoptimized einsum, no BLAS blocking).
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .catalog import PriorVector
from .costspace import CostMatrix
from .errors import ValidationError
from .fields import Mask, ProbabilityField
from .runtime import worker_count


def _expected_costs(probs: np.ndarray, entries: np.ndarray) -> np.ndarray:
    # einsum without optimize keeps one fixed summation order per output
    # element regardless of the outer shape, which is what makes row-chunked
    # evaluation bit-identical to the unchunked one.
    return np.einsum("hwn,kn->hwk", probs, entries, optimize=False)


def _chunked_rows(height: int, workers: int):
    chunk = max(1, -(-height // workers))
    return [(r, min(r + chunk, height)) for r in range(0, height, chunk)]


def decide_costs(probs: np.ndarray, entries: np.ndarray,
                 workers: int | None = None) -> np.ndarray:
    """Argmin of expected costs for an (H, W, N) float array; returns (H, W) indices."""
    probs64 = np.ascontiguousarray(probs, dtype=np.float64)
    out = np.empty(probs64.shape[:2], dtype=np.int64)
    spans = _chunked_rows(probs64.shape[0], worker_count(workers))

    def run(span):
        lo, hi = span
        out[lo:hi] = _expected_costs(probs64[lo:hi], entries).argmin(axis=2)

    if len(spans) == 1:
        run(spans[0])
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            list(pool.map(run, spans))
    return out


def decide(field: ProbabilityField, cost: CostMatrix,
           workers: int | None = None) -> Mask:
    """Apply the cost-based decision rule to every pixel of ``field``."""
    if cost.size != field.num_classes:
        raise ValidationError(
            f"cost matrix size {cost.size} does not match field with "
            f"{field.num_classes} classes"
        )
    labels = decide_costs(field.values, cost.entries, workers=workers)
    return Mask(labels, num_classes=field.num_classes)


def decide_bayes(field: ProbabilityField) -> Mask:
    """Per-pixel argmax of the posteriors (MAP rule)."""
    return Mask(field.values.argmax(axis=2), num_classes=field.num_classes)


def decide_ml(field: ProbabilityField, priors: PriorVector) -> Mask:
    """Per-pixel argmax of p(k|x) / p(k): the prior-corrected likelihood rule."""
    values = np.asarray(getattr(priors, "values", priors), dtype=np.float64)
    if values.size != field.num_classes:
        raise ValidationError(
            f"prior vector length {values.size} does not match field with "
            f"{field.num_classes} classes"
        )
    if np.any(values <= 0.0):
        raise ValidationError("all priors must be strictly positive for the ML rule")
    ratios = field.values.astype(np.float64) / values
    return Mask(ratios.argmax(axis=2), num_classes=field.num_classes)


def expected_cost_map(field: ProbabilityField, cost: CostMatrix, mask: Mask) -> np.ndarray:
    """Per-pixel expected cost of the classes a mask actually chose.

    For the mask returned by decide() this is the per-pixel minimum over all
    classes; any other mask is bounded below by it.
    """
    if cost.size != field.num_classes:
        raise ValidationError("cost matrix size does not match field")
    if (mask.height, mask.width) != (field.height, field.width):
        raise ValidationError(
            f"mask {mask.height}x{mask.width} does not match field "
            f"{field.height}x{field.width}"
        )
    costs = _expected_costs(field.values.astype(np.float64), cost.entries)
    picked = np.take_along_axis(costs, mask.values.astype(np.int64)[:, :, None], axis=2)
    return picked[:, :, 0]
