"""Confusion-cost matrices: construction, validation and algebra.

Convention throughout: rows index the *predicted* class, columns the
*potential target* class. A matrix is a member of the value space when its
diagonal is exactly zero and every off-diagonal entry is strictly positive;
scaling a member by any mu > 0 never changes the induced decisions, so only
relative costs matter.

Three built-in 6x6 aggregate-space matrices ship with the package:

* robotistic  -- every confusion costs the same (the argmax attitude),
* altruistic  -- traffic participants, above all humans, are expensive to miss,
* egoistic    -- only what can harm the ego vehicle's passenger is expensive.

Aggregate matrices expand to full class space with a small intra-aggregate
cost ``epsilon`` (argmax behavior inside an aggregate) and a suppression row
``sky_cost`` that makes predicting sky prohibitively expensive.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import SKY_AGGREGATE, ClassCatalog
from .errors import ValidationError

AGGREGATE_ORDER = ("road", "flat", "static", "info", "humans", "dynamic")

DEFAULT_EPSILON = 0.1
DEFAULT_SKY_COST = 1000.0


def _as_square(entries, what: str) -> np.ndarray:
    arr = np.array(entries, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
        raise ValidationError(f"{what} must be square with size >= 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CostMatrix:
    """N x N confusion costs over full class space (prediction rows, target columns)."""

    entries: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = _as_square(self.entries, "cost matrix")
        if self.labels is not None and len(self.labels) != arr.shape[0]:
            raise ValidationError("label count does not match matrix size")
        object.__setattr__(self, "entries", arr)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class AggregateCostMatrix:
    """Costs between named class aggregates (prediction rows, target columns)."""

    names: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        arr = _as_square(self.entries, "aggregate cost matrix")
        if len(self.names) != arr.shape[0]:
            raise ValidationError("aggregate name count does not match matrix size")
        if np.any(np.diag(arr) != 0.0):
            raise ValidationError("aggregate matrix diagonal must be zero")
        off = arr[~np.eye(arr.shape[0], dtype=bool)]
        if np.any(off <= 0.0):
            raise ValidationError("aggregate matrix off-diagonal entries must be positive")
        object.__setattr__(self, "entries", arr)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BarycentricPoint:
    """Convex weights (alpha, beta, gamma) over the three corner matrices."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if any(not np.isfinite(v) or v < 0.0 or v > 1.0 for v in w):
            raise ValidationError(f"barycentric weights must lie in [0, 1], got {w}")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValidationError(f"barycentric weights must sum to 1, got {sum(w)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class ValueSpaceReport:
    ok: bool
    violations: tuple[tuple[int, int, float], ...]

    def __bool__(self) -> bool:
        return self.ok


def symmetric_cost_matrix(n: int, lam: float) -> CostMatrix:
    """Every confusion costs ``lam``; the decision rule degenerates to argmax."""
    if n < 2:
        raise ValidationError("need at least two classes")
    if not lam > 0.0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    entries = np.full((n, n), float(lam))
    np.fill_diagonal(entries, 0.0)
    return CostMatrix(entries)


def thresholding_cost_matrix(psi) -> CostMatrix:
    """Per-target weights: predicting anything but target k costs psi(k).

    Columns are constant off the diagonal, which is exactly what moving a
    per-class output threshold does to the decision rule.
    """
    w = np.asarray(psi, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise ValidationError("psi must be a vector of per-class weights (>= 2 classes)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise ValidationError("all psi weights must be positive")
    entries = np.tile(w, (w.size, 1))
    np.fill_diagonal(entries, 0.0)
    return CostMatrix(entries)


def inverse_prior_cost_matrix(priors, lam: float = 1.0) -> CostMatrix:
    """Thresholding weights lam / p(k): rare target classes become expensive to miss."""
    values = np.asarray(getattr(priors, "values", priors), dtype=np.float64)
    if not lam > 0.0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if np.any(values <= 0.0):
        k = int(np.argmin(values))
        raise ValidationError(
            f"prior of class {k} is 0; a class absent from the data has no inverse prior"
        )
    return thresholding_cost_matrix(lam / values)


def robotistic_matrix() -> AggregateCostMatrix:
    """All confusions equal: the aggregate-space simple symmetric matrix."""
    entries = np.ones((6, 6))
    np.fill_diagonal(entries, 0.0)
    return AggregateCostMatrix(AGGREGATE_ORDER, entries)


def altruistic_matrix() -> AggregateCostMatrix:
    """Prioritizes all traffic participants and particularly humans."""
    entries = np.array([
        [0e0, 1e0, 1e1, 1e2, 1e3, 1e2],
        [1e0, 0e0, 1e1, 1e2, 1e3, 1e2],
        [1e0, 1e0, 0e0, 1e2, 1e2, 1e1],
        [1e0, 1e0, 1e0, 0e0, 1e3, 1e2],
        [1e0, 1e0, 1e0, 1e2, 0e0, 1e1],
        [1e0, 1e0, 1e0, 1e2, 1e3, 0e0],
    ])
    return AggregateCostMatrix(AGGREGATE_ORDER, entries)


def egoistic_matrix() -> AggregateCostMatrix:
    """Prioritizes only the safety and comfort of the ego vehicle's passenger."""
    entries = np.array([
        [0e0, 1e0, 1e3, 1e2, 1e1, 1e2],
        [1e0, 0e0, 1e3, 1e2, 1e1, 1e2],
        [1e1, 1e0, 0e0, 1e3, 1e0, 1e1],
        [1e1, 1e0, 1e3, 0e0, 1e0, 1e1],
        [1e1, 1e0, 1e3, 1e2, 0e0, 1e2],
        [1e1, 1e1, 1e3, 1e2, 1e2, 0e0],
    ])
    return AggregateCostMatrix(AGGREGATE_ORDER, entries)


BUILTIN_AGGREGATE_MATRICES = {
    "robotistic": robotistic_matrix,
    "altruistic": altruistic_matrix,
    "egoistic": egoistic_matrix,
}


def expand_aggregate_matrix(agg: AggregateCostMatrix, catalog: ClassCatalog,
                            epsilon: float = DEFAULT_EPSILON,
                            sky_cost: float = DEFAULT_SKY_COST) -> CostMatrix:
    """Expand aggregate-space costs to the full N x N class space.

    Classes from two different aggregates inherit the aggregate entry;
    distinct classes inside one aggregate cost ``epsilon`` (argmax within the
    aggregate); the diagonal is zero. The sky prediction row is ``sky_cost``
    off the diagonal so sky is never predicted, and mistaking true sky for
    anything is valued at ``epsilon`` (target-sky column).
    """
    if not epsilon > 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if not sky_cost >= float(agg.entries.max()) or not sky_cost > 0.0:
        raise ValidationError(
            f"sky cost {sky_cost} must be positive and at least the largest "
            f"aggregate entry ({agg.entries.max()})"
        )
    if set(agg.names) != set(catalog.aggregates):
        raise ValidationError(
            f"aggregate names {sorted(agg.names)} do not match catalog "
            f"aggregates {sorted(catalog.aggregates)}"
        )
    n = catalog.num_classes
    agg_pos = {name: i for i, name in enumerate(agg.names)}
    entries = np.zeros((n, n))
    groups = [catalog.aggregate_of(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gi, gj = groups[i], groups[j]
            if gi == SKY_AGGREGATE:
                entries[i, j] = sky_cost
            elif gj == SKY_AGGREGATE:
                entries[i, j] = epsilon
            elif gi == gj:
                entries[i, j] = epsilon
            else:
                entries[i, j] = agg.entries[agg_pos[gi], agg_pos[gj]]
    labels = tuple(c.name for c in catalog.classes)
    return CostMatrix(entries, labels=labels)


def barycentric_combination(point: BarycentricPoint, cr, ca, ce):
    """Entrywise convex combination alpha*cr + beta*ca + gamma*ce.

    Accepts three CostMatrix or three AggregateCostMatrix of one size and
    returns the same kind; at a vertex the result is bit-identical to the
    corresponding corner.
    """
    kinds = {type(m) for m in (cr, ca, ce)}
    if len(kinds) != 1:
        raise ValidationError("corner matrices must all be of the same kind")
    sizes = {m.entries.shape for m in (cr, ca, ce)}
    if len(sizes) != 1:
        raise ValidationError(f"corner matrices disagree in size: {sorted(sizes)}")
    a, b, g = point.as_tuple()
    entries = a * cr.entries + b * ca.entries + g * ce.entries
    if isinstance(cr, AggregateCostMatrix):
        if not (cr.names == ca.names == ce.names):
            raise ValidationError("aggregate orders differ between corners")
        return AggregateCostMatrix(cr.names, entries)
    return CostMatrix(entries, labels=cr.labels)


def validate_value_space(matrix) -> ValueSpaceReport:
    """Check membership in the value space: zero diagonal, positive off-diagonal."""
    entries = np.asarray(getattr(matrix, "entries", matrix), dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {entries.shape}")
    violations = []
    n = entries.shape[0]
    for i in range(n):
        for j in range(n):
            v = entries[i, j]
            if i == j and v != 0.0:
                violations.append((i, j, float(v)))
            elif i != j and not v > 0.0:
                violations.append((i, j, float(v)))
    return ValueSpaceReport(ok=not violations, violations=tuple(violations))


# --- JSON (de)serialization -------------------------------------------------

def matrix_to_json(matrix) -> dict:
    if isinstance(matrix, AggregateCostMatrix):
        order = list(matrix.names)
    else:
        order = list(matrix.labels) if matrix.labels else [str(i) for i in range(matrix.size)]
    return {"order": order, "matrix": matrix.entries.tolist()}


def save_matrix(matrix, path) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(matrix), indent=2) + "\n")


def load_matrix(path, catalog: ClassCatalog | None = None):
    """Load a cost matrix JSON document.

    Returns an AggregateCostMatrix when the order field names the catalog's
    aggregates, otherwise a full CostMatrix (validated for value-space
    membership).
    """
    try:
        doc = json.loads(Path(path).read_text())
        order = [str(x) for x in doc["order"]]
        entries = doc["matrix"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed matrix document: {exc}") from exc
    if catalog is not None and set(order) == set(catalog.aggregates):
        return AggregateCostMatrix(tuple(order), entries)
    matrix = CostMatrix(entries, labels=tuple(order))
    if catalog is not None and matrix.size != catalog.num_classes:
        raise ValidationError(
            f"{path}: matrix size {matrix.size} matches neither the aggregate set "
            f"nor the {catalog.num_classes}-class catalog"
        )
    report = validate_value_space(matrix)
    if not report.ok:
        i, j, v = report.violations[0]
        raise ValidationError(
            f"{path}: not a valid cost matrix: entry ({i}, {j}) = {v}"
            + (" (diagonal must be 0)" if i == j else " (off-diagonal must be > 0)")
        )
    return matrix
