"""Barycentric sweeps over the corner-matrix triangle and their rendering.

A simplex grid at resolution 1/n enumerates all lattice points of the
triangle spanned by the three corner matrices; a metric surface stores one
precision or recall value per grid point, pooled over all scenes
(micro-averaged counts). The heatmap rasterizer places the first corner at
the top vertex, the second bottom-left, the third bottom-right, and paints
a linear blue (high) to red (low) ramp over the surface's own value range.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .costspace import BarycentricPoint, CostMatrix, barycentric_combination
from .decision import decide
from .errors import ValidationError
from .evaluation import pixel_metrics
from .runtime import worker_count

METRICS = ("recall", "precision")


@dataclass(frozen=True)
class SimplexGrid:
    """All barycentric lattice points with coordinates in {0, 1/n, ..., 1}."""

    n: int
    points: tuple[BarycentricPoint, ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MetricSurface:
    grid: SimplexGrid
    metric: str
    class_index: int
    roi_id: int | None
    values: np.ndarray    # one float per grid point, NaN where undefined

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.shape != (len(self.grid),):
            raise ValidationError("surface needs exactly one value per grid point")
        defined = arr[~np.isnan(arr)]
        if defined.size and (defined.min() < 0.0 or defined.max() > 1.0):
            raise ValidationError("defined surface values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def simplex_grid(n: int) -> SimplexGrid:
    """Lattice of (n+1)(n+2)/2 barycentric points at resolution 1/n."""
    if n < 1:
        raise ValidationError(f"grid resolution must be >= 1, got {n}")
    points = []
    for i in range(n, -1, -1):
        for j in range(n - i, -1, -1):
            k = n - i - j
            points.append(BarycentricPoint(i / n, j / n, k / n))
    return SimplexGrid(n, tuple(points))


def evaluate_surface(scenes, corners, grid: SimplexGrid, metric: str,
                     class_index: int, roi=None, roi_id: int | None = None,
                     ignore_index: int | None = 255,
                     workers: int | None = None) -> MetricSurface:
    """Decide every scene under every grid point's matrix and pool the counts.

    ``corners`` are the three full-space matrices (top, bottom-left,
    bottom-right); ``roi`` is an optional binary mask shared by all scenes.
    Counts are pooled over all scenes before dividing (micro-averaging).
    """
    scenes = list(scenes)
    if not scenes:
        raise ValidationError("empty scene set")
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}, expected one of {METRICS}")
    cr, ca, ce = corners
    values = np.full(len(grid), np.nan)

    def run(idx: int):
        point = grid.points[idx]
        matrix = barycentric_combination(point, cr, ca, ce)
        tp = fp = fn = 0
        for scene in scenes:
            mask = decide(scene.probabilities, matrix, workers=1)
            _, _, counts = pixel_metrics(mask, scene.labels, class_index,
                                         roi=roi, ignore_index=ignore_index)
            tp += counts.tp
            fp += counts.fp
            fn += counts.fn
        denom = tp + fp if metric == "precision" else tp + fn
        values[idx] = (tp / denom) if denom > 0 else np.nan

    n_workers = worker_count(workers)
    if n_workers == 1 or len(grid) == 1:
        for idx in range(len(grid)):
            run(idx)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run, range(len(grid))))
    return MetricSurface(grid, metric, class_index, roi_id, values)


def surface_to_csv(surface: MetricSurface, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "beta", "gamma", "value"])
        for point, value in zip(surface.grid.points, surface.values):
            writer.writerow([repr(point.alpha), repr(point.beta), repr(point.gamma),
                             "nan" if np.isnan(value) else repr(float(value))])


# --- rasterization -----------------------------------------------------------

_SNAP = 1e-9


def value_to_color(value: float, vmin: float, vmax: float) -> tuple[int, int, int]:
    """Linear red (low) to blue (high) ramp; constant surfaces map to the midpoint."""
    t = 0.5 if vmax == vmin else (value - vmin) / (vmax - vmin)
    return (round(255 * (1.0 - t)), 0, round(255 * t))


def _interpolate(surface: MetricSurface, index, a: float, b: float, c: float) -> float:
    """Barycentric simplex interpolation of the three surrounding lattice values."""
    n = surface.grid.n
    u, v, w = a * n, b * n, c * n
    ru, rv, rw = round(u), round(v), round(w)
    if (abs(u - ru) < _SNAP and abs(v - rv) < _SNAP and abs(w - rw) < _SNAP
            and ru + rv + rw == n):
        return surface.values[index[(ru, rv, rw)]]
    i, j, k = int(np.floor(u)), int(np.floor(v)), int(np.floor(w))
    f, g, e = u - i, v - j, w - k
    s = i + j + k
    if s == n:
        return surface.values[index[(i, j, k)]]
    if s == n - 1:   # upward micro-triangle
        corners = ((i + 1, j, k), (i, j + 1, k), (i, j, k + 1))
        weights = (f, g, e)
    else:            # downward micro-triangle (s == n - 2)
        corners = ((i, j + 1, k + 1), (i + 1, j, k + 1), (i + 1, j + 1, k))
        weights = (1.0 - f, 1.0 - g, 1.0 - e)
    total = 0.0
    for (ci, cj, ck), wgt in zip(corners, weights):
        pos = index.get((ci, cj, ck))
        if pos is None:   # float-boundary pathologies: nearest lattice point
            pos = index[(ru, rv, n - ru - rv)] if (ru, rv, n - ru - rv) in index \
                else index[(i, j, n - i - j)]
        val = surface.values[pos]
        if np.isnan(val):
            return np.nan
        total += wgt * val
    return total


def render_heatmap(surface: MetricSurface, width: int, height: int) -> np.ndarray:
    """Rasterize the triangle: first corner top, second bottom-left, third
    bottom-right; white outside (and where the surface is undefined)."""
    if width < 8 or height < 8:
        raise ValidationError("raster must be at least 8 x 8")
    n = surface.grid.n
    index = {}
    for pos, point in enumerate(surface.grid.points):
        key = (round(point.alpha * n), round(point.beta * n), round(point.gamma * n))
        index[key] = pos
    defined = surface.values[~np.isnan(surface.values)]
    if defined.size == 0:
        raise ValidationError("surface has no defined values to render")
    vmin, vmax = float(defined.min()), float(defined.max())

    corners_px = triangle_vertex_pixels(width, height)
    top = np.array(corners_px["top"], dtype=np.float64)
    left = np.array(corners_px["left"], dtype=np.float64)
    right = np.array(corners_px["right"], dtype=np.float64)
    # Barycentric solve: [x, y] = a*top + b*left + c*right with a+b+c = 1.
    t_mat = np.array([[top[0] - right[0], left[0] - right[0]],
                      [top[1] - right[1], left[1] - right[1]]])
    inv = np.linalg.inv(t_mat)

    image = np.full((height, width, 3), 255, dtype=np.uint8)
    for py in range(height):
        for px in range(width):
            rel = np.array([px - right[0], py - right[1]])
            a, b = inv @ rel
            c = 1.0 - a - b
            if a < -1e-9 or b < -1e-9 or c < -1e-9:
                continue
            a, b, c = max(a, 0.0), max(b, 0.0), max(c, 0.0)
            value = _interpolate(surface, index, a, b, c)
            if np.isnan(value):
                continue
            image[py, px] = value_to_color(value, vmin, vmax)
    return image


def triangle_vertex_pixels(width: int, height: int) -> dict[str, tuple[int, int]]:
    """Integer pixel positions of the three triangle vertices in a rendering."""
    pad_x, pad_y = 0.04 * width, 0.04 * height
    return {
        "top": (round(width / 2.0), round(pad_y)),
        "left": (round(pad_x), round(height - pad_y)),
        "right": (round(width - pad_x), round(height - pad_y)),
    }
