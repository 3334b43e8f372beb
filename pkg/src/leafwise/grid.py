"""Flat-torus grids, sampled scalar fields and the periodic Laplacian."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import signal

from .errors import GridMismatchError, NonPositiveError


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on a 1-D or 2-D flat torus.

    Axis 0 is the slowest index when fields are flattened.
    """

    points: tuple[int, ...]
    periods: tuple[float, ...]
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        pts = tuple(int(p) for p in np.atleast_1d(self.points))
        per = tuple(float(L) for L in np.atleast_1d(self.periods))
        if len(pts) not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {len(pts)}")
        if len(per) != len(pts):
            raise ValueError("points and periods must have the same length")
        if any(p < 8 for p in pts):
            raise ValueError(f"need at least 8 points per axis, got {pts}")
        if any(not np.isfinite(L) or L <= 0 for L in per):
            raise ValueError(f"periods must be positive, got {per}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "periods", per)
        object.__setattr__(self, "spacing", tuple(L / p for L, p in zip(per, pts)))

    @classmethod
    def uniform(cls, n: int, period: float = 2 * np.pi, dim: int = 1) -> "TorusGrid":
        return cls((n,) * dim, (period,) * dim)

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))

    def axes(self) -> list[np.ndarray]:
        return [np.arange(n) * h for n, h in zip(self.points, self.spacing)]

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of grid shape (ij indexing)."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def to_dict(self) -> dict:
        return {"dims": self.dim, "points": list(self.points), "periods": list(self.periods)}

    @classmethod
    def from_dict(cls, d: dict) -> "TorusGrid":
        g = cls(tuple(d["points"]), tuple(d["periods"]))
        if "dims" in d and int(d["dims"]) != g.dim:
            raise ValueError("grid 'dims' disagrees with 'points'")
        return g


class ScalarField:
    """Immutable real samples of a function on a TorusGrid."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: TorusGrid, values):
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size == 1 and grid.size > 1:
            arr = np.full(grid.size, arr[0])
        if arr.size != grid.size:
            raise ValueError(f"expected {grid.size} values, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    def __reduce__(self):
        return (ScalarField, (self.grid, np.array(self.values)))

    @classmethod
    def constant(cls, grid: TorusGrid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.size, float(c)))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn: Callable[..., np.ndarray]) -> "ScalarField":
        vals = np.broadcast_to(np.asarray(fn(*grid.coords()), dtype=float), grid.shape)
        return cls(grid, vals)

    @property
    def shaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        lo, hi = min_max(self)
        return f"ScalarField(points={self.grid.points}, min={lo:.6g}, max={hi:.6g})"

    def is_constant(self, tol: float = 0.0) -> bool:
        lo, hi = min_max(self)
        return hi - lo <= tol * max(1.0, abs(hi), abs(lo))

    # arithmetic returns new fields; scalars and same-grid fields are accepted
    def _other(self, other):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return float(other)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.grid, self.values / self._other(other))

    def __rtruediv__(self, other):
        return ScalarField(self.grid, self._other(other) / self.values)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def __pow__(self, k):
        return ScalarField(self.grid, self.values ** float(k))

    def __abs__(self):
        return ScalarField(self.grid, np.abs(self.values))


def same_grid(*fields: ScalarField) -> TorusGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    return grid


def laplacian_array(arr: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Second-order periodic Laplacian of an array shaped like the grid."""
    out = np.zeros_like(arr, dtype=float)
    for ax, h in enumerate(spacing):
        out += (np.roll(arr, 1, axis=ax) - 2.0 * arr + np.roll(arr, -1, axis=ax)) / (h * h)
    return out


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, laplacian_array(f.shaped, f.grid.spacing))


def inner_l2(f: ScalarField, g: ScalarField) -> float:
    grid = same_grid(f, g)
    return float(np.dot(f.values, g.values) * grid.cell_volume)


def l2_norm(f: ScalarField) -> float:
    return float(np.sqrt(inner_l2(f, f)))


def sup_norm(f: ScalarField) -> float:
    return float(np.max(np.abs(f.values)))


def min_max(f: ScalarField) -> tuple[float, float]:
    return float(np.min(f.values)), float(np.max(f.values))


def delta_ratio(f) -> float:
    """min f / max f for a strictly positive field or array."""
    vals = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if lo <= 0:
        raise NonPositiveError(f"delta ratio needs a positive field (min = {lo:g})")
    return lo / hi


def resample(f: ScalarField, points: Sequence[int]) -> ScalarField:
    """Trigonometric interpolation of f onto a grid with the same periods.

    Exact for band-limited data whose modes fit on both grids.
    """
    new = TorusGrid(tuple(points), f.grid.periods)
    arr = f.shaped
    for ax, n in enumerate(new.points):
        if arr.shape[ax] != n:
            arr = signal.resample(arr, n, axis=ax)
    return ScalarField(new, arr)


# ---------------------------------------------------------------------------
# serialization


def field_to_dict(f: ScalarField) -> dict:
    return {"grid": f.grid.to_dict(), "values": [float(v) for v in f.values]}


def field_from_dict(d: dict) -> ScalarField:
    return ScalarField(TorusGrid.from_dict(d["grid"]), d["values"])


def write_field_json(f: ScalarField, path) -> None:
    Path(path).write_text(json.dumps(field_to_dict(f)))


def read_field_json(path) -> ScalarField:
    return field_from_dict(json.loads(Path(path).read_text()))


def write_field_csv(f: ScalarField, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(f.values):
            w.writerow([i, repr(float(v))])


def read_field_csv(path, grid: TorusGrid) -> ScalarField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["index", "value"]:
        raise ValueError(f"{path}: expected header 'index,value'")
    body = [r for r in rows[1:] if r]
    idx = np.array([int(r[0]) for r in body])
    vals = np.array([float(r[1]) for r in body])
    if idx.size != grid.size or not np.array_equal(np.sort(idx), np.arange(grid.size)):
        raise ValueError(f"{path}: indices must cover 0..{grid.size - 1}")
    out = np.empty(grid.size)
    out[idx] = vals
    return ScalarField(grid, out)
