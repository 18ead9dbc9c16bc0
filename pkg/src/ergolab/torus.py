"""Points, metric, sampling and grids on the torus T^l = [0, 1)^l."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _config


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^l stored as l coordinates in [0, 1)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise ValueError("a torus point needs at least one coordinate")
        for c in coords:
            if not (0.0 <= c < 1.0):
                raise ValueError(f"coordinate {c!r} is outside [0, 1); use wrap()")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def wrap_array(raw: np.ndarray) -> np.ndarray:
    """Reduce every entry mod 1 into [0, 1); 1.0 after rounding maps to 0.0."""
    raw = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise ValueError("cannot wrap non-finite coordinates")
    out = raw - np.floor(raw)
    out[out >= 1.0] = 0.0
    return out


def wrap(raw: Sequence[float] | np.ndarray) -> TorusPoint:
    values = np.atleast_1d(np.asarray(raw, dtype=float))
    if values.ndim != 1:
        raise ValueError("wrap expects a flat coordinate vector")
    return TorusPoint(tuple(wrap_array(values).tolist()))


def as_point(p: TorusPoint | Sequence[float]) -> TorusPoint:
    return p if isinstance(p, TorusPoint) else TorusPoint(tuple(p))


def circle_dist(a: np.ndarray | float, b: np.ndarray | float) -> np.ndarray:
    """Per-coordinate circle distance min(|a-b|, 1-|a-b|) for inputs in [0, 1)."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return np.minimum(d, 1.0 - d)


def dist_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Max-metric torus distance between rows of ``x`` and ``y``."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return circle_dist(x, y).max(axis=-1)


def dist(x: TorusPoint | Sequence[float], y: TorusPoint | Sequence[float]) -> float:
    x, y = as_point(x), as_point(y)
    if x.dim != y.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {y.dim}")
    return max(min(abs(a - b), 1.0 - abs(a - b)) for a, b in zip(x, y))


def haar_sample_array(dim: int, count: int, seed: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be at least 1")
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    rng = np.random.default_rng(seed)
    return rng.random((count, dim))


def haar_sample(dim: int, count: int, seed: int) -> list[TorusPoint]:
    """``count`` Haar-distributed points, reproducible from ``seed``."""
    return [TorusPoint(tuple(row)) for row in haar_sample_array(dim, count, seed).tolist()]


def lattice_grid_array(dim: int, m: int) -> np.ndarray:
    if m < 1 or dim < 1:
        raise ValueError("grid resolution and dimension must be at least 1")
    total = m ** dim
    _config.check("grid_points", total, f"a {m}^{dim} lattice grid")
    axis = np.arange(m, dtype=float) / m
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def lattice_grid(dim: int, m: int) -> list[TorusPoint]:
    """The points (j_1/m, ..., j_l/m) in lexicographic order."""
    return [TorusPoint(tuple(row)) for row in lattice_grid_array(dim, m).tolist()]


def points_to_array(points: Iterable[TorusPoint | Sequence[float]]) -> np.ndarray:
    rows = [tuple(p) for p in points]
    if not rows:
        raise ValueError("empty point list")
    arr = np.array(rows, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ValueError("points must have coordinates in [0, 1)")
    return arr
