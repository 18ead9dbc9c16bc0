"""Hot loops: orbit generation, observable evaluation and compensated sums.

The compiled core (``_core``, built from Cython) is used when it imports;
otherwise the numpy implementation in ``_fallback`` takes over. Setting
``ERGOLAB_PURE_PYTHON=1`` forces the fallback.

Work split across ``workers`` threads is cut into contiguous blocks of
seeds or points and reassembled in order; every seed is computed by the
same sequential code either way, so results do not depend on the worker
count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from types import ModuleType

import numpy as np

from . import _fallback
from .packs import DRIFT_CHECK, DRIFT_TOL, DriftError, MapPack, ObsPack

try:
    if os.environ.get("ERGOLAB_PURE_PYTHON"):
        raise ImportError("compiled kernels disabled by ERGOLAB_PURE_PYTHON")
    from . import _core
except ImportError:
    _core = None

BACKENDS: dict[str, ModuleType] = {"python": _fallback}
if _core is not None:
    BACKENDS["compiled"] = _core

_active = "compiled" if _core is not None else "python"


def backend_name() -> str:
    return _active


def set_backend(name: str) -> str:
    """Select a backend by name; returns the previous one."""
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}")
    previous, _active = _active, name
    return previous


def _impl(backend: str | None) -> ModuleType:
    return BACKENDS[backend or _active]


def _blocks(count: int, workers: int) -> list[slice]:
    workers = max(1, min(workers, count))
    edges = np.linspace(0, count, workers + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _threaded(call, rows: np.ndarray, workers: int) -> np.ndarray:
    blocks = _blocks(rows.shape[0], workers)
    if len(blocks) == 1:
        return call(rows)
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        parts = list(pool.map(lambda b: call(rows[b]), blocks))
    return np.concatenate(parts, axis=0)


def eval_points(op: ObsPack, pts: np.ndarray, backend: str | None = None) -> np.ndarray:
    return _impl(backend).eval_points(op, np.atleast_2d(np.asarray(pts, dtype=float)))


def map_points(mp: MapPack, pts: np.ndarray, backend: str | None = None) -> np.ndarray:
    return _impl(backend).map_points(mp, np.atleast_2d(np.asarray(pts, dtype=float)))


def orbit_points(mp: MapPack, start, n0: int, counts0, length: int, backend: str | None = None):
    counts0 = np.asarray(counts0, dtype=np.int64).reshape(mp.n_steps)
    return _impl(backend).orbit_points(mp, np.asarray(start, dtype=float), int(n0), counts0, int(length))


def birkhoff_sums(mp: MapPack, op: ObsPack, starts, checkpoints, workers: int = 1,
                  backend: str | None = None) -> np.ndarray:
    """Prefix sums S_n = sum_{i<n} f(p_i) at each checkpoint n, per start."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    impl = _impl(backend)
    return _threaded(lambda rows: impl.birkhoff_sums(mp, op, rows, checkpoints), starts, workers)


def double_sums(alpha: np.ndarray, op1: ObsPack, op2: ObsPack, points, checkpoints,
                workers: int = 1, backend: str | None = None) -> np.ndarray:
    """Prefix sums of f1(x + n alpha) f2(x + 2n alpha) at each checkpoint, per point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    impl = _impl(backend)
    return _threaded(lambda rows: impl.double_sums(alpha, op1, op2, rows, checkpoints), points, workers)


__all__ = [
    "BACKENDS", "DRIFT_CHECK", "DRIFT_TOL", "DriftError", "MapPack", "ObsPack",
    "backend_name", "set_backend", "eval_points", "map_points", "orbit_points",
    "birkhoff_sums", "double_sums",
]
