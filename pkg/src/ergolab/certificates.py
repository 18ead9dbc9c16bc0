"""Declared discontinuity sets.

A certificate lists finitely many pieces of a closed set that contains
every discontinuity of a map or observable. The pieces are meant to be
Haar-null; the certificate records that claim and a justification rather
than proving it. Distances use the max-metric on the torus.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .torus import circle_dist


def _arc_distance(p: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Circle distance from p to the closed arc [lo, hi] (no wrap, hi - lo < 1)."""
    inside = (p >= lo) & (p <= hi)
    d = np.minimum(circle_dist(p, lo), circle_dist(p, hi % 1.0))
    return np.where(inside, 0.0, d)


@dataclass(frozen=True)
class PointSet:
    points: tuple[tuple[float, ...], ...]

    def distance(self, pts: np.ndarray) -> np.ndarray:
        if not self.points:
            return np.full(pts.shape[0], np.inf)
        ref = np.asarray(self.points, dtype=float)
        return circle_dist(pts[:, None, :], ref[None, :, :]).max(axis=2).min(axis=1)


@dataclass(frozen=True)
class HyperplaneSlice:
    """The set {x : x[axis] = value}."""

    axis: int
    value: float

    def distance(self, pts: np.ndarray) -> np.ndarray:
        return circle_dist(pts[:, self.axis], self.value % 1.0)


@dataclass(frozen=True)
class RectangleBoundary:
    """Boundary of the box prod [lo_i, hi_i); axes with hi - lo >= 1 wrap fully and have no faces."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def _full(self, i: int) -> bool:
        return self.hi[i] - self.lo[i] >= 1.0

    def distance(self, pts: np.ndarray) -> np.ndarray:
        dim = len(self.lo)
        arc = np.zeros((pts.shape[0], dim))
        for j in range(dim):
            if not self._full(j):
                arc[:, j] = _arc_distance(pts[:, j], self.lo[j], self.hi[j])
        best = np.full(pts.shape[0], np.inf)
        for i in range(dim):
            if self._full(i):
                continue
            others = np.delete(arc, i, axis=1).max(axis=1) if dim > 1 else np.zeros(pts.shape[0])
            for c in (self.lo[i], self.hi[i] % 1.0):
                best = np.minimum(best, np.maximum(circle_dist(pts[:, i], c), others))
        return best


Piece = Union[PointSet, HyperplaneSlice, RectangleBoundary]


@dataclass(frozen=True)
class DiscontinuityCertificate:
    dim: int
    pieces: tuple[Piece, ...] = ()
    justification: str = "continuous everywhere"
    declared_measure_zero: bool = True
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def distance(self, pts) -> np.ndarray:
        """Distance from each row of ``pts`` to the declared set (inf when empty)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(f"certificate lives on T^{self.dim}, got points of dimension {pts.shape[1]}")
        out = np.full(pts.shape[0], np.inf)
        for piece in self.pieces:
            out = np.minimum(out, piece.distance(pts))
        return out

    def near(self, pts, eps: float) -> np.ndarray:
        return self.distance(pts) < eps

    def union(self, other: DiscontinuityCertificate) -> DiscontinuityCertificate:
        if other.dim != self.dim:
            raise ValueError("cannot union certificates of different dimensions")
        if other.is_empty:
            return self
        if self.is_empty:
            return other
        pieces = self.pieces + tuple(p for p in other.pieces if p not in self.pieces)
        return DiscontinuityCertificate(
            self.dim, pieces, f"{self.justification}; {other.justification}",
            self.declared_measure_zero and other.declared_measure_zero)

    def project(self, base_dim: int) -> DiscontinuityCertificate:
        """Image under the projection onto the first ``base_dim`` axes.

        Only cylinder pieces (sets of the form B x X) and points project to
        certified sets; anything else would project onto a set of positive
        measure and is rejected.
        """
        out: list[Piece] = []
        for piece in self.pieces:
            if isinstance(piece, PointSet):
                out.append(PointSet(tuple(p[:base_dim] for p in piece.points)))
            elif isinstance(piece, HyperplaneSlice):
                if piece.axis >= base_dim:
                    raise ValueError(f"hyperplane on fiber axis {piece.axis} projects onto the whole base")
                out.append(piece)
            else:
                if any(piece.hi[i] - piece.lo[i] < 1.0 for i in range(base_dim, self.dim)):
                    raise ValueError("rectangle boundary is not a cylinder over the base; "
                                     "its projection has positive measure")
                out.append(RectangleBoundary(piece.lo[:base_dim], piece.hi[:base_dim]))
        return DiscontinuityCertificate(base_dim, tuple(out), self.justification,
                                        self.declared_measure_zero)

    def embed(self, total_dim: int, axes: Sequence[int]) -> DiscontinuityCertificate:
        """Preimage under the coordinate projection T^total -> T^dim onto ``axes``."""
        axes = tuple(axes)
        if len(axes) != self.dim:
            raise ValueError("need one target axis per certificate axis")
        out: list[Piece] = []
        for piece in self.pieces:
            if isinstance(piece, HyperplaneSlice):
                out.append(HyperplaneSlice(axes[piece.axis], piece.value))
            elif isinstance(piece, RectangleBoundary):
                lo, hi = [0.0] * total_dim, [1.0] * total_dim
                for i, a in enumerate(axes):
                    lo[a], hi[a] = piece.lo[i], piece.hi[i]
                out.append(RectangleBoundary(tuple(lo), tuple(hi)))
            else:
                # {p} x rest is covered by the hyperplanes through p
                for p in piece.points:
                    out.extend(HyperplaneSlice(axes[i], c) for i, c in enumerate(p))
        return DiscontinuityCertificate(total_dim, tuple(dict.fromkeys(out)), self.justification,
                                        self.declared_measure_zero)


def empty_certificate(dim: int) -> DiscontinuityCertificate:
    return DiscontinuityCertificate(dim)
