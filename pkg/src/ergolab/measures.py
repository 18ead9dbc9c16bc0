"""Empirical and Dirac measures on tori, push-forwards and weak* diagnostics.

All integrals are correctly rounded sums (``math.fsum``) of the observable
values divided by the support size, so the result does not depend on the
order in which values were produced and round-off stays at the
machine-epsilon scale of the integrand regardless of ``n``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _config, _kernels
from .dynamics import Map, SkewProductMap, iterate, orbit_blocks, to_coords
from .observables import Observable
from .torus import TorusPoint


@dataclass(frozen=True)
class Provenance:
    source: str
    start: tuple[float, ...]
    n: int

    def as_dict(self) -> dict:
        return {"source": self.source, "start": list(self.start), "n": self.n}


class EmpiricalMeasure:
    """Uniform weights 1/n on the rows of ``points``.

    ``base_dim`` marks phase points (omega, x): the first ``base_dim``
    coordinates are the base component. It is ``None`` for plain torus
    points.
    """

    def __init__(self, points: np.ndarray, provenance: Provenance | None = None,
                 base_dim: int | None = None):
        pts = np.array(points, dtype=float, ndmin=2)
        if pts.shape[0] < 1:
            raise ValueError("an empirical measure needs at least one point")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise ValueError("support points must have coordinates in [0, 1)")
        if base_dim is not None and not 0 < base_dim < pts.shape[1]:
            raise ValueError(f"base dimension {base_dim} does not split T^{pts.shape[1]}")
        pts.setflags(write=False)
        self.points = pts
        self.base_dim = base_dim
        self.provenance = provenance or Provenance("explicit", tuple(pts[0]), pts.shape[0])
        if self.provenance.n != pts.shape[0]:
            raise ValueError("provenance length does not match the support")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def weight(self) -> float:
        return 1.0 / self.n

    def support(self) -> list:
        rows = [tuple(r) for r in self.points.tolist()]
        if self.base_dim is None:
            return [TorusPoint(r) for r in rows]
        b = self.base_dim
        return [(TorusPoint(r[:b]), TorusPoint(r[b:])) for r in rows]

    def integrate(self, obs: Observable, workers: int = 1):
        return integrate(self, obs, workers)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, dim={self.dim}, source={self.provenance.source!r})"


class DiracMeasure(EmpiricalMeasure):
    """The point mass at a single phase point."""

    def __init__(self, atom: np.ndarray | Sequence[float], base_dim: int | None = None, source: str = "dirac"):
        atom = np.array(atom, dtype=float).reshape(1, -1)
        super().__init__(atom, Provenance(source, tuple(atom[0]), 1), base_dim)

    @property
    def atom(self) -> np.ndarray:
        return self.points[0]


def dirac(p, m: Map | None = None) -> DiracMeasure:
    """Dirac measure at ``p`` (a TorusPoint, an (omega, x) pair or coordinates)."""
    if m is not None:
        return DiracMeasure(to_coords(m, p), m.base_dim if isinstance(m, SkewProductMap) else None)
    if isinstance(p, tuple) and len(p) == 2 and all(isinstance(q, TorusPoint) for q in p):
        return DiracMeasure(p[0].coords + p[1].coords, p[0].dim)
    return DiracMeasure(tuple(p))


def _base_dim(m: Map) -> int | None:
    return m.base_dim if isinstance(m, SkewProductMap) else None


def empirical_from_orbit(m: Map, start, n: int) -> EmpiricalMeasure:
    """Uniform measure on the first n orbit points of ``start``."""
    pts = np.concatenate(list(orbit_blocks(m, start, n)), axis=0)
    prov = Provenance(m.name, tuple(to_coords(m, start).tolist()), n)
    return EmpiricalMeasure(pts, prov, _base_dim(m))


def _values(obs: Observable, pts: np.ndarray, workers: int) -> np.ndarray:
    return _kernels._threaded(obs.values, pts, workers)


def _mean(vals: np.ndarray, n: int, real: bool):
    re = math.fsum(vals.real.tolist()) / n
    if real:
        return re
    return complex(re, math.fsum(vals.imag.tolist()) / n)


def integrate(mu: EmpiricalMeasure, obs: Observable, workers: int = 1):
    """(1/n) sum_i obs(support_i), correctly rounded before the division."""
    if obs.dim != mu.dim:
        raise ValueError(f"observable on T^{obs.dim} cannot be integrated against a measure on T^{mu.dim}")
    if obs.constant_value is not None:
        return obs.constant_value
    return _mean(_values(obs, mu.points, workers), mu.n, obs.is_real)


def pushforward(mu: EmpiricalMeasure, m: Map) -> EmpiricalMeasure:
    """T_* mu: the support mapped pointwise, weights unchanged."""
    if m.dim != mu.dim:
        raise ValueError(f"map on T^{m.dim} cannot push a measure on T^{mu.dim}")
    pts = _kernels.map_points(m.pack(), mu.points)
    prov = Provenance(f"{m.name}_*({mu.provenance.source})", tuple(pts[0]), mu.n)
    if isinstance(mu, DiracMeasure):
        return DiracMeasure(pts[0], mu.base_dim, prov.source)
    return EmpiricalMeasure(pts, prov, mu.base_dim)


def measure_defect(mu: EmpiricalMeasure, m: Map, g: Observable) -> float:
    """|int g d(T_* mu) - int g d mu|."""
    return abs(integrate(pushforward(mu, m), g) - integrate(mu, g))


def invariance_defect(m: Map, start, n: int, g: Observable) -> float:
    """Defect of the length-n orbit measure, streamed in blocks.

    Telescoping makes this (1/n)|g(T^n p) - g(p)|, hence at most
    2 sup|g| / n.
    """
    if g.dim != m.dim:
        raise ValueError(f"observable on T^{g.dim} does not match the map on T^{m.dim}")
    pushed_re, pushed_im, here_re, here_im = [], [], [], []
    for block in orbit_blocks(m, start, n):
        a = g.values(_kernels.map_points(m.pack(), block))
        b = g.values(block)
        pushed_re.append(math.fsum(a.real.tolist()))
        pushed_im.append(math.fsum(a.imag.tolist()))
        here_re.append(math.fsum(b.real.tolist()))
        here_im.append(math.fsum(b.imag.tolist()))
    pushed = complex(math.fsum(pushed_re), math.fsum(pushed_im)) / n
    here = complex(math.fsum(here_re), math.fsum(here_im)) / n
    if g.is_real:
        return abs(pushed.real - here.real)
    return abs(pushed - here)


def telescoping_defect(m: Map, start, n: int, g: Observable) -> float:
    """(1/n)|g(T^n p) - g(p)|, from the two endpoint evaluations only."""
    end = iterate(m, start, n)
    diff = g.eval(end) - g.eval(start)
    return abs(diff) / n


def base_marginal(mu: EmpiricalMeasure) -> EmpiricalMeasure:
    """Projection of a phase-space measure onto its base component."""
    if mu.base_dim is None:
        raise ValueError("the measure is not on a product space; no base component")
    pts = mu.points[:, :mu.base_dim]
    prov = Provenance(f"pi_*({mu.provenance.source})", tuple(pts[0]), mu.n)
    if isinstance(mu, DiracMeasure):
        return DiracMeasure(pts[0], None, prov.source)
    return EmpiricalMeasure(pts, prov)


def dictionary(dim: int, K: int) -> list[tuple[int, ...]]:
    """Frequencies k != 0 with max|k_i| <= K whose first nonzero entry is positive."""
    if K < 1:
        raise ValueError("frequency cutoff must be at least 1")
    size = (2 * K + 1) ** dim - 1
    _config.check("dictionary", size, f"a character dictionary with cutoff {K} on T^{dim}")
    out = []
    for k in itertools.product(range(-K, K + 1), repeat=dim):
        if next((v for v in k if v), 0) > 0:
            out.append(k)
    return out


def character_table(mu: EmpiricalMeasure, K: int) -> dict[tuple[int, ...], complex]:
    """Fourier coefficients int exp(2 pi i k.x) d mu for all 0 < max|k| <= K.

    Only half the dictionary is summed: the coefficient at -k is the
    conjugate of the one at k.
    """
    half = dictionary(mu.dim, K)
    table: dict[tuple[int, ...], complex] = {}
    for k in half:
        phase = mu.points @ np.asarray(k, dtype=float)
        r = phase - np.floor(phase)
        z = complex(math.fsum(np.cos(2 * math.pi * r).tolist()) / mu.n,
                    math.fsum(np.sin(2 * math.pi * r).tolist()) / mu.n)
        table[k] = z
        table[tuple(-v for v in k)] = z.conjugate()
    return {k: table[k] for k in sorted(table)}


def weak_star_discrepancy(mu: EmpiricalMeasure, K: int = 8) -> float:
    """max |mu^(k)| over 0 < max|k_i| <= K: the distance to Haar seen by the dictionary."""
    table = character_table(mu, K)
    return min(1.0, max(abs(z) for z in table.values()))


def measure_report(mu: EmpiricalMeasure, K: int = 8, m: Map | None = None,
                   tests: Sequence[Observable] = ()) -> dict:
    """JSON-ready diagnostics: provenance, character table and invariance defects."""
    table = character_table(mu, K)
    report = {
        "provenance": mu.provenance.as_dict(),
        "n": mu.n,
        "dim": mu.dim,
        "cutoff": K,
        "characters": [{"k": list(k), "re": z.real, "im": z.imag, "abs": abs(z)} for k, z in table.items()],
        "weak_star_discrepancy": min(1.0, max(abs(z) for z in table.values())),
    }
    if m is not None:
        report["defects"] = [{"observable": g.name, "defect": measure_defect(mu, m, g),
                              "bound": 2 * g.sup_norm_bound / mu.n} for g in tests]
    return report
