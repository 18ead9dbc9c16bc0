"""Birkhoff averages and uniform / semi-uniform convergence scans."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _config, _kernels
from ._io import csv_text, fmt
from .dynamics import Map, Rotation, SkewProductMap, is_resonant, to_coords
from .exact import ExactScalar
from .measures import EmpiricalMeasure, integrate, measure_defect
from .observables import Observable, TrigPolynomial, character_phase
from .torus import points_to_array


def default_schedule(lo: int = 2, hi: int = 6, per_decade: int = 2) -> tuple[int, ...]:
    """Geometric schedule 10^lo, 10^(lo + 1/per_decade), ..., 10^hi, rounded."""
    steps = (hi - lo) * per_decade
    return tuple(int(round(10 ** (lo + i / per_decade))) for i in range(steps + 1))


def _check_schedule(schedule: Sequence[int]) -> tuple[int, ...]:
    sched = tuple(int(n) for n in schedule)
    if not sched:
        raise ValueError("schedule must not be empty")
    if sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be strictly increasing positive integers")
    return sched


def _check_pair(m: Map, obs: Observable) -> None:
    if obs.dim != m.dim:
        raise ValueError(f"observable on T^{obs.dim} does not match the map on T^{m.dim}")


def _as_value(z: complex, real: bool):
    return z.real if real else z


def birkhoff_average(m: Map, obs: Observable, start, N: int, backend: str | None = None):
    """(1/N) sum_{i<N} obs(T^i start), streamed with compensated summation."""
    _check_pair(m, obs)
    if N < 1:
        raise ValueError("N must be at least 1")
    _config.check("orbit_steps", N, "a Birkhoff average")
    x0 = to_coords(m, start)
    if obs.constant_value is not None:
        return obs.constant_value
    s = _kernels.birkhoff_sums(m.pack(), obs.pack(), x0[None, :], [N], backend=backend)[0, 0]
    return _as_value(complex(s) / N, obs.is_real)


def character_bound(alpha: Sequence[ExactScalar], f: TrigPolynomial, N: int) -> float:
    """Seed-independent bound on |A_N f - int f| under the rotation by alpha.

    Each nonzero frequency contributes |c_k| * 2 / (N |1 - exp(2 pi i k.alpha)|);
    a frequency with k.alpha an integer makes the bound infinite.
    """
    alpha = [ExactScalar.coerce(a) for a in alpha]
    total = []
    for k, c in f.coeffs.items():
        if not any(k):
            continue
        if is_resonant(k, alpha):
            return math.inf
        total.append(abs(c) * 2.0 / (N * abs(1 - character_phase(k, alpha))))
    return math.fsum(total)


@dataclass(frozen=True)
class AverageReport:
    map_name: str
    observable_name: str
    start: tuple[float, ...]
    N: int
    value: float | complex
    error_bound: float | None
    runtime: float

    def as_dict(self) -> dict:
        v = self.value
        out = {"map": self.map_name, "observable": self.observable_name, "start": list(self.start),
               "N": self.N, "error_bound": self.error_bound, "runtime_seconds": self.runtime}
        if isinstance(v, complex):
            out["value"] = {"re": v.real, "im": v.imag}
        else:
            out["value"] = v
        return out


def average_report(m: Map, obs: Observable, start, N: int) -> AverageReport:
    t0 = time.perf_counter()
    value = birkhoff_average(m, obs, start, N)
    bound = None
    if isinstance(m, Rotation) and isinstance(obs, TrigPolynomial):
        bound = character_bound(m.alpha, obs, N)
    return AverageReport(m.name, obs.name, tuple(to_coords(m, start).tolist()), N, value, bound,
                         time.perf_counter() - t0)


@dataclass
class ConvergenceCurve:
    """Averages A_n at every schedule entry for every seed, against a target a."""

    schedule: tuple[int, ...]
    seeds: np.ndarray
    averages: np.ndarray  # (seeds, schedule)
    target: float | complex
    base_dim: int | None = None
    is_real: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.schedule = _check_schedule(self.schedule)
        if self.averages.shape != (self.seeds.shape[0], len(self.schedule)):
            raise ValueError("averages must have one row per seed and one column per schedule entry")

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.averages - self.target)

    @property
    def sup_error(self) -> np.ndarray:
        return self.errors.max(axis=0)

    def sup_error_at(self, n: int) -> float:
        return float(self.sup_error[self.schedule.index(n)])

    def _coord_names(self) -> list[str]:
        dim = self.seeds.shape[1]
        if self.base_dim is None:
            return [f"x_{i + 1}" for i in range(dim)]
        return ([f"omega_{i + 1}" for i in range(self.base_dim)]
                + [f"x_{i + 1}" for i in range(dim - self.base_dim)])

    def curve_csv(self) -> str:
        header = ["n", "seed_index"] + self._coord_names() + ["A_n", "abs_error"]
        errors = self.errors
        rows = []
        for j, n in enumerate(self.schedule):
            for s in range(self.seeds.shape[0]):
                rows.append([n, s] + [fmt(c) for c in self.seeds[s]]
                            + [fmt(self.averages[s, j], not self.is_real), fmt(errors[s, j])])
        return csv_text(header, rows)

    def summary_csv(self) -> str:
        return csv_text(["n", "sup_error"], [[n, fmt(e)] for n, e in zip(self.schedule, self.sup_error)])


def uniform_sup_scan(m: Map, obs: Observable, target, seeds, schedule: Sequence[int],
                     workers: int = 1, backend: str | None = None) -> ConvergenceCurve:
    """sup over seeds of |A_n - target| along the schedule, one pass per seed."""
    _check_pair(m, obs)
    schedule = _check_schedule(schedule)
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float)) if isinstance(seeds, np.ndarray) \
        else np.array([to_coords(m, p) for p in seeds])
    if seeds.shape[0] < 1:
        raise ValueError("seed grid must not be empty")
    if seeds.shape[1] != m.dim:
        raise ValueError(f"seeds have dimension {seeds.shape[1]} but the map acts on T^{m.dim}")
    points_to_array(seeds)
    _config.check("orbit_steps", seeds.shape[0] * schedule[-1],
                  f"a scan of {seeds.shape[0]} seeds up to n={schedule[-1]}")
    if obs.constant_value is not None:
        averages = np.full((seeds.shape[0], len(schedule)), obs.constant_value)
    else:
        sums = _kernels.birkhoff_sums(m.pack(), obs.pack(), seeds, schedule, workers, backend)
        averages = sums / np.asarray(schedule, dtype=float)[None, :]
    if obs.is_real:
        averages = averages.real.copy()
    return ConvergenceCurve(schedule, seeds, averages, target,
                            m.base_dim if isinstance(m, SkewProductMap) else None, obs.is_real,
                            {"map": m.name, "observable": obs.name})


UPPER, LOWER = "upper", "lower"


def semi_uniform_threshold(curve: ConvergenceCurve, a, eps: float, direction: str = UPPER) -> int | None:
    """Smallest schedule entry N such that every later recorded n meets the bound at all seeds.

    ``upper`` asks A_n <= a + eps and ``lower`` asks A_n >= a - eps. For a
    complex-valued observable there is no order, so both directions use
    |A_n - a| <= eps. Returns None when the last entry still fails.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if direction not in (UPPER, LOWER):
        raise ValueError(f"direction must be {UPPER!r} or {LOWER!r}")
    avg = curve.averages
    if not curve.is_real or np.iscomplexobj(avg) or isinstance(a, complex):
        ok = np.abs(avg - a) <= eps
    elif direction == UPPER:
        ok = avg <= a + eps
    else:
        ok = avg >= a - eps
    good = ok.all(axis=0)
    threshold = None
    for j in range(len(curve.schedule) - 1, -1, -1):
        if not good[j]:
            break
        threshold = curve.schedule[j]
    return threshold


@dataclass
class AuditReport:
    map_name: str
    observable_name: str
    target: float | complex
    tol: float
    entries: list[dict]
    note: str = ("only the listed near-invariant empirical measures were audited; "
                 "a pass says nothing about invariant measures outside this family")

    @property
    def flagged(self) -> list[int]:
        return [i for i, e in enumerate(self.entries) if e["flagged"]]

    @property
    def all_pass(self) -> bool:
        return not self.flagged

    def as_dict(self) -> dict:
        t = self.target
        return {"map": self.map_name, "observable": self.observable_name,
                "target": {"re": t.real, "im": t.imag} if isinstance(t, complex) else t,
                "tol": self.tol, "entries": self.entries, "flagged": self.flagged,
                "all_pass": self.all_pass, "note": self.note}


def hypothesis_audit(m: Map, obs: Observable, candidates: Sequence[EmpiricalMeasure], a, tol: float,
                     eps: float = 1e-3) -> AuditReport:
    """Check int f d mu = a (within tol) over a family of near-invariant measures.

    Each entry also records the measure's invariance defect against ``obs``
    and the fraction of its support within ``eps`` of the declared
    discontinuity set of ``obs``.
    """
    _check_pair(m, obs)
    if tol <= 0:
        raise ValueError("tol must be positive")
    cert = obs.discontinuity
    entries = []
    for mu in candidates:
        value = integrate(mu, obs)
        gap = abs(value - a)
        near = 0.0 if cert.is_empty else float(np.count_nonzero(cert.distance(mu.points) < eps)) / mu.n
        entries.append({
            "provenance": mu.provenance.as_dict(),
            "integral": {"re": value.real, "im": value.imag} if isinstance(value, complex) else value,
            "gap": gap,
            "invariance_defect": measure_defect(mu, m, obs),
            "near_discontinuity_fraction": near,
            "flagged": bool(gap > tol),
        })
    return AuditReport(m.name, obs.name, a, tol, entries)
