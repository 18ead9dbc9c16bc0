"""Double averages (1/N) sum_n f1(x + n alpha) f2(x + 2n alpha) and their limit.

For trigonometric polynomials f1 = sum c_k e_k and f2 = sum d_j e_j the
summand is sum c_k d_j e_{k+j}(x) exp(2 pi i n (k + 2j).alpha). With 1,
alpha_1, ..., alpha_l rationally independent, only pairs with k + 2j = 0
survive averaging, so the limit at every x is

    F(x) = sum_j c_{-2j} d_j e_{-j}(x) = int f1(x + t) f2(x + 2t) dt,

and every other pair contributes a geometric sum of size at most
2 |c_k d_j| / (N |1 - exp(2 pi i (k + 2j).alpha)|).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _config, _kernels
from .dynamics import Rotation, independence_falsifier, is_resonant
from .observables import TrigPolynomial, character_phase
from .torus import haar_sample_array, lattice_grid_array, points_to_array, wrap_array

MATCH, MISMATCH = "MATCH", "MISMATCH"


def _require_trig(*fs) -> None:
    for f in fs:
        if not isinstance(f, TrigPolynomial):
            raise TypeError("double averages are defined here for trigonometric polynomials only")


def default_points(dim: int, seed: int = 0) -> np.ndarray:
    """About 100 lattice points plus 10 seeded Haar-random points."""
    m = max(1, round(100 ** (1.0 / dim)))
    return np.concatenate([lattice_grid_array(dim, m), haar_sample_array(dim, 10, seed)], axis=0)


@dataclass
class DoubleAverageSpec:
    rotation: Rotation
    f1: TrigPolynomial
    f2: TrigPolynomial
    points: np.ndarray
    schedule: tuple[int, ...]

    def __post_init__(self):
        _require_trig(self.f1, self.f2)
        dim = self.rotation.dim
        if self.f1.dim != dim or self.f2.dim != dim:
            raise ValueError(f"f1, f2 and the rotation must share one dimension (got "
                             f"{self.f1.dim}, {self.f2.dim}, {dim})")
        self.points = points_to_array(np.atleast_2d(np.asarray(self.points, dtype=float)))
        if self.points.shape[1] != dim:
            raise ValueError(f"evaluation points must lie in T^{dim}")
        sched = tuple(int(n) for n in self.schedule)
        if not sched or sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("schedule must be strictly increasing positive integers")
        self.schedule = sched


@dataclass(frozen=True)
class KroneckerLimit:
    """The limit F and the resonant pairs (k, j, c_k d_j) with k + 2j = 0 that build it."""

    F: TrigPolynomial
    pairs: tuple[tuple[tuple[int, ...], tuple[int, ...], complex], ...]


def double_sums(R: Rotation, f1: TrigPolynomial, f2: TrigPolynomial, points, schedule,
                workers: int = 1, backend: str | None = None) -> np.ndarray:
    """Partial sums at each schedule entry, one row per point."""
    _require_trig(f1, f2)
    if f1.dim != R.dim or f2.dim != R.dim:
        raise ValueError("f1, f2 and the rotation must share one dimension")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sched = np.asarray(schedule, dtype=np.int64)
    _config.check("orbit_steps", 2 * pts.shape[0] * int(sched[-1]),
                  f"double averages at {pts.shape[0]} points up to N={int(sched[-1])}")
    return _kernels.double_sums(R.pack().alpha, f1.pack(), f2.pack(), pts, sched, workers, backend)


def double_average(R: Rotation, f1: TrigPolynomial, f2: TrigPolynomial, x, N: int,
                   backend: str | None = None) -> complex:
    """(1/N) sum_{n<N} f1(R^n x) f2(R^{2n} x)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    x = np.asarray(tuple(x), dtype=float)
    return complex(double_sums(R, f1, f2, x[None, :], [N], backend=backend)[0, 0]) / N


def kronecker_limit_oracle(f1: TrigPolynomial, f2: TrigPolynomial) -> KroneckerLimit:
    _require_trig(f1, f2)
    if f1.dim != f2.dim:
        raise ValueError("f1 and f2 must share one dimension")
    table: dict[tuple[int, ...], complex] = {}
    pairs = []
    for j, d in f2.coeffs.items():
        k = tuple(-2 * v for v in j)
        c = f1.coeffs.get(k)
        if c is None:
            continue
        prod = c * d
        pairs.append((k, j, prod))
        table[tuple(-v for v in j)] = prod
    F = TrigPolynomial(f1.dim, table, "F", real=(f1.is_real and f2.is_real) or None)
    return KroneckerLimit(F, tuple(pairs))


def quadrature_limit_oracle(f1: TrigPolynomial, f2: TrigPolynomial, x, M: int) -> complex:
    """(1/M^l) sum over the M-lattice t of f1(x + t) f2(x + 2t).

    Exact for band-limited integrands once M exceeds deg_i f1 + 2 deg_i f2
    on every axis i; smaller M is rejected.
    """
    _require_trig(f1, f2)
    dim = f1.dim
    need = min_lattice_size(f1, f2)
    if M < need:
        raise ValueError(f"lattice size {M} aliases frequencies of f1(x+t) f2(x+2t); need M >= {need}")
    x = np.asarray(tuple(x), dtype=float)
    t = lattice_grid_array(dim, M)
    a = f1.values(wrap_array(x[None, :] + t))
    b = f2.values(wrap_array(x[None, :] + 2.0 * t))
    v = a * b
    n = t.shape[0]
    return complex(math.fsum(v.real.tolist()) / n, math.fsum(v.imag.tolist()) / n)


def min_lattice_size(f1: TrigPolynomial, f2: TrigPolynomial) -> int:
    dim = f1.dim
    widest = 0
    for i in range(dim):
        k1 = max((abs(k[i]) for k in f1.coeffs), default=0)
        k2 = max((abs(j[i]) for j in f2.coeffs), default=0)
        widest = max(widest, k1 + 2 * k2)
    return widest + 1


def nonresonant_constant(R: Rotation, f1: TrigPolynomial, f2: TrigPolynomial) -> float:
    """C with |A_N(x) - F(x)| <= C / N for every x and N.

    C = sum over pairs with k + 2j != 0 of 2 |c_k d_j| / |1 - exp(2 pi i (k + 2j).alpha)|;
    infinite when some nonzero k + 2j is resonant with alpha.
    """
    parts = []
    for k, c in f1.coeffs.items():
        for j, d in f2.coeffs.items():
            m = tuple(a + 2 * b for a, b in zip(k, j))
            if not any(m):
                continue
            if is_resonant(m, R.alpha):
                return math.inf
            parts.append(2.0 * abs(c * d) / abs(1 - character_phase(m, R.alpha)))
    return math.fsum(parts)


@dataclass
class ConvergenceReport:
    spec: DoubleAverageSpec
    limit: KroneckerLimit
    C: float
    averages: np.ndarray  # (points, schedule) complex
    errors: np.ndarray  # (points, schedule)
    slack: float = 1e-10

    @property
    def max_error(self) -> np.ndarray:
        return self.errors.max(axis=0)

    @property
    def bounds(self) -> np.ndarray:
        return self.C / np.asarray(self.spec.schedule, dtype=float)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.errors <= self.bounds[None, :] + self.slack))

    def as_dict(self) -> dict:
        s = self.spec
        return {
            "spec": {"alpha": [str(a) for a in s.rotation.alpha],
                     "f1": coefficient_table(s.f1), "f2": coefficient_table(s.f2),
                     "points": s.points.tolist(), "schedule": list(s.schedule)},
            "limit": coefficient_table(self.limit.F),
            "resonant_pairs": [{"k": list(k), "j": list(j), "re": z.real, "im": z.imag}
                               for k, j, z in self.limit.pairs],
            "C": self.C,
            "errors": [{"point_index": p, "N": n, "error": float(self.errors[p, i])}
                       for i, n in enumerate(s.schedule) for p in range(s.points.shape[0])],
            "max_error": [{"N": n, "max_error": float(e), "bound": float(b)}
                          for n, e, b in zip(s.schedule, self.max_error, self.bounds)],
            "passed": self.passed,
            "limit_comparison": product_limit_comparison(s.f1, s.f2).as_dict(),
        }


def pointwise_convergence_test(spec: DoubleAverageSpec, height: int = 20, workers: int = 1,
                               backend: str | None = None) -> ConvergenceReport:
    """Compare the double average with F at every point and schedule entry.

    The angles must survive the integer-relation search at ``height``;
    otherwise the resonance limit is not the right target.
    """
    relation = independence_falsifier(spec.rotation.alpha, height)
    if relation is not None:
        raise ValueError(f"angles satisfy the integer relation {list(relation.k)}; "
                         "the rotation is not minimal and F is not the limit")
    limit = kronecker_limit_oracle(spec.f1, spec.f2)
    sums = double_sums(spec.rotation, spec.f1, spec.f2, spec.points, spec.schedule, workers, backend)
    averages = sums / np.asarray(spec.schedule, dtype=float)[None, :]
    target = limit.F.values(spec.points)
    errors = np.abs(averages - target[:, None])
    return ConvergenceReport(spec, limit, nonresonant_constant(spec.rotation, spec.f1, spec.f2),
                             averages, errors)


def coefficient_table(f: TrigPolynomial) -> list[dict]:
    return [{"k": list(k), "re": c.real, "im": c.imag} for k, c in f.coeffs.items()]


@dataclass(frozen=True)
class LimitComparison:
    F: TrigPolynomial
    product: complex
    difference: TrigPolynomial
    flag: str

    @property
    def matches(self) -> bool:
        return self.flag == MATCH

    def as_dict(self) -> dict:
        return {"flag": self.flag, "resonance_limit": coefficient_table(self.F),
                "product_of_integrals": {"re": self.product.real, "im": self.product.imag},
                "difference": coefficient_table(self.difference)}


def product_limit_comparison(f1: TrigPolynomial, f2: TrigPolynomial, tol: float = 1e-12) -> LimitComparison:
    """Compare F with the constant (int f1)(int f2).

    MATCH exactly when F is a constant equal to that product.
    """
    F = kronecker_limit_oracle(f1, f2).F
    product = complex(f1.haar_integral()) * complex(f2.haar_integral())
    zero = (0,) * f1.dim
    table = dict(F.coeffs)
    table[zero] = table.get(zero, 0j) - product
    diff = TrigPolynomial(f1.dim, {k: v for k, v in table.items() if abs(v) > tol}, "F - product")
    return LimitComparison(F, product, diff, MISMATCH if diff.coeffs else MATCH)


def character_pairs(dim: int, degree: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All pairs (k, j) of frequency vectors with entries in [-degree, degree]."""
    freqs = list(itertools.product(range(-degree, degree + 1), repeat=dim))
    return [(k, j) for k in freqs for j in freqs]
