"""Rotations, step skew products, orbits and integer-relation search.

Orbit points are computed from the exact angle form: coordinate ``j`` of
the ``n``-th base point is ``w0_j + n * alpha_j mod 1``, and fiber
coordinates add ``n * beta`` plus, for each step rule, the number of
earlier visits to its box times its shift. Nothing accumulates along the
orbit, so long orbits do not drift.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import numpy as np

from . import _config, _kernels
from ._kernels import MapPack
from ._kernels._dd import frac_mul, wrap_sum
from .certificates import DiscontinuityCertificate, RectangleBoundary, empty_certificate
from .exact import ExactScalar
from .torus import TorusPoint, points_to_array

ORBIT_CHUNK = 1 << 14

PhasePoint = tuple[TorusPoint, TorusPoint]


def _scalars(values) -> tuple[ExactScalar, ...]:
    return tuple(ExactScalar.coerce(v) for v in values)


def _dd_angles(values: Sequence[ExactScalar]) -> np.ndarray:
    return np.array([v.frac().to_dd() for v in values], dtype=float).reshape(-1, 2)


class Rotation:
    """x -> x + alpha (mod 1) on T^l, with alpha held exactly."""

    def __init__(self, alpha: Sequence, name: str | None = None):
        self.alpha = _scalars(alpha)
        if not self.alpha:
            raise ValueError("a rotation needs at least one angle")
        self.name = name or "rotation(" + ", ".join(str(a) for a in self.alpha) + ")"
        self._pack = MapPack.build(_dd_angles(self.alpha))

    @property
    def dim(self) -> int:
        return len(self.alpha)

    base_dim = dim

    @property
    def fiber_dim(self) -> int:
        return 0

    @property
    def discontinuity(self) -> DiscontinuityCertificate:
        return empty_certificate(self.dim)

    def pack(self) -> MapPack:
        return self._pack

    def __repr__(self) -> str:
        return f"Rotation({[str(a) for a in self.alpha]})"


@dataclass(frozen=True)
class StepRule:
    """Add ``shift`` to the fiber whenever the base point lies in the box [lo, hi)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    shift: tuple[ExactScalar, ...]

    def __post_init__(self):
        lo = tuple(float(ExactScalar.coerce(v)) if isinstance(v, str) else float(v) for v in self.lo)
        hi = tuple(float(ExactScalar.coerce(v)) if isinstance(v, str) else float(v) for v in self.hi)
        if len(lo) != len(hi) or not all(0.0 <= a < b <= 1.0 for a, b in zip(lo, hi)):
            raise ValueError(f"step box [{lo}, {hi}) must satisfy 0 <= lo < hi <= 1 on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shift", _scalars(self.shift))

    @property
    def is_trivial(self) -> bool:
        """True when the shift is an integer vector, so the rule never moves a point."""
        return all(s.is_rational and s.frac() == ExactScalar.rational(0) for s in self.shift)


class SkewProductMap:
    """(w, x) -> (w + alpha, x + beta + sum_r shift_r * 1[w in box_r]) on T^lb x T^lf.

    The base evolves by its own rotation, so the projection onto the base
    intertwines this map with the base rotation. The fiber rule is
    discontinuous at most on the boundaries of the step boxes times the
    fiber, which is the declared certificate.
    """

    def __init__(self, base: Rotation | Sequence, fiber_shift: Sequence = (),
                 steps: Sequence[StepRule] = (), name: str | None = None, fiber_dim: int | None = None):
        self.base = base if isinstance(base, Rotation) else Rotation(base)
        self.fiber_shift = _scalars(fiber_shift)
        if fiber_dim is None:
            fiber_dim = len(self.fiber_shift) or (len(steps[0].shift) if steps else 0)
        if not self.fiber_shift:
            self.fiber_shift = tuple(ExactScalar.rational(0) for _ in range(fiber_dim))
        if fiber_dim < 1 or len(self.fiber_shift) != fiber_dim:
            raise ValueError("a skew product needs a fiber of dimension at least 1")
        for rule in steps:
            if len(rule.lo) != self.base.dim or len(rule.shift) != fiber_dim:
                raise ValueError("step rule dimensions do not match the base and fiber")
        self.steps = tuple(steps)
        self.name = name or "skew-product"
        self._pack = MapPack.build(
            _dd_angles(self.base.alpha), _dd_angles(self.fiber_shift),
            [(r.lo, r.hi, _dd_angles(r.shift)) for r in self.steps])

    @property
    def base_dim(self) -> int:
        return self.base.dim

    @property
    def fiber_dim(self) -> int:
        return len(self.fiber_shift)

    @property
    def dim(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def base_certificate(self) -> DiscontinuityCertificate:
        """Projection of the discontinuity set onto the base."""
        pieces = tuple(dict.fromkeys(RectangleBoundary(r.lo, r.hi) for r in self.steps if not r.is_trivial))
        if not pieces:
            return empty_certificate(self.base_dim)
        return DiscontinuityCertificate(
            self.base_dim, pieces,
            "fiber jumps only when the base crosses a step-box face; faces are Haar-null")

    @property
    def discontinuity(self) -> DiscontinuityCertificate:
        return self.base_certificate.embed(self.dim, range(self.base_dim))

    def pack(self) -> MapPack:
        return self._pack

    def __repr__(self) -> str:
        return f"SkewProductMap({self.name!r}, base={self.base!r}, steps={len(self.steps)})"


Map = Union[Rotation, SkewProductMap]


def product_rotation(alpha: Sequence, beta: Sequence, name: str = "product-rotation") -> SkewProductMap:
    """(w, x) -> (w + alpha, x + beta); continuous everywhere."""
    return SkewProductMap(Rotation(alpha), beta, (), name)


def step_skew(alpha: Sequence, gamma: Sequence, threshold="1/2", beta: Sequence | None = None,
              name: str = "step-skew") -> SkewProductMap:
    """(w, x) -> (w + alpha, x + gamma * 1[w_1 in [0, threshold)]).

    The box constrains the first base axis only; the remaining base axes
    are unrestricted.
    """
    base = Rotation(alpha)
    t = float(ExactScalar.coerce(threshold))
    lo = (0.0,) * base.dim
    hi = (t,) + (1.0,) * (base.dim - 1)
    gamma = _scalars(gamma)
    beta = beta if beta is not None else [0] * len(gamma)
    return SkewProductMap(base, beta, (StepRule(lo, hi, gamma),), name)


# -- points ------------------------------------------------------------------

def to_coords(m: Map, p) -> np.ndarray:
    """Flatten a TorusPoint or an (omega, x) pair to the map's coordinate vector."""
    if isinstance(p, tuple) and len(p) == 2 and all(isinstance(q, TorusPoint) for q in p):
        w, x = p
        if w.dim != m.base_dim or x.dim != m.fiber_dim:
            raise ValueError(f"expected a point of T^{m.base_dim} x T^{m.fiber_dim}, "
                             f"got T^{w.dim} x T^{x.dim}")
        arr = np.array(w.coords + x.coords)
    else:
        arr = points_to_array([p])[0]
    if arr.shape != (m.dim,):
        raise ValueError(f"map acts on T^{m.dim}, got a point with {arr.size} coordinates")
    return arr


def from_coords(m: Map, coords: np.ndarray):
    coords = tuple(float(c) for c in coords)
    if isinstance(m, Rotation):
        return TorusPoint(coords)
    return TorusPoint(coords[:m.base_dim]), TorusPoint(coords[m.base_dim:])


def apply(m: Map, p):
    return from_coords(m, _kernels.map_points(m.pack(), to_coords(m, p)[None, :])[0])


def rotation_apply(R: Rotation, x) -> TorusPoint:
    """wrap(x + alpha)."""
    return apply(R, x)


def spt_apply(phi: SkewProductMap, p: PhasePoint) -> PhasePoint:
    return apply(phi, p)


def rotation_power(R: Rotation, n: int, x) -> TorusPoint:
    """wrap(x + n * alpha) from the exact angles."""
    n = int(n)
    if n < 0:
        raise ValueError("the power must be nonnegative")
    x0 = to_coords(R, x)
    if n < 2 ** 52:
        return TorusPoint(tuple(_kernels.orbit_points(R.pack(), x0, n, (), 1)[0][0].tolist()))
    # beyond exactly representable step counts reduce n * alpha exactly first
    out = []
    for j, a in enumerate(R.alpha):
        h, l = (ExactScalar.rational(n) * a).frac().to_dd()
        out.append(float(wrap_sum(x0[j:j + 1], [frac_mul(np.ones(1), h, l)])[0]))
    return TorusPoint(tuple(out))


def _visits(m: SkewProductMap, start: np.ndarray, n: int) -> np.ndarray:
    """Step-box visit counts of the base points with index < n."""
    counts = np.zeros(m.pack().n_steps, dtype=np.int64)
    done = 0
    while done < n:
        length = min(ORBIT_CHUNK * 4, n - done)
        _, counts = _kernels.orbit_points(m.pack(), start, done, counts, length)
        done += length
    return counts


def iterate(m: Map, p, n: int):
    """The n-th orbit point of ``p``."""
    n = int(n)
    if n < 0:
        raise ValueError("the iterate must be nonnegative")
    start = to_coords(m, p)
    _config.check("orbit_steps", n if m.pack().n_steps else 1, f"iterating {getattr(m, 'name', m)}")
    counts = _visits(m, start, n) if m.pack().n_steps else np.zeros(0, dtype=np.int64)
    return from_coords(m, _kernels.orbit_points(m.pack(), start, n, counts, 1)[0][0])


orbit_point = iterate


def orbit_blocks(m: Map, p, n: int, chunk: int = ORBIT_CHUNK) -> Iterator[np.ndarray]:
    """Orbit coordinates in consecutive (<= chunk, dim) blocks, O(chunk) memory."""
    if n < 1:
        raise ValueError("orbit length must be at least 1")
    _config.check("orbit_steps", n, f"an orbit of {getattr(m, 'name', m)}")
    start = to_coords(m, p)
    counts = np.zeros(m.pack().n_steps, dtype=np.int64)
    done = 0
    while done < n:
        length = min(chunk, n - done)
        pts, counts = _kernels.orbit_points(m.pack(), start, done, counts, length)
        yield pts
        done += length


def orbit_array(m: Map, p, n: int) -> np.ndarray:
    return np.concatenate(list(orbit_blocks(m, p, n)), axis=0)


def orbit(m: Map, p, n: int) -> Iterator:
    """Lazily yield the first n orbit points, starting with ``p`` itself."""
    for block in orbit_blocks(m, p, n):
        for row in block:
            yield from_coords(m, row)


# -- integer relations -------------------------------------------------------

@dataclass(frozen=True)
class IntegerRelation:
    """k_0 + sum_i k_i alpha_i evaluates to ``residual`` (0 for an exact relation)."""

    k: tuple[int, ...]
    residual: float
    tolerance: float = 0.0


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def independence_falsifier(alpha: Sequence, H: int) -> IntegerRelation | None:
    """Search for an exact relation k_0 + sum k_i alpha_i = 0 with max |k| <= H.

    Returns one of minimal max-norm, or None. None does not prove
    independence. Square roots of distinct square-free integers are
    linearly independent over Q, so a relation splits into one rational
    equation and one equation per radicand, all solved exactly.
    """
    alpha = _scalars(alpha)
    H = int(H)
    if H < 1:
        raise ValueError("height bound must be at least 1")
    ell = len(alpha)
    cap = _config.budgets().falsifier_vectors
    if (2 * H + 1) ** (ell + 1) > cap:
        feasible = 0
        while (2 * (feasible + 1) + 1) ** (ell + 1) <= cap:
            feasible += 1
        raise _config.BudgetExceeded(
            f"relation search at height {H} over {ell} angles needs {(2 * H + 1) ** (ell + 1)} vectors "
            f"but the falsifier_vectors budget is {cap}; the largest feasible height is {feasible}")
    rat_den = _lcm(a.rat.denominator for a in alpha)
    rat = [int(a.rat * rat_den) for a in alpha]
    groups: dict[int, list[int]] = {}
    for i, a in enumerate(alpha):
        if not a.is_rational:
            groups.setdefault(a.radicand, [0] * ell)
    for d, row in groups.items():
        den = _lcm(a.irr.denominator for a in alpha if a.radicand == d and not a.is_rational)
        for i, a in enumerate(alpha):
            if a.radicand == d and not a.is_rational:
                row[i] = int(a.irr * den)
    irr_rows = list(groups.values())
    for h in range(1, H + 1):
        for ks in itertools.product(range(-h, h + 1), repeat=ell):
            if next((v for v in ks if v), 0) <= 0:
                continue
            if any(sum(r[i] * ks[i] for i in range(ell)) for r in irr_rows):
                continue
            s = sum(r * k for r, k in zip(rat, ks))
            if s % rat_den:
                continue
            k0 = -s // rat_den
            if abs(k0) > h or max(abs(k0), max(abs(v) for v in ks)) != h:
                continue
            k = (k0,) + ks
            return IntegerRelation(k, _relation_value(k, alpha))
    return None


def _dot_parts(k: Sequence[int], alpha: Sequence[ExactScalar]) -> tuple[Fraction, dict[int, Fraction]]:
    """sum k_i alpha_i split into its rational part and one coefficient per radicand."""
    rational = Fraction(0)
    per_radicand: dict[int, Fraction] = {}
    for ki, a in zip(k, alpha):
        rational += ki * a.rat
        if not a.is_rational:
            per_radicand[a.radicand] = per_radicand.get(a.radicand, Fraction(0)) + ki * a.irr
    return rational, per_radicand


def is_resonant(k: Sequence[int], alpha: Sequence) -> bool:
    """True when k.alpha is an integer, decided exactly."""
    rational, per_radicand = _dot_parts(k, _scalars(alpha))
    return rational.denominator == 1 and not any(per_radicand.values())


def _relation_value(k: Sequence[int], alpha: Sequence[ExactScalar]) -> float:
    """Float of k_0 + sum k_i alpha_i, summed exactly field by field."""
    rational, per_radicand = _dot_parts(k[1:], alpha)
    rational += k[0]
    parts = [float(rational)]
    parts += [float(ExactScalar(0, c, d)) for d, c in per_radicand.items() if c]
    return math.fsum(parts)


def condition_H_visit_frequency(phi: Map, base_start, n: int, eps: float) -> float:
    """Fraction of the first n base-orbit points within ``eps`` of the projected discontinuity set."""
    if n < 1:
        raise ValueError("orbit length must be at least 1")
    if eps <= 0:
        raise ValueError("radius must be positive")
    cert = phi.base_certificate if isinstance(phi, SkewProductMap) else phi.discontinuity
    if cert.is_empty:
        return 0.0
    base = phi.base if isinstance(phi, SkewProductMap) else phi
    hits = 0
    for block in orbit_blocks(base, base_start, n):
        hits += int(np.count_nonzero(cert.distance(block) < eps))
    return hits / n
