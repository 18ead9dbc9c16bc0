"""Observables on T^l: trigonometric polynomials, step functions and their algebra.

Every observable is a finite sum of terms ``T_t(x) * S_t(x)`` with ``T_t``
a trigonometric polynomial and ``S_t`` a real step function on half-open
boxes. That class is closed under sums, products, scalar multiples and
composition with rotations, and each member has an exact Haar integral, a
sup-norm bound and a finite discontinuity certificate.
"""
from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _config
from ._kernels import ObsPack, _fallback
from ._kernels._dd import wrap_sum
from .certificates import DiscontinuityCertificate, RectangleBoundary, empty_certificate
from .exact import ExactScalar
from .torus import TorusPoint

Freq = tuple[int, ...]
Box = tuple[tuple[float, ...], tuple[float, ...]]

TWO_PI = 2.0 * math.pi


def _canonical(k: Freq) -> bool:
    """True for the representative of {k, -k} that is lexicographically positive."""
    return k > tuple(-c for c in k)


def _flat_point(p, dim: int) -> np.ndarray:
    if isinstance(p, tuple) and p and all(isinstance(q, TorusPoint) for q in p):
        coords = [c for q in p for c in q]
    else:
        coords = list(p)
    arr = np.asarray(coords, dtype=float)
    if arr.shape != (dim,):
        raise ValueError(f"observable lives on T^{dim}, got a point with {arr.size} coordinates")
    return arr


def _check_dim(a: Observable, b: Observable) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: T^{a.dim} vs T^{b.dim}")


def character_phase(k: Freq, alpha: Sequence[ExactScalar]) -> complex:
    """exp(2 pi i k.alpha), with k.alpha reduced mod 1 from the exact angles."""
    terms = []
    for ki, a in zip(k, alpha):
        if ki:
            terms.append((ExactScalar.rational(ki) * a).frac().to_dd())
    if not terms:
        return 1.0 + 0.0j
    r = float(wrap_sum(np.zeros(1), [(np.array([h]), np.array([l])) for h, l in terms])[0])
    return cmath.exp(2j * math.pi * r)


class Observable:
    """A bounded function on T^l given as a finite sum of trig x step terms."""

    dim: int
    name: str

    # -- structure -------------------------------------------------------
    def terms(self) -> tuple[tuple[TrigPolynomial, StepObservable], ...]:
        raise NotImplementedError

    @property
    def is_real(self) -> bool:
        return all(t.is_real for t, _ in self.terms())

    def pack(self) -> ObsPack:
        cached = getattr(self, "_pack", None)
        if cached is not None:
            return cached
        freq_ptr, freqs, coefs = [0], [], []
        cell_ptr, cell_lo, cell_hi, cell_val, default = [0], [], [], [], []
        for trig, step in self.terms():
            for k, c in trig.coeffs.items():
                freqs.append(k)
                coefs.append(c)
            freq_ptr.append(len(freqs))
            for lo, hi, v in step.cells:
                cell_lo.append(lo)
                cell_hi.append(hi)
                cell_val.append(v)
            cell_ptr.append(len(cell_val))
            default.append(step.default)
        pack = ObsPack(
            dim=self.dim,
            freq_ptr=np.array(freq_ptr, dtype=np.int64),
            freqs=np.array(freqs, dtype=float).reshape(-1, self.dim),
            coefs=np.array(coefs, dtype=complex),
            cell_ptr=np.array(cell_ptr, dtype=np.int64),
            cell_lo=np.array(cell_lo, dtype=float).reshape(-1, self.dim),
            cell_hi=np.array(cell_hi, dtype=float).reshape(-1, self.dim),
            cell_val=np.array(cell_val, dtype=float),
            default=np.array(default, dtype=float),
        )
        self._pack = pack
        return pack

    # -- evaluation ------------------------------------------------------
    def values(self, pts) -> np.ndarray:
        """Complex values at each row of ``pts`` (no realness projection)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError(f"observable lives on T^{self.dim}, got points of dimension {pts.shape[1]}")
        return _fallback.eval_points(self.pack(), pts)

    def evaluate(self, pts) -> np.ndarray:
        """Values at each row of ``pts``; real dtype when the observable is real."""
        v = self.values(pts)
        return v.real.copy() if self.is_real else v

    def eval(self, p) -> float | complex:
        """Value at a single point (a TorusPoint, an (omega, x) pair or a coordinate list)."""
        v = self.values(_flat_point(p, self.dim)[None, :])[0]
        return float(v.real) if self.is_real else complex(v)

    __call__ = eval

    # -- certified quantities -------------------------------------------
    @property
    def sup_norm_bound(self) -> float:
        return math.fsum(t.coef_l1 * s.abs_max for t, s in self.terms())

    @property
    def constant_value(self) -> float | complex | None:
        """The value of a visibly constant observable, otherwise None."""
        total = 0j
        for trig, step in self.terms():
            if step.cells or any(any(k) for k in trig.coeffs):
                return None
            total += trig.coefficient((0,) * self.dim) * step.default
        return total.real if self.is_real else total

    def haar_integral(self) -> float | complex:
        total = 0j
        for trig, step in self.terms():
            for k, c in trig.coeffs.items():
                total += c * step.fourier_integral(k)
        return total.real if self.is_real else total

    @property
    def discontinuity(self) -> DiscontinuityCertificate:
        cert = empty_certificate(self.dim)
        for trig, step in self.terms():
            if trig.coeffs:
                cert = cert.union(step.discontinuity)
        return cert

    # -- algebra ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TrigPolynomial.constant(self.dim, other)
        if not isinstance(other, Observable):
            return NotImplemented
        _check_dim(self, other)
        return _normalize(self.dim, self.terms() + other.terms(), f"({self.name} + {other.name})")

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, Observable):
            return NotImplemented
        _check_dim(self, other)
        terms = []
        for t1, s1 in self.terms():
            for t2, s2 in other.terms():
                terms.append((t1.trig_product(t2), s1.step_product(s2)))
        return _normalize(self.dim, tuple(terms), f"{self.name}*{other.name}")

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def scale(self, factor: complex) -> Observable:
        terms = tuple((t.scale_coeffs(factor), s) for t, s in self.terms())
        return _normalize(self.dim, terms, f"{factor!r}*{self.name}")

    def compose(self, rotation) -> Observable:
        """The observable x -> self(x + alpha) for a rotation (or angle list) alpha."""
        alpha = [ExactScalar.coerce(a) for a in getattr(rotation, "alpha", rotation)]
        if len(alpha) != self.dim:
            raise ValueError(f"rotation of T^{len(alpha)} cannot act on an observable on T^{self.dim}")
        terms = tuple((t.rotate_coeffs(alpha), s.shift_cells(alpha)) for t, s in self.terms())
        return _normalize(self.dim, terms, f"{self.name}∘R")

    def embed(self, total_dim: int, axes: Sequence[int]) -> Observable:
        """Pull back along the coordinate projection T^total -> T^dim onto ``axes``."""
        axes = tuple(int(a) for a in axes)
        if len(axes) != self.dim or len(set(axes)) != self.dim or not all(0 <= a < total_dim for a in axes):
            raise ValueError(f"need {self.dim} distinct axes in [0, {total_dim})")
        terms = tuple((t.embed_coeffs(total_dim, axes), s.embed_cells(total_dim, axes))
                      for t, s in self.terms())
        return _normalize(total_dim, terms, self.name)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"


class TrigPolynomial(Observable):
    """sum_k c_k exp(2 pi i k.x) over a finite set of integer frequencies."""

    def __init__(self, dim: int, coeffs: Mapping[Sequence[int], complex], name: str | None = None,
                 real: bool | None = None):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        table: dict[Freq, complex] = {}
        for k, c in coeffs.items():
            k = tuple(int(v) for v in k)
            if len(k) != dim:
                raise ValueError(f"frequency {k} does not have {dim} components")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"coefficient of {k} is not finite")
            if c != 0:
                table[k] = table.get(k, 0j) + c
        table = {k: table[k] for k in sorted(table) if table[k] != 0}
        if real:
            table = _symmetrize(table)
        elif real is None:
            real = all(table.get(tuple(-v for v in k), 0j) == c.conjugate() for k, c in table.items())
        _config.check("frequencies", len(table), "a trigonometric polynomial's support")
        self.dim = dim
        self.coeffs = table
        self._real = bool(real)
        self.name = name or _trig_name(table)

    @classmethod
    def constant(cls, dim: int, value: complex, name: str | None = None) -> TrigPolynomial:
        return cls(dim, {(0,) * dim: value}, name or f"{value!r}")

    @classmethod
    def character(cls, k: Sequence[int], coef: complex = 1.0, name: str | None = None) -> TrigPolynomial:
        return cls(len(k), {tuple(k): coef}, name)

    @classmethod
    def cos(cls, k: Sequence[int], amplitude: float = 1.0) -> TrigPolynomial:
        k = tuple(int(v) for v in k)
        if not any(k):
            return cls.constant(len(k), amplitude)
        neg = tuple(-v for v in k)
        return cls(len(k), {k: amplitude / 2, neg: amplitude / 2}, f"cos{list(k)}", real=True)

    @classmethod
    def sin(cls, k: Sequence[int], amplitude: float = 1.0) -> TrigPolynomial:
        k = tuple(int(v) for v in k)
        neg = tuple(-v for v in k)
        return cls(len(k), {k: -0.5j * amplitude, neg: 0.5j * amplitude}, f"sin{list(k)}", real=True)

    @property
    def is_real(self) -> bool:
        return self._real

    @property
    def coef_l1(self) -> float:
        return math.fsum(abs(c) for c in self.coeffs.values())

    @property
    def degree(self) -> int:
        return max((max(abs(v) for v in k) for k in self.coeffs), default=0)

    def coefficient(self, k: Sequence[int]) -> complex:
        return self.coeffs.get(tuple(k), 0j)

    def terms(self):
        return ((self, StepObservable.constant(self.dim, 1.0)),)

    @property
    def sup_norm_bound(self) -> float:
        return self.coef_l1

    def haar_integral(self) -> float | complex:
        c0 = self.coefficient((0,) * self.dim)
        return c0.real if self._real else c0

    @property
    def discontinuity(self) -> DiscontinuityCertificate:
        return empty_certificate(self.dim)

    # coefficient-level operations used by the general algebra
    def trig_product(self, other: TrigPolynomial) -> TrigPolynomial:
        _config.check("frequencies", len(self.coeffs) * len(other.coeffs), "a trigonometric product")
        out: dict[Freq, list[complex]] = {}
        for k, c in self.coeffs.items():
            for j, d in other.coeffs.items():
                out.setdefault(tuple(a + b for a, b in zip(k, j)), []).append(c * d)
        table = {m: complex(math.fsum(v.real for v in vs), math.fsum(v.imag for v in vs))
                 for m, vs in out.items()}
        return TrigPolynomial(self.dim, table, real=self._real and other._real or None)

    def scale_coeffs(self, factor: complex) -> TrigPolynomial:
        factor = complex(factor)
        return TrigPolynomial(self.dim, {k: factor * c for k, c in self.coeffs.items()},
                              real=(self._real and factor.imag == 0) or None)

    def rotate_coeffs(self, alpha: Sequence[ExactScalar]) -> TrigPolynomial:
        table = {}
        for k, c in self.coeffs.items():
            if not self._real or not any(k) or _canonical(k):
                table[k] = c * character_phase(k, alpha)
                if self._real and any(k):
                    table[tuple(-v for v in k)] = table[k].conjugate()
        return TrigPolynomial(self.dim, table, real=self._real or None)

    def embed_coeffs(self, total_dim: int, axes: Sequence[int]) -> TrigPolynomial:
        table = {}
        for k, c in self.coeffs.items():
            full = [0] * total_dim
            for i, a in enumerate(axes):
                full[a] = k[i]
            table[tuple(full)] = c
        return TrigPolynomial(total_dim, table, real=self._real or None)


def _symmetrize(table: dict[Freq, complex]) -> dict[Freq, complex]:
    """Force c_{-k} = conj(c_k), keeping the canonical-side coefficient."""
    out: dict[Freq, complex] = {}
    for k, c in table.items():
        neg = tuple(-v for v in k)
        if not any(k):
            if abs(c.imag) > 1e-12 * max(1.0, abs(c)):
                raise ValueError("the constant coefficient of a real polynomial must be real")
            out[k] = complex(c.real, 0.0)
            continue
        if _canonical(k):
            partner = table.get(neg, 0j)
            if abs(partner - c.conjugate()) > 1e-12 * max(1.0, abs(c)):
                raise ValueError(f"coefficients of {k} and {neg} are not conjugate; not a real polynomial")
            out[k] = c
            out[neg] = c.conjugate()
        elif neg not in table:
            raise ValueError(f"frequency {k} has no conjugate partner; not a real polynomial")
    return {k: out[k] for k in sorted(out) if out[k] != 0}


def _trig_name(table: Mapping[Freq, complex]) -> str:
    if not table:
        return "0"
    if len(table) == 1:
        (k, c), = table.items()
        if not any(k):
            return repr(c.real if c.imag == 0 else c)
        base = f"e{list(k)}"
        return base if c == 1 else f"{c!r}*{base}"
    return f"trig[{len(table)} terms]"


def _interval_integral(k: int, a: float, b: float) -> complex:
    if k == 0:
        return complex(b - a)
    w = 2j * math.pi * k
    return (cmath.exp(w * b) - cmath.exp(w * a)) / w


class StepObservable(Observable):
    """A real step function: ``value`` on each half-open cell, ``default`` elsewhere."""

    def __init__(self, dim: int, cells: Iterable[tuple[Sequence, Sequence, float]] = (),
                 default: float = 0.0, name: str | None = None, _trusted: bool = False):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        parsed = []
        for lo, hi, value in cells:
            lo = tuple(_to_float(v) for v in lo)
            hi = tuple(_to_float(v) for v in hi)
            if len(lo) != dim or len(hi) != dim:
                raise ValueError(f"cell corners must have {dim} coordinates")
            if not all(0.0 <= a < b <= 1.0 for a, b in zip(lo, hi)):
                raise ValueError(f"cell [{lo}, {hi}) is not a box with 0 <= lo < hi <= 1")
            value = float(value)
            if not math.isfinite(value):
                raise ValueError("cell values must be finite")
            parsed.append((lo, hi, value))
        _config.check("step_cells", len(parsed), "a step observable")
        if not _trusted:
            for (l1, h1, _), (l2, h2, _) in itertools.combinations(parsed, 2):
                if all(max(a1, a2) < min(b1, b2) for a1, b1, a2, b2 in zip(l1, h1, l2, h2)):
                    raise ValueError(f"cells [{l1}, {h1}) and [{l2}, {h2}) overlap")
        default = float(default)
        if not math.isfinite(default):
            raise ValueError("default value must be finite")
        self.dim = dim
        self.cells = tuple(parsed)
        self.default = default
        self.name = name or (f"step[{len(parsed)} cells]" if parsed else repr(default))

    @classmethod
    def constant(cls, dim: int, value: float) -> StepObservable:
        return cls(dim, (), value)

    @classmethod
    def indicator(cls, lo: Sequence, hi: Sequence, name: str | None = None) -> StepObservable:
        lo = tuple(_to_float(v) for v in lo)
        hi = tuple(_to_float(v) for v in hi)
        return cls(len(lo), [(lo, hi, 1.0)], 0.0, name or f"1[{list(lo)},{list(hi)})")

    @property
    def is_real(self) -> bool:
        return True

    @property
    def is_constant(self) -> bool:
        return not self.cells

    @property
    def abs_max(self) -> float:
        return max([abs(self.default)] + [abs(v) for _, _, v in self.cells])

    @property
    def volume(self) -> float:
        return math.fsum(math.prod(b - a for a, b in zip(lo, hi)) for lo, hi, _ in self.cells)

    def terms(self):
        return ((TrigPolynomial.constant(self.dim, 1.0), self),)

    @property
    def sup_norm_bound(self) -> float:
        return self.abs_max

    def haar_integral(self) -> float:
        parts = [v * math.prod(b - a for a, b in zip(lo, hi)) for lo, hi, v in self.cells]
        return math.fsum(parts + [self.default * (1.0 - self.volume)])

    def fourier_integral(self, k: Freq) -> complex:
        """Integral of exp(2 pi i k.x) * self(x) over T^dim."""
        total = self.default if not any(k) else 0.0
        total = complex(total)
        for lo, hi, v in self.cells:
            part = complex(v - self.default)
            for ki, a, b in zip(k, lo, hi):
                part *= _interval_integral(ki, a, b)
            total += part
        return total

    @property
    def discontinuity(self) -> DiscontinuityCertificate:
        if not self.cells:
            return empty_certificate(self.dim)
        pieces = tuple(dict.fromkeys(RectangleBoundary(lo, hi) for lo, hi, v in self.cells
                                     if v != self.default))
        if not pieces:
            return empty_certificate(self.dim)
        return DiscontinuityCertificate(self.dim, pieces, "boundaries of finitely many boxes (Haar-null)")

    # cell-level operations used by the general algebra
    def step_product(self, other: StepObservable) -> StepObservable:
        if other.is_constant:
            return _step_scale(self, other.default)
        if self.is_constant:
            return _step_scale(other, self.default)
        return _refine(self.dim, [self, other], lambda v: v[0] * v[1])

    def shift_cells(self, alpha: Sequence[ExactScalar]) -> StepObservable:
        shifts = [float(a.frac()) for a in alpha]
        cells = []
        for lo, hi, v in self.cells:
            pieces = [_shift_interval(a, b, s) for a, b, s in zip(lo, hi, shifts)]
            for combo in itertools.product(*pieces):
                cells.append((tuple(c[0] for c in combo), tuple(c[1] for c in combo), v))
        return StepObservable(self.dim, cells, self.default, _trusted=True)

    def embed_cells(self, total_dim: int, axes: Sequence[int]) -> StepObservable:
        cells = []
        for lo, hi, v in self.cells:
            flo, fhi = [0.0] * total_dim, [1.0] * total_dim
            for i, a in enumerate(axes):
                flo[a], fhi[a] = lo[i], hi[i]
            cells.append((tuple(flo), tuple(fhi), v))
        return StepObservable(total_dim, cells, self.default, self.name, _trusted=True)


def _to_float(v) -> float:
    if isinstance(v, (str, Fraction, ExactScalar)):
        return float(ExactScalar.coerce(v))
    return float(v)


def _shift_interval(a: float, b: float, s: float) -> list[tuple[float, float]]:
    """Preimage of [a, b) under x -> x + s mod 1, as one or two intervals."""
    width = b - a
    if width >= 1.0:
        return [(0.0, 1.0)]
    lo = a - s
    lo -= math.floor(lo)
    if lo >= 1.0:
        lo = 0.0
    hi = lo + width
    if hi <= 1.0:
        return [(lo, hi)]
    return [(lo, 1.0), (0.0, hi - 1.0)]


def _step_scale(step: StepObservable, factor: float) -> StepObservable:
    return StepObservable(step.dim, [(lo, hi, factor * v) for lo, hi, v in step.cells],
                          factor * step.default, _trusted=True)


def _refine(dim: int, steps: Sequence[StepObservable], combine) -> StepObservable:
    """Combine step functions pointwise on their common refinement grid."""
    edges = []
    for i in range(dim):
        cuts = {0.0, 1.0}
        for s in steps:
            for lo, hi, _ in s.cells:
                cuts.update((lo[i], hi[i]))
        edges.append(np.array(sorted(cuts)))
    _config.check("step_cells", math.prod(len(e) - 1 for e in edges), "a step-function refinement")
    mesh = np.meshgrid(*[e[:-1] for e in edges], indexing="ij")
    corners = np.stack([m.ravel() for m in mesh], axis=-1)
    upper = np.stack([m.ravel() for m in np.meshgrid(*[e[1:] for e in edges], indexing="ij")], axis=-1)
    vals = [_fallback.eval_points(s.pack(), corners).real for s in steps]
    combined = combine(vals)
    default = combine([np.array([s.default]) for s in steps])[0]
    keep = np.nonzero(combined != default)[0]
    cells = [(tuple(corners[i]), tuple(upper[i]), combined[i]) for i in keep]
    return StepObservable(dim, cells, default, _trusted=True)


class MixedObservable(Observable):
    """A finite sum of (trig polynomial) x (step function) terms."""

    def __init__(self, dim: int, terms: Sequence[tuple[TrigPolynomial, StepObservable]],
                 name: str | None = None):
        for t, s in terms:
            if t.dim != dim or s.dim != dim:
                raise ValueError(f"every term must live on T^{dim}")
        self.dim = dim
        self._terms = tuple(terms)
        self.name = name or f"mixed[{len(self._terms)} terms]"

    def terms(self):
        return self._terms


def _normalize(dim: int, terms, name: str) -> Observable:
    """Collapse a term list to the simplest class that represents it."""
    grouped: dict[tuple, list] = {}
    for t, s in terms:
        if not t.coeffs:
            continue
        key = (s.cells, s.default)
        grouped.setdefault(key, [s, []])[1].append(t)
    merged = []
    for s, trigs in grouped.values():
        acc = trigs[0]
        for t in trigs[1:]:
            acc = _trig_sum(acc, t)
        if acc.coeffs:
            merged.append((acc, s))
    if not merged:
        return TrigPolynomial.constant(dim, 0.0, name)
    if all(s.is_constant for _, s in merged):
        out = merged[0][0].scale_coeffs(merged[0][1].default)
        for t, s in merged[1:]:
            out = _trig_sum(out, t.scale_coeffs(s.default))
        out.name = name
        return out
    constant_trig = all(set(t.coeffs) == {(0,) * dim} for t, _ in merged)
    if constant_trig and all(t.coeffs[(0,) * dim].imag == 0 for t, _ in merged):
        weights = [t.coeffs[(0,) * dim].real for t, _ in merged]
        steps = [s for _, s in merged]
        if len(steps) == 1:
            out = _step_scale(steps[0], weights[0])
        else:
            out = _refine(dim, steps, lambda v: sum(w * x for w, x in zip(weights, v)))
        out.name = name
        return out
    return MixedObservable(dim, merged, name)


def _trig_sum(a: TrigPolynomial, b: TrigPolynomial) -> TrigPolynomial:
    table = dict(a.coeffs)
    for k, c in b.coeffs.items():
        table[k] = table.get(k, 0j) + c
    return TrigPolynomial(a.dim, table, real=(a.is_real and b.is_real) or None)


def evaluate(obs: Observable, p) -> float | complex:
    return obs.eval(p)


def haar_integral(obs: Observable) -> float | complex:
    return obs.haar_integral()


# -- config syntax -----------------------------------------------------------

def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex coefficients are written [re, im]")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def observable_from_dict(spec: Mapping, dim: int | None = None) -> Observable:
    """Build an observable from its config-file description.

    Recognised ``kind`` values: ``constant`` (value), ``character`` (k,
    coef), ``cos`` / ``sin`` (k, amplitude), ``trig`` (terms: list of
    {k, c}, optional real), ``indicator`` (lo, hi), ``step`` (cells: list
    of {lo, hi, value}, default), ``sum`` / ``product`` (of: list). Any
    spec may add ``scale`` (a real or [re, im]) and ``axes`` (embed into a
    ``dim``-dimensional torus along those axes).
    """
    kind = spec.get("kind")
    axes = spec.get("axes")
    local_dim = len(axes) if axes is not None else dim
    if kind == "constant":
        if local_dim is None:
            raise ValueError("a constant observable needs a dimension")
        obs: Observable = TrigPolynomial.constant(local_dim, _complex(spec["value"]))
    elif kind == "character":
        obs = TrigPolynomial.character(spec["k"], _complex(spec.get("coef", 1.0)))
    elif kind == "cos":
        obs = TrigPolynomial.cos(spec["k"], float(spec.get("amplitude", 1.0)))
    elif kind == "sin":
        obs = TrigPolynomial.sin(spec["k"], float(spec.get("amplitude", 1.0)))
    elif kind == "trig":
        terms = spec["terms"]
        if not terms:
            raise ValueError("a trig observable needs at least one term")
        d = len(terms[0]["k"])
        table: dict[Freq, complex] = {}
        for t in terms:
            k = tuple(int(v) for v in t["k"])
            table[k] = table.get(k, 0j) + _complex(t["c"])
        obs = TrigPolynomial(d, table, real=spec.get("real"))
    elif kind == "indicator":
        obs = StepObservable.indicator(spec["lo"], spec["hi"])
    elif kind == "step":
        cells = [(c["lo"], c["hi"], float(c["value"])) for c in spec["cells"]]
        if not cells and local_dim is None:
            raise ValueError("a step observable without cells needs a dimension")
        d = len(cells[0][0]) if cells else local_dim
        obs = StepObservable(d, cells, float(spec.get("default", 0.0)))
    elif kind in ("sum", "product"):
        parts = [observable_from_dict(s, local_dim) for s in spec["of"]]
        if not parts:
            raise ValueError(f"a {kind} needs at least one operand")
        obs = parts[0]
        for p in parts[1:]:
            obs = obs + p if kind == "sum" else obs * p
    else:
        raise ValueError(f"unknown observable kind {kind!r}")
    if "scale" in spec:
        obs = obs.scale(_complex(spec["scale"]))
    if axes is not None:
        if dim is None:
            raise ValueError("'axes' needs the ambient dimension")
        obs = obs.embed(dim, axes)
    if dim is not None and obs.dim != dim:
        raise ValueError(f"observable lives on T^{obs.dim} but the map acts on T^{dim}")
    if "name" in spec:
        obs.name = str(spec["name"])
    return obs
