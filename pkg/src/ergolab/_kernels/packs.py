"""Flat array layouts shared by the compiled and numpy kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MapPack:
    """A skew product ``(w, x) -> (w + alpha, x + beta + sum_r gamma_r 1[w in box_r])``.

    Angles are double-doubles reduced mod 1. A rotation of T^l is the case
    with an empty fiber.
    """

    alpha: np.ndarray  # (lb, 2)
    beta: np.ndarray  # (lf, 2)
    step_lo: np.ndarray  # (R, lb)
    step_hi: np.ndarray  # (R, lb)
    gamma: np.ndarray  # (R, lf, 2)

    @property
    def base_dim(self) -> int:
        return self.alpha.shape[0]

    @property
    def fiber_dim(self) -> int:
        return self.beta.shape[0]

    @property
    def dim(self) -> int:
        return self.base_dim + self.fiber_dim

    @property
    def n_steps(self) -> int:
        return self.step_lo.shape[0]

    @classmethod
    def build(cls, alpha, beta=(), steps=()) -> MapPack:
        alpha = np.asarray(alpha, dtype=float).reshape(-1, 2)
        beta = np.asarray(beta, dtype=float).reshape(-1, 2)
        lb, lf = alpha.shape[0], beta.shape[0]
        r = len(steps)
        lo = np.array([s[0] for s in steps], dtype=float).reshape(r, lb)
        hi = np.array([s[1] for s in steps], dtype=float).reshape(r, lb)
        gamma = np.array([s[2] for s in steps], dtype=float).reshape(r, lf, 2)
        return cls(*(np.ascontiguousarray(a) for a in (alpha, beta, lo, hi, gamma)))


@dataclass(frozen=True)
class ObsPack:
    """Sum over terms t of (trig polynomial_t) * (step function_t)."""

    dim: int
    freq_ptr: np.ndarray  # (T+1,) int64
    freqs: np.ndarray  # (M, dim) float64, integral values
    coefs: np.ndarray  # (M,) complex128
    cell_ptr: np.ndarray  # (T+1,) int64
    cell_lo: np.ndarray  # (C, dim)
    cell_hi: np.ndarray  # (C, dim)
    cell_val: np.ndarray  # (C,)
    default: np.ndarray  # (T,)

    @property
    def n_terms(self) -> int:
        return self.default.shape[0]


class DriftError(RuntimeError):
    """A running orbit state diverged from its exact-form resynchronisation."""


# running orbit states are compared with the exact form this often
DRIFT_CHECK = 10_000
DRIFT_TOL = 1e-8
