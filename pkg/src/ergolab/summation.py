"""Compensated summation.

Batch sums go through :func:`math.fsum` (correctly rounded). Streams that
cannot be held in memory use :class:`CompensatedSum`, Neumaier's variant
of Kahan summation, whose error does not grow with the number of terms.
"""
from __future__ import annotations

import math

import numpy as np


class CompensatedSum:
    __slots__ = ("_s", "_c")

    def __init__(self, value: float = 0.0):
        self._s = float(value)
        self._c = 0.0

    def add(self, x: float) -> None:
        s = self._s
        t = s + x
        if abs(s) >= abs(x):
            self._c += (s - t) + x
        else:
            self._c += (x - t) + s
        self._s = t

    @property
    def value(self) -> float:
        return self._s + self._c


def fsum_complex(values: np.ndarray) -> complex:
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))
    return complex(math.fsum(values.tolist()), 0.0)


def mean_complex(values: np.ndarray) -> complex:
    n = len(values)
    if n == 0:
        raise ValueError("mean of an empty sequence")
    s = fsum_complex(values)
    return complex(s.real / n, s.imag / n)
