"""Vectorised error-free transforms and drift-free orbit coordinates.

The compiled core repeats these formulas operation for operation, so both
backends produce identical orbit coordinates. Nothing here may be
rearranged algebraically: each line is one correctly rounded IEEE operation.

A coordinate of the orbit is ``x0 + sum_j m_j * a_j  (mod 1)`` where the
``a_j`` are angles held as double-doubles ``(hi, lo)`` and ``m_j`` integer
step counts. ``frac_mul`` forms ``m * a mod 1`` to about 2**-100 and
``wrap_sum`` adds the terms to the start coordinate before one final
rounding, so no error accumulates along the orbit.
"""
from __future__ import annotations

import numpy as np

SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def split(a):
    c = SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def frac_mul(m, hi, lo):
    """``m * (hi + lo) mod 1`` as an unnormalised pair; ``m`` integral, < 2**53."""
    p, e = two_prod(m, hi)
    fp = p - np.floor(p)
    s, t = two_sum(fp, e)
    return s, t + m * lo


def wrap_sum(x0, terms):
    """Round ``x0 + sum(terms)`` into [0, 1) once, at the end."""
    sh = x0
    sl = 0.0
    for h, l in terms:
        sh, e = two_sum(sh, h)
        sl = sl + (e + l)
        sh = sh - np.floor(sh)
    r = sh + sl
    r = r - np.floor(r)
    return np.where(r >= 1.0, 0.0, r)


def double_angle(hi: float, lo: float) -> tuple[float, float]:
    """2 * (hi + lo) mod 1, exact."""
    h2, l2 = 2.0 * hi, 2.0 * lo
    if h2 >= 1.0:
        h2 -= 1.0
    return h2, l2
