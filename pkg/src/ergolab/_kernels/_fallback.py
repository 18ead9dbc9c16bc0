"""numpy kernels, used when the compiled core is unavailable.

Orbits are generated in blocks of consecutive indices straight from the
exact form, so a block costs a handful of vectorised operations regardless
of where it sits on the orbit.
"""
from __future__ import annotations

import math

import numpy as np

from ..summation import CompensatedSum
from ._dd import double_angle, frac_mul, wrap_sum
from .packs import DRIFT_CHECK, DRIFT_TOL, DriftError, MapPack, ObsPack

CHUNK = 1 << 15
TWO_PI = 2.0 * math.pi


def eval_points(op: ObsPack, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[0]
    out = np.zeros(n, dtype=complex)
    for t in range(op.n_terms):
        f0, f1 = op.freq_ptr[t], op.freq_ptr[t + 1]
        trig = np.zeros(n, dtype=complex)
        for m in range(f0, f1):
            k = op.freqs[m]
            phase = np.zeros(n)
            for i in range(op.dim):
                phase = phase + k[i] * pts[:, i]
            r = phase - np.floor(phase)
            c = op.coefs[m]
            cr, si = np.cos(TWO_PI * r), np.sin(TWO_PI * r)
            trig = trig + ((c.real * cr - c.imag * si) + 1j * (c.real * si + c.imag * cr))
        c0, c1 = op.cell_ptr[t], op.cell_ptr[t + 1]
        vals = np.full(n, op.default[t])
        free = np.ones(n, dtype=bool)
        for c in range(c0, c1):
            inside = free & np.all((pts >= op.cell_lo[c]) & (pts < op.cell_hi[c]), axis=1)
            vals[inside] = op.cell_val[c]
            free &= ~inside
        out += trig.real * vals + 1j * (trig.imag * vals)
    return out


def _box_hits(base: np.ndarray, mp: MapPack) -> np.ndarray:
    hits = np.empty((base.shape[0], mp.n_steps), dtype=np.int64)
    for r in range(mp.n_steps):
        hits[:, r] = np.all((base >= mp.step_lo[r]) & (base < mp.step_hi[r]), axis=1)
    return hits


def _fiber(mp: MapPack, x0: np.ndarray, n: np.ndarray, counts: np.ndarray) -> np.ndarray:
    lf = mp.fiber_dim
    out = np.empty((n.shape[0], lf))
    for j in range(lf):
        terms = [frac_mul(n, mp.beta[j, 0], mp.beta[j, 1])]
        terms += [frac_mul(counts[:, r], mp.gamma[r, j, 0], mp.gamma[r, j, 1])
                  for r in range(mp.n_steps)]
        out[:, j] = wrap_sum(x0[..., j], terms)
    return out


def map_points(mp: MapPack, pts: np.ndarray) -> np.ndarray:
    """One application of the map to every row of ``pts``."""
    pts = np.asarray(pts, dtype=float)
    lb = mp.base_dim
    one = np.ones(pts.shape[0])
    out = np.empty_like(pts)
    for j in range(lb):
        out[:, j] = wrap_sum(pts[:, j], [frac_mul(one, mp.alpha[j, 0], mp.alpha[j, 1])])
    if mp.fiber_dim:
        hits = _box_hits(pts[:, :lb], mp).astype(float)
        out[:, lb:] = _fiber(mp, pts[:, lb:], one, hits)
    return out


def orbit_points(mp: MapPack, start: np.ndarray, n0: int, counts0: np.ndarray, length: int):
    """Points with indices n0 .. n0+length-1 and the step counts after them.

    ``counts0[r]`` is the number of earlier base points (index < n0) that
    landed in step box r.
    """
    lb = mp.base_dim
    n = np.arange(n0, n0 + length, dtype=float)
    out = np.empty((length, mp.dim))
    for j in range(lb):
        out[:, j] = wrap_sum(start[j], [frac_mul(n, mp.alpha[j, 0], mp.alpha[j, 1])])
    counts = np.array(counts0, dtype=np.int64, copy=True)
    if mp.fiber_dim:
        hits = _box_hits(out[:, :lb], mp)
        running = np.cumsum(hits, axis=0)
        before = (counts[None, :] + running - hits).astype(float)
        counts = counts + running[-1]
        out[:, lb:] = _fiber(mp, np.asarray(start[lb:], dtype=float), n, before)
    return out, counts


def birkhoff_sums(mp: MapPack, op: ObsPack, starts: np.ndarray, checkpoints: np.ndarray) -> np.ndarray:
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    out = np.empty((starts.shape[0], len(checkpoints)), dtype=complex)
    for s, start in enumerate(starts):
        acc_re, acc_im = CompensatedSum(), CompensatedSum()
        counts = np.zeros(mp.n_steps, dtype=np.int64)
        n = 0
        for ci, target in enumerate(checkpoints):
            while n < target:
                length = min(CHUNK, int(target) - n)
                pts, counts = orbit_points(mp, start, n, counts, length)
                vals = eval_points(op, pts)
                acc_re.add(math.fsum(vals.real.tolist()))
                acc_im.add(math.fsum(vals.imag.tolist()))
                n += length
            out[s, ci] = complex(acc_re.value, acc_im.value)
    return out


def double_sums(alpha: np.ndarray, op1: ObsPack, op2: ObsPack, points: np.ndarray,
                checkpoints: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = alpha.shape[0]
    alpha2 = np.array([double_angle(*alpha[j]) for j in range(dim)])
    out = np.empty((points.shape[0], len(checkpoints)), dtype=complex)
    for p, x in enumerate(points):
        acc_re, acc_im = CompensatedSum(), CompensatedSum()
        n = 0
        for ci, target in enumerate(checkpoints):
            while n < target:
                length = min(CHUNK, int(target) - n)
                idx = np.arange(n, n + length, dtype=float)
                a = np.empty((length, dim))
                b = np.empty((length, dim))
                for j in range(dim):
                    a[:, j] = wrap_sum(x[j], [frac_mul(idx, alpha[j, 0], alpha[j, 1])])
                    b[:, j] = wrap_sum(x[j], [frac_mul(idx, alpha2[j, 0], alpha2[j, 1])])
                _cross_check(alpha, x, idx, b, p)
                vals = eval_points(op1, a) * eval_points(op2, b)
                acc_re.add(math.fsum(vals.real.tolist()))
                acc_im.add(math.fsum(vals.imag.tolist()))
                n += length
            out[p, ci] = complex(acc_re.value, acc_im.value)
    return out


def _cross_check(alpha, x, idx, b, point_index):
    # the doubled-angle orbit against 2n * alpha computed independently
    sel = np.nonzero(np.mod(idx, DRIFT_CHECK) == 0)[0]
    if sel.size == 0:
        return
    for j in range(alpha.shape[0]):
        ref = wrap_sum(x[j], [frac_mul(2.0 * idx[sel], alpha[j, 0], alpha[j, 1])])
        d = np.abs(ref - b[sel, j])
        d = np.minimum(d, 1.0 - d)
        if np.any(d > DRIFT_TOL):
            i = sel[np.argmax(d)]
            raise DriftError(f"point {point_index}: doubled-angle orbit drifted by {d.max():.3e} "
                             f"at n={int(idx[i])} on axis {j}")
