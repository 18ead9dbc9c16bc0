# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit, evaluation and summation kernels.

Orbit coordinates follow the same error-free formulas as ``_dd.py`` line
for line; sums use Neumaier compensation in orbit order. Loops over seeds
or evaluation points release the GIL so callers can thread them.
"""
import numpy as np

from libc.math cimport cos, floor, sin, fabs

from .packs import DRIFT_CHECK, DRIFT_TOL, DriftError

cdef double SPLIT = 134217729.0
cdef double TWO_PI = 6.283185307179586


cdef inline void two_sum(double a, double b, double* s, double* e) noexcept nogil:
    cdef double ss = a + b
    cdef double bb = ss - a
    s[0] = ss
    e[0] = (a - (ss - bb)) + (b - bb)


cdef inline void two_prod(double a, double b, double* p, double* e) noexcept nogil:
    cdef double pp = a * b
    cdef double c = SPLIT * a
    cdef double ah = c - (c - a)
    cdef double al = a - ah
    cdef double d = SPLIT * b
    cdef double bh = d - (d - b)
    cdef double bl = b - bh
    p[0] = pp
    e[0] = ((ah * bh - pp) + ah * bl + al * bh) + al * bl


cdef inline void frac_mul(double m, double hi, double lo, double* s, double* t) noexcept nogil:
    cdef double p, e, fp, tt
    two_prod(m, hi, &p, &e)
    fp = p - floor(p)
    two_sum(fp, e, s, &tt)
    t[0] = tt + m * lo


cdef inline void add_term(double* sh, double* sl, double h, double l) noexcept nogil:
    cdef double s, e
    two_sum(sh[0], h, &s, &e)
    sl[0] = sl[0] + (e + l)
    sh[0] = s - floor(s)


cdef inline double finish(double sh, double sl) noexcept nogil:
    cdef double r = sh + sl
    r = r - floor(r)
    if r >= 1.0:
        r = 0.0
    return r


cdef inline double coord_mul(double x0, double m, double hi, double lo) noexcept nogil:
    cdef double sh = x0, sl = 0.0, h, l
    frac_mul(m, hi, lo, &h, &l)
    add_term(&sh, &sl, h, l)
    return finish(sh, sl)


cdef inline void neumaier(double* s, double* c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef inline double circ(double a, double b) noexcept nogil:
    cdef double d = fabs(a - b)
    return d if d < 1.0 - d else 1.0 - d


cdef void eval_obs(int dim,
                   const long long[::1] freq_ptr, const double[:, ::1] freqs,
                   const double[::1] coef_re, const double[::1] coef_im,
                   const long long[::1] cell_ptr, const double[:, ::1] cell_lo,
                   const double[:, ::1] cell_hi, const double[::1] cell_val,
                   const double[::1] default, const double* p,
                   double* out_re, double* out_im) noexcept nogil:
    cdef Py_ssize_t t, m, c, i
    cdef double tr, ti, phase, r, cr, si, v, acc_re = 0.0, acc_im = 0.0
    cdef bint inside
    for t in range(default.shape[0]):
        tr = 0.0
        ti = 0.0
        for m in range(freq_ptr[t], freq_ptr[t + 1]):
            phase = 0.0
            for i in range(dim):
                phase = phase + freqs[m, i] * p[i]
            r = phase - floor(phase)
            cr = cos(TWO_PI * r)
            si = sin(TWO_PI * r)
            tr = tr + (coef_re[m] * cr - coef_im[m] * si)
            ti = ti + (coef_re[m] * si + coef_im[m] * cr)
        v = default[t]
        for c in range(cell_ptr[t], cell_ptr[t + 1]):
            inside = True
            for i in range(dim):
                if not (p[i] >= cell_lo[c, i] and p[i] < cell_hi[c, i]):
                    inside = False
                    break
            if inside:
                v = cell_val[c]
                break
        acc_re = acc_re + tr * v
        acc_im = acc_im + ti * v
    out_re[0] = acc_re
    out_im[0] = acc_im


cdef void spt_point(const double[:, ::1] alpha, const double[:, ::1] beta,
                    const double[:, :, ::1] gamma, const double* start, double n,
                    const long long* counts, double* out) noexcept nogil:
    cdef Py_ssize_t lb = alpha.shape[0], lf = beta.shape[0], R = gamma.shape[0]
    cdef Py_ssize_t j, r
    cdef double sh, sl, h, l
    for j in range(lb):
        out[j] = coord_mul(start[j], n, alpha[j, 0], alpha[j, 1])
    for j in range(lf):
        sh = start[lb + j]
        sl = 0.0
        frac_mul(n, beta[j, 0], beta[j, 1], &h, &l)
        add_term(&sh, &sl, h, l)
        for r in range(R):
            frac_mul(<double>counts[r], gamma[r, j, 0], gamma[r, j, 1], &h, &l)
            add_term(&sh, &sl, h, l)
        out[lb + j] = finish(sh, sl)


cdef inline void count_hits(const double[:, ::1] lo, const double[:, ::1] hi,
                            const double* base, long long* counts) noexcept nogil:
    cdef Py_ssize_t r, i
    cdef bint inside
    for r in range(lo.shape[0]):
        inside = True
        for i in range(lo.shape[1]):
            if not (base[i] >= lo[r, i] and base[i] < hi[r, i]):
                inside = False
                break
        if inside:
            counts[r] += 1


def _obs_arrays(op):
    return (op.dim, np.ascontiguousarray(op.freq_ptr, dtype=np.int64),
            np.ascontiguousarray(op.freqs, dtype=float),
            np.ascontiguousarray(op.coefs.real, dtype=float),
            np.ascontiguousarray(op.coefs.imag, dtype=float),
            np.ascontiguousarray(op.cell_ptr, dtype=np.int64),
            np.ascontiguousarray(op.cell_lo, dtype=float).reshape(-1, op.dim),
            np.ascontiguousarray(op.cell_hi, dtype=float).reshape(-1, op.dim),
            np.ascontiguousarray(op.cell_val, dtype=float),
            np.ascontiguousarray(op.default, dtype=float))


def eval_points(op, pts):
    cdef int dim
    cdef const long long[::1] fptr
    cdef const double[:, ::1] freqs
    cdef const double[::1] cre, cim
    cdef const long long[::1] cptr
    cdef const double[:, ::1] clo, chi
    cdef const double[::1] cval, dflt
    dim, fptr, freqs, cre, cim, cptr, clo, chi, cval, dflt = _obs_arrays(op)
    cdef const double[:, ::1] P = np.ascontiguousarray(pts, dtype=float)
    cdef Py_ssize_t n = P.shape[0], i
    out = np.empty((n, 2))
    cdef double[:, ::1] O = out
    with nogil:
        for i in range(n):
            eval_obs(dim, fptr, freqs, cre, cim, cptr, clo, chi, cval, dflt,
                     &P[i, 0], &O[i, 0], &O[i, 1])
    return out[:, 0] + 1j * out[:, 1]


def map_points(mp, pts):
    cdef const double[:, ::1] alpha = np.ascontiguousarray(mp.alpha)
    cdef const double[:, ::1] beta = np.ascontiguousarray(mp.beta)
    cdef const double[:, ::1] lo = np.ascontiguousarray(mp.step_lo)
    cdef const double[:, ::1] hi = np.ascontiguousarray(mp.step_hi)
    cdef const double[:, :, ::1] gamma = np.ascontiguousarray(mp.gamma)
    cdef const double[:, ::1] P = np.ascontiguousarray(pts, dtype=float)
    cdef Py_ssize_t n = P.shape[0], i, r
    out = np.empty((n, mp.dim))
    cdef double[:, ::1] O = out
    cdef long long[::1] hits = np.zeros(max(mp.n_steps, 1), dtype=np.int64)
    with nogil:
        for i in range(n):
            for r in range(hits.shape[0]):
                hits[r] = 0
            count_hits(lo, hi, &P[i, 0], &hits[0])
            spt_point(alpha, beta, gamma, &P[i, 0], 1.0, &hits[0], &O[i, 0])
    return out


def orbit_points(mp, start, long long n0, counts0, Py_ssize_t length):
    cdef const double[:, ::1] alpha = np.ascontiguousarray(mp.alpha)
    cdef const double[:, ::1] beta = np.ascontiguousarray(mp.beta)
    cdef const double[:, ::1] lo = np.ascontiguousarray(mp.step_lo)
    cdef const double[:, ::1] hi = np.ascontiguousarray(mp.step_hi)
    cdef const double[:, :, ::1] gamma = np.ascontiguousarray(mp.gamma)
    cdef const double[::1] st = np.ascontiguousarray(start, dtype=float)
    counts = np.zeros(max(mp.n_steps, 1), dtype=np.int64)
    counts[:mp.n_steps] = counts0
    cdef long long[::1] C = counts
    out = np.empty((length, mp.dim))
    cdef double[:, ::1] O = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(length):
            spt_point(alpha, beta, gamma, &st[0], <double>(n0 + i), &C[0], &O[i, 0])
            count_hits(lo, hi, &O[i, 0], &C[0])
    return out, counts[:mp.n_steps].copy()


def birkhoff_sums(mp, op, starts, checkpoints):
    cdef const double[:, ::1] alpha = np.ascontiguousarray(mp.alpha)
    cdef const double[:, ::1] beta = np.ascontiguousarray(mp.beta)
    cdef const double[:, ::1] lo = np.ascontiguousarray(mp.step_lo)
    cdef const double[:, ::1] hi = np.ascontiguousarray(mp.step_hi)
    cdef const double[:, :, ::1] gamma = np.ascontiguousarray(mp.gamma)
    cdef int dim
    cdef const long long[::1] fptr
    cdef const double[:, ::1] freqs
    cdef const double[::1] cre, cim
    cdef const long long[::1] cptr
    cdef const double[:, ::1] clo, chi
    cdef const double[::1] cval, dflt
    dim, fptr, freqs, cre, cim, cptr, clo, chi, cval, dflt = _obs_arrays(op)
    cdef const double[:, ::1] S = np.ascontiguousarray(np.atleast_2d(starts), dtype=float)
    cdef const long long[::1] K = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t ns = S.shape[0], nc = K.shape[0], s, ci
    cdef long long n, R = mp.n_steps
    out = np.empty((ns, nc, 2))
    cdef double[:, :, ::1] O = out
    point = np.empty(mp.dim)
    cdef double[::1] pt = point
    cdef long long[::1] C = np.zeros(max(R, 1), dtype=np.int64)
    cdef double sr, cr_, si, ci_, vr, vi
    with nogil:
        for s in range(ns):
            for n in range(C.shape[0]):
                C[n] = 0
            sr = 0.0
            cr_ = 0.0
            si = 0.0
            ci_ = 0.0
            n = 0
            for ci in range(nc):
                while n < K[ci]:
                    spt_point(alpha, beta, gamma, &S[s, 0], <double>n, &C[0], &pt[0])
                    count_hits(lo, hi, &pt[0], &C[0])
                    eval_obs(dim, fptr, freqs, cre, cim, cptr, clo, chi, cval, dflt,
                             &pt[0], &vr, &vi)
                    neumaier(&sr, &cr_, vr)
                    neumaier(&si, &ci_, vi)
                    n += 1
                O[s, ci, 0] = sr + cr_
                O[s, ci, 1] = si + ci_
    return out[:, :, 0] + 1j * out[:, :, 1]


def double_sums(alpha_dd, op1, op2, points, checkpoints):
    cdef const double[:, ::1] alpha = np.ascontiguousarray(alpha_dd, dtype=float)
    cdef int dim1, dim2
    cdef const long long[::1] fp1, cp1, fp2, cp2
    cdef const double[:, ::1] fq1, lo1, hi1, fq2, lo2, hi2
    cdef const double[::1] re1, im1, v1, d1, re2, im2, v2, d2
    dim1, fp1, fq1, re1, im1, cp1, lo1, hi1, v1, d1 = _obs_arrays(op1)
    dim2, fp2, fq2, re2, im2, cp2, lo2, hi2, v2, d2 = _obs_arrays(op2)
    cdef const double[:, ::1] X = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    cdef const long long[::1] K = np.ascontiguousarray(checkpoints, dtype=np.int64)
    cdef Py_ssize_t npts = X.shape[0], nc = K.shape[0], dim = alpha.shape[0], p, ci, j
    cdef long long n, check = DRIFT_CHECK
    cdef double tol = DRIFT_TOL
    a_h = np.empty(dim); a_l = np.empty(dim); b_h = np.empty(dim); b_l = np.empty(dim)
    a_pt = np.empty(dim); b_pt = np.empty(dim)
    cdef double[::1] ah = a_h, al = a_l, bh = b_h, bl = b_l, ap = a_pt, bp = b_pt
    # doubled angle, exact
    a2 = np.empty((dim, 2))
    for j in range(dim):
        a2[j, 0] = 2.0 * alpha[j, 0]
        a2[j, 1] = 2.0 * alpha[j, 1]
        if a2[j, 0] >= 1.0:
            a2[j, 0] -= 1.0
    cdef const double[:, ::1] alpha2 = a2
    out = np.empty((npts, nc, 2))
    cdef double[:, :, ::1] O = out
    cdef double sr, cr_, si, ci_, r1, i1, r2, i2, vr, vi, ref, drift
    cdef long long bad_n = -1
    cdef Py_ssize_t bad_p = -1, bad_j = -1
    cdef double bad_d = 0.0
    with nogil:
        for p in range(npts):
            for j in range(dim):
                ah[j] = X[p, j]
                al[j] = 0.0
                bh[j] = X[p, j]
                bl[j] = 0.0
            sr = 0.0
            cr_ = 0.0
            si = 0.0
            ci_ = 0.0
            n = 0
            for ci in range(nc):
                while n < K[ci]:
                    if n > 0 and n % check == 0:
                        # resynchronise both running states with the exact form
                        for j in range(dim):
                            ref = coord_mul(X[p, j], <double>n, alpha[j, 0], alpha[j, 1])
                            drift = circ(ref, finish(ah[j], al[j]))
                            if drift > tol:
                                bad_n = n
                                bad_p = p
                                bad_j = j
                                bad_d = drift
                                break
                            ah[j] = ref
                            al[j] = 0.0
                            ref = coord_mul(X[p, j], <double>(2 * n), alpha[j, 0], alpha[j, 1])
                            drift = circ(ref, finish(bh[j], bl[j]))
                            if drift > tol:
                                bad_n = n
                                bad_p = p
                                bad_j = j
                                bad_d = drift
                                break
                            bh[j] = ref
                            bl[j] = 0.0
                        if bad_n >= 0:
                            break
                    for j in range(dim):
                        ap[j] = finish(ah[j], al[j])
                        bp[j] = finish(bh[j], bl[j])
                    eval_obs(dim1, fp1, fq1, re1, im1, cp1, lo1, hi1, v1, d1, &ap[0], &r1, &i1)
                    eval_obs(dim2, fp2, fq2, re2, im2, cp2, lo2, hi2, v2, d2, &bp[0], &r2, &i2)
                    vr = r1 * r2 - i1 * i2
                    vi = r1 * i2 + i1 * r2
                    neumaier(&sr, &cr_, vr)
                    neumaier(&si, &ci_, vi)
                    for j in range(dim):
                        add_term(&ah[j], &al[j], alpha[j, 0], alpha[j, 1])
                        add_term(&bh[j], &bl[j], alpha2[j, 0], alpha2[j, 1])
                    n += 1
                if bad_n >= 0:
                    break
                O[p, ci, 0] = sr + cr_
                O[p, ci, 1] = si + ci_
            if bad_n >= 0:
                break
    if bad_n >= 0:
        raise DriftError(f"point {bad_p}: running orbit drifted by {bad_d:.3e} "
                         f"at n={bad_n} on axis {bad_j}")
    return out[:, :, 0] + 1j * out[:, :, 1]
