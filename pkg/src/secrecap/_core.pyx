# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend for the hot solver kernels.

Same contract as ``secrecap._core_py`` (that module's docstring is the
reference).  Matrices here are tiny (antenna counts), so the Hermitian
eigenproblems are solved with cyclic Jacobi sweeps and all linear algebra
is open-coded; the entire ellipsoid loop runs without touching Python.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, log, sqrt

COMPILED = True

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1


cdef void _jacobi(double complex[:, ::1] a, double complex[:, ::1] v,
                  double[::1] w, int n) noexcept nogil:
    """In-place Jacobi eigendecomposition of Hermitian ``a``.

    ``a`` is destroyed; eigenvalues land in ``w`` (unsorted) and the
    accumulated unitary in ``v``.
    """
    cdef int i, j, p, q, sweep
    cdef double offn, scale, thresh, absb, tau, t, c, s
    cdef double complex eb, ebc, ap, aq

    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 if i == j else 0.0
    if n == 1:
        w[0] = a[0, 0].real
        return

    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    scale = sqrt(scale)
    thresh = 1e-14 * (1.0 + scale)

    for sweep in range(60):
        offn = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                offn += (a[i, j].real * a[i, j].real
                         + a[i, j].imag * a[i, j].imag)
        if sqrt(2.0 * offn) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                absb = sqrt(a[p, q].real * a[p, q].real
                            + a[p, q].imag * a[p, q].imag)
                if absb <= 1e-18 * (1.0 + scale):
                    continue
                eb = a[p, q] / absb
                ebc = eb.conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * absb)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # columns p, q
                for i in range(n):
                    ap = a[i, p]
                    aq = a[i, q]
                    a[i, p] = c * ap - s * ebc * aq
                    a[i, q] = s * ap + c * ebc * aq
                # rows p, q
                for j in range(n):
                    ap = a[p, j]
                    aq = a[q, j]
                    a[p, j] = c * ap - s * eb * aq
                    a[q, j] = s * ap + c * eb * aq
                # eigenvector accumulation
                for i in range(n):
                    ap = v[i, p]
                    aq = v[i, q]
                    v[i, p] = c * ap - s * ebc * aq
                    v[i, q] = s * ap + c * ebc * aq
    for i in range(n):
        w[i] = a[i, i].real


cdef void _mul_nn(double complex[:, ::1] out, double complex[:, ::1] x,
                  double complex[:, ::1] y, int n) noexcept nogil:
    cdef int i, j, kk
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for kk in range(n):
                acc = acc + x[i, kk] * y[kk, j]
            out[i, j] = acc


cdef void _basis_scale(double complex[:, ::1] out, double complex[:, ::1] u,
                       double[::1] d, int n) noexcept nogil:
    """out = u diag(d) u^H (Hermitian by construction)."""
    cdef int i, j, kk
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for kk in range(n):
                acc = acc + u[i, kk] * d[kk] * u[j, kk].conjugate()
            out[i, j] = acc


cdef double _logdet_i_plus_sr(double complex[:, ::1] s,
                              double complex[:, ::1] r,
                              double complex[:, ::1] work,
                              double scale, int n) noexcept nogil:
    """log det(I + scale * S R) via LU with partial pivoting.

    The determinant is real and positive for PSD S, R.
    """
    cdef int i, j, kk, piv
    cdef double best, mag, out
    cdef double complex acc, tmp, factor
    for i in range(n):
        for j in range(n):
            acc = 0
            for kk in range(n):
                acc = acc + s[i, kk] * r[kk, j]
            work[i, j] = scale * acc
        work[i, i] = work[i, i] + 1.0
    out = 0.0
    for kk in range(n):
        piv = kk
        best = fabs(work[kk, kk].real) + fabs(work[kk, kk].imag)
        for i in range(kk + 1, n):
            mag = fabs(work[i, kk].real) + fabs(work[i, kk].imag)
            if mag > best:
                best = mag
                piv = i
        if piv != kk:
            for j in range(n):
                tmp = work[kk, j]
                work[kk, j] = work[piv, j]
                work[piv, j] = tmp
        mag = sqrt(work[kk, kk].real * work[kk, kk].real
                   + work[kk, kk].imag * work[kk, kk].imag)
        if mag <= 0:
            return -1e300
        out += log(mag)
        for i in range(kk + 1, n):
            factor = work[i, kk] / work[kk, kk]
            for j in range(kk + 1, n):
                work[i, j] = work[i, j] - factor * work[kk, j]
    return out


def eigh_desc(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = np.array(a, dtype=complex, order="C", copy=True)
    cdef int n = a.shape[0]
    w = np.empty(n, dtype=float)
    v = np.empty((n, n), dtype=complex, order="C")
    cdef double complex[:, ::1] av = a
    cdef double complex[:, ::1] vv = v
    cdef double[::1] wv = w
    _jacobi(av, vv, wv, n)
    order = np.argsort(w)[::-1]
    return np.ascontiguousarray(w[order]), np.ascontiguousarray(v[:, order])


def logdet_ipsr(s, r):
    """log det(I + S R) for PSD S and R."""
    s = np.ascontiguousarray(s, dtype=complex)
    r = np.ascontiguousarray(r, dtype=complex)
    cdef int n = s.shape[0]
    work = np.empty((n, n), dtype=complex, order="C")
    cdef double complex[:, ::1] sv = s
    cdef double complex[:, ::1] rv = r
    cdef double complex[:, ::1] wv = work
    return _logdet_i_plus_sr(sv, rv, wv, 1.0, n)


def dual_oracle(r, b, double p, gamma, double lam, mu, double floor_rel):
    """One dual-function evaluation; same contract as the numpy backend."""
    r = np.ascontiguousarray(r, dtype=complex)
    b = np.ascontiguousarray(b, dtype=complex)
    gam_arr = np.ascontiguousarray(gamma, dtype=float)
    mu_arr = np.ascontiguousarray(mu, dtype=float)

    cdef int n = r.shape[0]
    cdef int k = b.shape[0]
    a_work = np.empty((n, n), dtype=complex, order="C")
    evec = np.empty((n, n), dtype=complex, order="C")
    wr = np.empty(n, dtype=float)
    ainvs = np.empty((n, n), dtype=complex, order="C")
    tmp1 = np.empty((n, n), dtype=complex, order="C")
    gmat = np.empty((n, n), dtype=complex, order="C")
    dvec = np.empty(n, dtype=float)
    wvec = np.empty((n, n), dtype=complex, order="C")
    smat = np.empty((n, n), dtype=complex, order="C")
    palloc = np.empty(n, dtype=float)
    leaks = np.empty(k, dtype=float)
    sub = np.empty(1 + k, dtype=float)

    cdef double complex[:, ::1] rv = r
    cdef double complex[:, :, ::1] bv = b
    cdef double[::1] gam = gam_arr
    cdef double[::1] muv = mu_arr
    cdef double complex[:, ::1] aw = a_work
    cdef double complex[:, ::1] ev = evec
    cdef double[::1] wv = wr
    cdef double complex[:, ::1] ai = ainvs
    cdef double complex[:, ::1] t1 = tmp1
    cdef double complex[:, ::1] gm = gmat
    cdef double[::1] dv = dvec
    cdef double complex[:, ::1] wm = wvec
    cdef double complex[:, ::1] sm = smat
    cdef double[::1] pa = palloc
    cdef double[::1] lk = leaks
    cdef double[::1] subv = sub

    cdef int i, j, kk
    cdef double wmax, floor_v, inner, dual, tr_s, cap_inner
    cdef double complex acc

    with nogil:
        for i in range(n):
            for j in range(n):
                acc = 0
                for kk in range(k):
                    acc = acc + muv[kk] * bv[kk, i, j]
                aw[i, j] = acc
            aw[i, i] = aw[i, i] + lam
        _jacobi(aw, ev, wv, n)
        wmax = 0.0
        for i in range(n):
            if wv[i] > wmax:
                wmax = wv[i]
        floor_v = floor_rel * (1.0 + wmax)
        for i in range(n):
            dv[i] = 1.0 / sqrt(wv[i] if wv[i] > floor_v else floor_v)
        _basis_scale(ai, ev, dv, n)
        _mul_nn(t1, rv, ai, n)
        _mul_nn(gm, ai, t1, n)
        for i in range(n):
            for j in range(i + 1, n):
                acc = 0.5 * (gm[i, j] + gm[j, i].conjugate())
                gm[i, j] = acc
                gm[j, i] = acc.conjugate()
            gm[i, i] = gm[i, i].real
        _jacobi(gm, wm, dv, n)
        inner = 0.0
        cap_inner = 0.0
        for i in range(n):
            if dv[i] > 1.0:
                inner += log(dv[i]) - 1.0 + 1.0 / dv[i]
                cap_inner += log(dv[i])
                pa[i] = 1.0 - 1.0 / dv[i]
            else:
                pa[i] = 0.0
        dual = inner + lam * p
        for kk in range(k):
            dual += muv[kk] * gam[kk]
        _basis_scale(t1, wm, pa, n)
        _mul_nn(gm, t1, ai, n)
        _mul_nn(sm, ai, gm, n)
        tr_s = 0.0
        for i in range(n):
            tr_s += sm[i, i].real
        for kk in range(k):
            lk[kk] = 0.0
            for i in range(n):
                for j in range(n):
                    lk[kk] += (bv[kk, i, j].conjugate() * sm[i, j]).real
        subv[0] = p - tr_s
        for kk in range(k):
            subv[1 + kk] = gam[kk] - lk[kk]

    smat = 0.5 * (smat + smat.conj().T)
    return dual, sub, smat, tr_s, leaks, cap_inner


def solve_cr_dual(r, b, double p, gamma, x0, rad0, double tol, int max_iter,
                  double floor_rel):
    """Ellipsoid minimization of the Lagrange dual; see the numpy backend
    for the full parameter description."""
    r = np.ascontiguousarray(r, dtype=complex)
    b = np.ascontiguousarray(b, dtype=complex)
    gam_arr = np.ascontiguousarray(gamma, dtype=float)
    x_arr = np.array(x0, dtype=float, copy=True)
    rad_arr = np.ascontiguousarray(rad0, dtype=float)

    cdef int n = r.shape[0]
    cdef int k = b.shape[0]
    cdef int ndim = 1 + k

    e_arr = np.zeros((ndim, ndim), dtype=float)
    cdef int i0
    for i0 in range(ndim):
        e_arr[i0, i0] = ndim * max(rad_arr[i0], 1e-300) ** 2

    a_work = np.empty((n, n), dtype=complex, order="C")
    evec = np.empty((n, n), dtype=complex, order="C")
    wr = np.empty(n, dtype=float)
    ainvs = np.empty((n, n), dtype=complex, order="C")
    tmp1 = np.empty((n, n), dtype=complex, order="C")
    gmat = np.empty((n, n), dtype=complex, order="C")
    dvec = np.empty(n, dtype=float)
    wvec = np.empty((n, n), dtype=complex, order="C")
    smat = np.empty((n, n), dtype=complex, order="C")
    lu = np.empty((n, n), dtype=complex, order="C")
    s_best = np.zeros((n, n), dtype=complex, order="C")
    x_best = x_arr.copy()
    cut_arr = np.empty(ndim, dtype=float)
    eg_arr = np.empty(ndim, dtype=float)
    leaks = np.empty(k, dtype=float)
    palloc = np.empty(n, dtype=float)

    cdef double complex[:, ::1] rv = r
    cdef double complex[:, :, ::1] bv = b
    cdef double[::1] gam = gam_arr
    cdef double[::1] x = x_arr
    cdef double[:, ::1] e = e_arr
    cdef double complex[:, ::1] aw = a_work
    cdef double complex[:, ::1] ev = evec
    cdef double[::1] wv = wr
    cdef double complex[:, ::1] ai = ainvs
    cdef double complex[:, ::1] t1 = tmp1
    cdef double complex[:, ::1] gm = gmat
    cdef double[::1] dv = dvec
    cdef double complex[:, ::1] wm = wvec
    cdef double complex[:, ::1] sm = smat
    cdef double complex[:, ::1] luv = lu
    cdef double complex[:, ::1] sb = s_best
    cdef double[::1] xb = x_best
    cdef double[::1] cut = cut_arr
    cdef double[::1] eg = eg_arr
    cdef double[::1] lk = leaks
    cdef double[::1] pa = palloc

    cdef double dual_best = 1e300
    cdef double primal_best = 0.0
    cdef int status = STATUS_MAX_ITER
    cdef int iters = 0
    cdef int it, i, j, kk, jmin, viol
    cdef double lam, floor_v, wmax, inner, dual, tr_s, c_scale, cap_c
    cdef double xmin, denom, gnorm, coef, maxdiag, absx
    cdef double complex acc

    with nogil:
        for it in range(max_iter):
            iters += 1
            # most-violated nonnegativity constraint, if any
            viol = 0
            jmin = 0
            xmin = 0.0
            for i in range(ndim):
                if x[i] < xmin:
                    xmin = x[i]
                    jmin = i
                    viol = 1
            if viol:
                for i in range(ndim):
                    cut[i] = 0.0
                cut[jmin] = -1.0
            else:
                lam = x[0]
                # A = lam I + sum mu_i B_i
                for i in range(n):
                    for j in range(n):
                        acc = 0
                        for kk in range(k):
                            acc = acc + x[1 + kk] * bv[kk, i, j]
                        aw[i, j] = acc
                    aw[i, i] = aw[i, i] + lam
                _jacobi(aw, ev, wv, n)
                wmax = 0.0
                for i in range(n):
                    if wv[i] > wmax:
                        wmax = wv[i]
                floor_v = floor_rel * (1.0 + wmax)
                for i in range(n):
                    dv[i] = 1.0 / sqrt(wv[i] if wv[i] > floor_v else floor_v)
                _basis_scale(ai, ev, dv, n)
                # G = A^{-1/2} R A^{-1/2}
                _mul_nn(t1, rv, ai, n)
                _mul_nn(gm, ai, t1, n)
                for i in range(n):
                    for j in range(i + 1, n):
                        acc = 0.5 * (gm[i, j] + gm[j, i].conjugate())
                        gm[i, j] = acc
                        gm[j, i] = acc.conjugate()
                    gm[i, i] = gm[i, i].real
                _jacobi(gm, wm, dv, n)
                inner = 0.0
                for i in range(n):
                    if dv[i] > 1.0:
                        inner += log(dv[i]) - 1.0 + 1.0 / dv[i]
                        pa[i] = 1.0 - 1.0 / dv[i]
                    else:
                        pa[i] = 0.0
                dual = inner + lam * p
                for kk in range(k):
                    dual += x[1 + kk] * gam[kk]
                # S = A^{-1/2} (W diag(p) W^H) A^{-1/2}
                _basis_scale(t1, wm, pa, n)
                _mul_nn(gm, t1, ai, n)
                _mul_nn(sm, ai, gm, n)
                tr_s = 0.0
                for i in range(n):
                    tr_s += sm[i, i].real
                for kk in range(k):
                    lk[kk] = 0.0
                    for i in range(n):
                        for j in range(n):
                            lk[kk] += (bv[kk, i, j].conjugate() * sm[i, j]).real
                if dual < dual_best:
                    dual_best = dual
                    for i in range(ndim):
                        xb[i] = x[i]
                # scale into the feasible set and score as a primal point
                c_scale = 1.0
                if tr_s > p:
                    if p / tr_s < c_scale:
                        c_scale = p / tr_s
                for kk in range(k):
                    if lk[kk] > gam[kk]:
                        if gam[kk] / lk[kk] < c_scale:
                            c_scale = gam[kk] / lk[kk]
                cap_c = _logdet_i_plus_sr(sm, rv, luv, c_scale, n)
                if cap_c > primal_best:
                    primal_best = cap_c
                    for i in range(n):
                        for j in range(n):
                            sb[i, j] = c_scale * sm[i, j]
                if dual_best - primal_best <= tol:
                    status = 0  # converged
                    break
                cut[0] = p - tr_s
                for kk in range(k):
                    cut[1 + kk] = gam[kk] - lk[kk]
            # ellipsoid update
            denom = 0.0
            for i in range(ndim):
                eg[i] = 0.0
                for j in range(ndim):
                    eg[i] += e[i, j] * cut[j]
            for i in range(ndim):
                denom += cut[i] * eg[i]
            if not (denom > 0.0) or denom != denom:
                break
            gnorm = sqrt(denom)
            for i in range(ndim):
                eg[i] /= gnorm
            for i in range(ndim):
                x[i] = x[i] - eg[i] / (ndim + 1.0)
            coef = (<double> ndim * ndim) / (<double> ndim * ndim - 1.0)
            for i in range(ndim):
                for j in range(ndim):
                    e[i, j] = coef * (e[i, j]
                                      - (2.0 / (ndim + 1.0)) * eg[i] * eg[j])
            for i in range(ndim):
                for j in range(i + 1, ndim):
                    denom = 0.5 * (e[i, j] + e[j, i])
                    e[i, j] = denom
                    e[j, i] = denom
            maxdiag = 0.0
            absx = 0.0
            for i in range(ndim):
                if e[i, i] > maxdiag:
                    maxdiag = e[i, i]
                if fabs(x[i]) > absx:
                    absx = fabs(x[i])
            if maxdiag < (1e-14 * (1.0 + absx)) ** 2:
                break

    return status, x_best, dual_best, s_best, primal_best, iters
