"""Pure-numpy backend for the hot solver kernels.

Mirrors the compiled extension ``secrecap._core`` (see ``secrecap.backend``
for how one of the two is selected at import).  Both implement:

* ``eigh_desc``      -- Hermitian eigendecomposition, eigenvalues descending
* ``logdet_ipsr``    -- log det(I + S R) for PSD ``S``, ``R``
* ``solve_cr_dual``  -- ellipsoid minimization of the Lagrange dual of the
                        interference-constrained capacity problem, with the
                        inner maximization done in closed form (whitening +
                        penalized water-filling)

The numpy variant leans on LAPACK (``numpy.linalg.eigh``); the compiled one
uses a cyclic Jacobi sweep tuned for the small matrices these solvers see.
"""

import numpy as np

COMPILED = False

# status codes shared with the compiled kernel
STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1


def eigh_desc(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    w, u = np.linalg.eigh(a)
    return w[::-1].copy(), np.ascontiguousarray(u[:, ::-1])


def logdet_ipsr(s, r):
    """log det(I + S R) for PSD S and R (the determinant is real >= 1)."""
    n = s.shape[0]
    return float(np.linalg.slogdet(np.eye(n) + s @ r)[1])


def dual_oracle(r, b, p, gamma, lam, mu, floor_rel):
    """Evaluate the dual function and its subgradient at (lam, mu).

    Returns (dual_value, subgradient, s, tr_s, leaks, cap_inner) where ``s``
    is the inner maximizer (feasible in the PSD cone but not necessarily in
    the trace/interference constraints) and ``cap_inner`` its capacity.
    """
    n = r.shape[0]
    a = lam * np.eye(n, dtype=complex)
    for i in range(b.shape[0]):
        a += mu[i] * b[i]
    wa, ua = np.linalg.eigh(a)
    floor = floor_rel * (1.0 + max(wa[-1], 0.0))
    wa = np.maximum(wa, floor)
    ainvs = (ua * (1.0 / np.sqrt(wa))) @ ua.conj().T
    g = ainvs @ r @ ainvs
    g = 0.5 * (g + g.conj().T)
    d, wv = np.linalg.eigh(g)
    active = d > 1.0
    inner = float(np.sum(np.log(d[active]) - 1.0 + 1.0 / d[active]))
    dual = inner + lam * p + float(mu @ gamma)
    p_alloc = np.where(active, 1.0 - 1.0 / np.maximum(d, 1e-300), 0.0)
    s_tilde = (wv * p_alloc) @ wv.conj().T
    s = ainvs @ s_tilde @ ainvs
    s = 0.5 * (s + s.conj().T)
    tr_s = float(np.trace(s).real)
    leaks = np.array([float(np.sum(b[i].conj() * s).real) for i in range(b.shape[0])])
    sub = np.empty(1 + b.shape[0])
    sub[0] = p - tr_s
    sub[1:] = gamma - leaks
    cap_inner = float(np.sum(np.log(d[active])))
    return dual, sub, s, tr_s, leaks, cap_inner


def solve_cr_dual(r, b, p, gamma, x0, rad0, tol, max_iter, floor_rel):
    """Minimize the Lagrange dual over nonnegative multipliers.

    Parameters
    ----------
    r : (N, N) complex Hermitian PSD
        Gram matrix H H^H of the main channel.
    b : (K, N, N) complex Hermitian PSD
        Gram matrices of the interference constraints, K >= 1.
    p : float
        Transmit power budget (> 0).
    gamma : (K,) float
        Interference limits (all > 0 and finite; zeros/infinities are
        handled by the caller through projection/removal).
    x0, rad0 : (1+K,) float
        Center and per-coordinate radii of the initial search box; the
        starting ellipsoid is the diagonal one containing that box.
    tol : float
        Duality-gap target in nats.
    max_iter : int
        Cap on ellipsoid iterations.
    floor_rel : float
        Relative eigenvalue floor used when inverting the dual matrix.

    Returns
    -------
    (status, x_best, dual_best, s_best, primal_best, iters)
        ``x_best`` attains the best dual value; ``s_best`` is the best
        feasible primal covariance found (scaled into the constraint set)
        and ``primal_best`` its capacity in nats.
    """
    ndim = x0.shape[0]
    k = b.shape[0]
    x = x0.astype(float).copy()
    # diagonal ellipsoid containing the box x0 +/- rad0
    e = np.diag(ndim * np.maximum(rad0, 1e-300) ** 2).astype(float)
    dual_best = np.inf
    x_best = x.copy()
    primal_best = 0.0
    n = r.shape[0]
    s_best = np.zeros((n, n), dtype=complex)
    status = STATUS_MAX_ITER
    iters = 0

    for _ in range(max_iter):
        iters += 1
        viol = np.flatnonzero(x < 0.0)
        if viol.size:
            # feasibility cut for the most violated nonnegativity constraint
            j = viol[np.argmin(x[viol])]
            cut = np.zeros(ndim)
            cut[j] = -1.0
        else:
            dual, sub, s, tr_s, leaks, _ = dual_oracle(
                r, b, p, gamma, x[0], x[1:], floor_rel
            )
            if dual < dual_best:
                dual_best = dual
                x_best = x.copy()
            # scale the inner maximizer into the feasible set
            c = 1.0
            if tr_s > p:
                c = min(c, p / tr_s)
            for i in range(k):
                if leaks[i] > gamma[i]:
                    c = min(c, gamma[i] / leaks[i])
            cap_c = logdet_ipsr(c * s, r)
            if cap_c > primal_best:
                primal_best = cap_c
                s_best = c * s
            if dual_best - primal_best <= tol:
                status = STATUS_CONVERGED
                break
            cut = sub
        eg = e @ cut
        denom = float(cut @ eg)
        if not np.isfinite(denom) or denom <= 0.0:
            break
        eg /= np.sqrt(denom)
        x = x - eg / (ndim + 1.0)
        e = (ndim * ndim / (ndim * ndim - 1.0)) * (
            e - (2.0 / (ndim + 1.0)) * np.outer(eg, eg)
        )
        e = 0.5 * (e + e.T)
        if float(np.max(np.diag(e))) < (1e-14 * (1.0 + float(np.abs(x).max()))) ** 2:
            break

    return status, x_best, dual_best, s_best, primal_best, iters
