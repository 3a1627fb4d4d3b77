"""Spectrum-sharing capacity under interference-temperature constraints.

Solves the convex problem

    maximize    log det(I + H^H S H)
    subject to  tr(S) <= P,
                tr(B_i S) <= limit_i,   i = 1..K,

over PSD transmit covariances ``S``, where ``B_i = h_i h_i^H`` for a
single-antenna receiver ``h_i`` (the trace form also covers multi-antenna
Gram constraints ``B_i = H_i H_i^H``).

The solver works on the Lagrange dual: for multipliers ``(lam, mu)`` the
inner maximization has a closed form -- whiten the channel with
``A^{-1/2}``, ``A = lam I + sum_i mu_i B_i``, then apply penalized
water-filling -- and the outer minimization is an ellipsoid cutting-plane
search driven by the subgradient ``(P - tr S, limit_i - tr(B_i S))``.
Convergence is certified by the duality gap between the best feasible
primal iterate and the best dual value.

The determinant-scale optimum ``exp(capacity)`` as a function of the
limits is concave, and its partial derivative with respect to ``limit_i``
equals ``mu_i * exp(capacity)`` at the optimal multipliers; this is what
``det_capacity_gradient`` returns.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import nnls

from . import backend
from .linalg import as_complex_matrix, waterfill_budget

FLOOR_REL = 1e-10
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max_iterations"


def gram(chan):
    """Constraint Gram matrix: h h^H for vectors, H H^H for matrices."""
    c = np.asarray(chan, dtype=complex)
    if c.ndim == 1:
        return np.outer(c, c.conj())
    return c @ c.conj().T


@dataclass(frozen=True)
class CrProblem:
    """One spectrum-sharing instance.

    Attributes
    ----------
    H : (N, M) complex
        Main channel (transmit antennas along axis 0).
    pu_channels : tuple of arrays
        Protected receivers; each entry is an (N,) vector or an (N, Ne)
        matrix.  May be empty (pure water-filling).
    power : float
        Transmit power budget, > 0 (linear scale).
    it_limits : (K,) float
        Interference limits, entries in [0, inf]; inf removes the
        constraint, an exact 0 confines S to the orthogonal complement
        of that receiver's channel.
    """

    H: np.ndarray
    pu_channels: tuple
    power: float
    it_limits: np.ndarray

    def __post_init__(self):
        h = as_complex_matrix(self.H, "H")
        chans = tuple(np.asarray(c, dtype=complex) for c in self.pu_channels)
        for c in chans:
            if c.shape[0] != h.shape[0]:
                raise ValueError("pu channel dimension does not match H")
        if not self.power > 0:
            raise ValueError("power budget must be positive")
        lims = np.asarray(self.it_limits, dtype=float).reshape(-1)
        if lims.shape[0] != len(chans):
            raise ValueError("it_limits length must match pu_channels")
        if np.any(np.isnan(lims)) or np.any(lims < 0):
            raise ValueError("it_limits must be nonnegative (inf allowed)")
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "pu_channels", chans)
        object.__setattr__(self, "it_limits", lims)

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def m(self):
        return self.H.shape[1]

    @property
    def k(self):
        return len(self.pu_channels)

    def with_limits(self, limits):
        """Copy of the problem with different interference limits."""
        if limits is None:
            limits = np.full(self.k, np.inf)
        return replace(self, it_limits=np.asarray(limits, dtype=float))


@dataclass(frozen=True)
class CrSolution:
    """Primal-dual solution of a spectrum-sharing instance.

    ``capacity`` is in nats.  ``dual_power`` and ``dual_it`` are the
    Lagrange multipliers of the power and interference constraints;
    ``gap`` is the certified duality gap, ``kkt_residual`` the Frobenius
    norm of the stationarity defect restricted to the support of S.
    """

    S: np.ndarray
    capacity: float
    dual_power: float
    dual_it: np.ndarray
    gap: float
    kkt_residual: float
    iterations: int
    status: str
    leaks: np.ndarray
    trace: float

    def validate(self, problem, rtol=1e-6):
        """Assert the solution invariants against its problem."""
        p = problem.power
        assert self.trace <= p + rtol * p, "power constraint violated"
        lims = problem.it_limits
        for i in range(problem.k):
            if np.isfinite(lims[i]):
                assert self.leaks[i] <= lims[i] + rtol * (1.0 + lims[i]), (
                    f"interference constraint {i} violated"
                )
            slack = lims[i] - self.leaks[i] if np.isfinite(lims[i]) else np.inf
            if np.isfinite(slack):
                assert self.dual_it[i] * slack <= 1e-4 * (1.0 + lims[i]), (
                    f"complementary slackness violated for constraint {i}"
                )
        assert self.dual_power * (p - self.trace) <= 1e-4 * (1.0 + p), (
            "complementary slackness violated for the power constraint"
        )


class _PreparedCr:
    """Preprocessed instance reused across many solves at varying limits."""

    def __init__(self, h, channels, power, floor_rel=FLOOR_REL):
        self.h = np.ascontiguousarray(h, dtype=complex)
        self.n, self.m = self.h.shape
        self.chans = [np.asarray(c, dtype=complex) for c in channels]
        self.k = len(self.chans)
        self.power = float(power)
        self.floor_rel = float(floor_rel)
        self.r = self.h @ self.h.conj().T
        self.r = 0.5 * (self.r + self.r.conj().T)
        if self.k:
            self.grams = np.stack([gram(c) for c in self.chans])
        else:
            self.grams = np.zeros((0, self.n, self.n), dtype=complex)
        # largest achievable interference power per constraint
        self.leak_scale = np.array(
            [
                self.power * max(float(np.linalg.eigvalsh(g)[-1]), 0.0)
                for g in self.grams
            ]
        )
        self._zero_tol = 1e-12 * (1.0 + self.leak_scale)

    # -- helpers -------------------------------------------------------

    def _waterfill(self, rr):
        """Budget water-filling on Gram ``rr``: (s, capacity, lam)."""
        d, u = backend.eigh_desc(rr)
        d = np.maximum(d, 0.0)
        alloc, level = waterfill_budget(d, self.power)
        s = (u * alloc) @ u.conj().T
        cap = float(np.sum(np.log1p(d * alloc)))
        lam = 0.0 if not np.isfinite(level) else 1.0 / level
        return s, cap, lam, float(d[0]) if d.size else 0.0

    def _leaks_full(self, s_full):
        return np.array(
            [float(np.sum(g.conj() * s_full).real) for g in self.grams]
        )

    def _result(self, s_full, cap, lam, mu_full, gap, status, iters, kkt):
        return CrSolution(
            S=s_full,
            capacity=cap,
            dual_power=lam,
            dual_it=mu_full,
            gap=gap,
            kkt_residual=kkt,
            iterations=iters,
            status=status,
            leaks=self._leaks_full(s_full),
            trace=float(np.trace(s_full).real),
        )

    def _kkt_residual(self, hr, grams_r, s, lam, mu):
        """Stationarity defect on the support of ``s`` (Frobenius norm)."""
        m_arg = hr.conj().T @ s @ hr
        m_arg = 0.5 * (m_arg + m_arg.conj().T)
        inv = np.linalg.inv(np.eye(hr.shape[1]) + m_arg)
        gcap = hr @ inv @ hr.conj().T
        gcap = 0.5 * (gcap + gcap.conj().T)
        ws, us = np.linalg.eigh(s)
        tr = max(float(np.trace(s).real), 0.0)
        sup = us[:, ws > 1e-9 * (1.0 + tr)]
        if sup.shape[1] == 0:
            return 0.0, gcap, sup
        resid = gcap - lam * np.eye(hr.shape[0])
        for j in range(len(grams_r)):
            resid = resid - mu[j] * grams_r[j]
        proj = sup.conj().T @ resid @ sup
        return float(np.linalg.norm(proj)), gcap, sup

    def _polish(self, hr, grams_r, gamma_r, rr, s, lam, mu, dual_best,
                primal_best, rounds):
        """Refine the primal-dual pair on the active-set KKT system.

        The ellipsoid certifies the optimal value but, where the dual is
        flat, leaves the multipliers (and with them the primal point)
        positioned only to the square root of the gap.  Re-solving the
        stationarity equation restricted to the support of S -- with the
        active set read off the multipliers, which are reliable there --
        is a Newton-like correction that typically collapses the gap to
        rounding level in one or two rounds.
        """
        kr = len(grams_r)
        grams_arr = np.stack(grams_r)
        s_cur = s
        lam_cur, mu_cur = lam, np.asarray(mu, dtype=float).copy()
        mu_scale = 1e-5 * (1.0 + float(np.max(np.abs(mu_cur), initial=0.0)))
        for _ in range(rounds):
            kkt, gcap, sup = self._kkt_residual(hr, grams_r, s_cur, lam_cur, mu_cur)
            if sup.shape[1] == 0:
                break
            tr_s = float(np.trace(s_cur).real)
            leaks = np.array(
                [float(np.sum(grams_r[j].conj() * s_cur).real) for j in range(kr)]
            )
            # classify active constraints from the dual side (multipliers are
            # well separated from zero there even when the primal iterate is
            # slightly off the boundary), with a primal-tightness fallback
            trace_active = lam_cur > mu_scale or (
                self.power - tr_s <= 1e-3 * (1.0 + self.power)
            )
            act = [
                j
                for j in range(kr)
                if mu_cur[j] > mu_scale
                or gamma_r[j] - leaks[j] <= 1e-3 * (1.0 + gamma_r[j])
            ]
            gp = sup.conj().T @ gcap @ sup
            rhs = np.concatenate([gp.real.ravel(), gp.imag.ravel()])

            def fit(use_trace, use_set):
                cols = []
                if use_trace:
                    eye_p = sup.conj().T @ sup
                    cols.append(
                        np.concatenate([eye_p.real.ravel(), eye_p.imag.ravel()])
                    )
                for j in use_set:
                    bp = sup.conj().T @ grams_r[j] @ sup
                    cols.append(np.concatenate([bp.real.ravel(), bp.imag.ravel()]))
                if not cols:
                    return None
                coeff, _ = nnls(np.column_stack(cols), rhs)
                idx = 0
                lam_f = 0.0
                if use_trace:
                    lam_f = float(coeff[idx])
                    idx += 1
                mu_f = np.zeros(kr)
                for j in use_set:
                    mu_f[j] = float(coeff[idx])
                    idx += 1
                oracle = backend.dual_oracle(
                    rr, grams_arr, self.power, gamma_r, lam_f, mu_f,
                    self.floor_rel,
                )
                return lam_f, mu_f, oracle

            cand = fit(trace_active, act)
            if cand is None:
                break
            # complementary-slackness pruning: a falsely included constraint
            # carries positive multiplier with genuinely positive slack, and
            # dropping it strictly lowers the dual value (the exact dual
            # optimum minimizes over active-set choices)
            for _ in range(1 + len(act)):
                lam_new, mu_new, oracle = cand
                dual_val = oracle[0]
                tr_new, leaks_new = oracle[3], oracle[4]
                offenders = []
                if trace_active and lam_new > 0 and (
                    self.power - tr_new > 1e-8 * (1.0 + self.power)
                ):
                    offenders.append(("trace", lam_new * (self.power - tr_new)))
                for j in act:
                    if mu_new[j] > 0 and (
                        gamma_r[j] - leaks_new[j] > 1e-8 * (1.0 + gamma_r[j])
                    ):
                        offenders.append((j, mu_new[j] * (gamma_r[j] - leaks_new[j])))
                if not offenders:
                    break
                worst = max(offenders, key=lambda o: o[1])[0]
                if worst == "trace":
                    trial_trace, trial_act = False, act
                else:
                    trial_trace, trial_act = trace_active, [
                        j for j in act if j != worst
                    ]
                trial = fit(trial_trace, trial_act)
                if trial is None or trial[2][0] > dual_val + 1e-12:
                    break
                trace_active, act, cand = trial_trace, trial_act, trial

            lam_new, mu_new, oracle = cand
            dual_val, _, s_new, tr_new, leaks_new, _ = oracle
            improved = False
            if dual_val <= dual_best + 1e-12:
                dual_best = min(dual_best, dual_val)
                lam_cur, mu_cur = lam_new, mu_new
                improved = True
            c = 1.0
            if tr_new > self.power:
                c = min(c, self.power / tr_new)
            for j in range(kr):
                if leaks_new[j] > gamma_r[j]:
                    c = min(c, gamma_r[j] / leaks_new[j])
            cap_new = backend.logdet_ipsr(c * s_new, rr)
            if cap_new > primal_best:
                primal_best = cap_new
                s_cur = c * s_new
                improved = True
            if not improved:
                break
        kkt, _, _ = self._kkt_residual(hr, grams_r, s_cur, lam_cur, mu_cur)
        return s_cur, lam_cur, mu_cur, dual_best, primal_best, kkt

    # -- main entry ----------------------------------------------------

    def solve(self, limits=None, warm=None, tol=DEFAULT_TOL,
              max_iter=DEFAULT_MAX_ITER, polish=True):
        """Solve at the given limits; returns a CrSolution.

        ``warm`` is an optional (lam, mu_full) pair from a solve at nearby
        limits; it seeds a small initial ellipsoid which is certified (or
        discarded) through the duality gap.  ``polish=False`` skips the
        least-squares multiplier refinement (used on hot paths that only
        need gradient directions); the KKT residual is then not computed.
        """
        if limits is None:
            limits = np.full(self.k, np.inf)
        limits = np.asarray(limits, dtype=float).reshape(-1)
        if limits.shape[0] != self.k:
            raise ValueError("limits length mismatch")

        zero = limits <= self._zero_tol if self.k else np.zeros(0, bool)
        drop = np.zeros(self.k, dtype=bool)
        for i in range(self.k):
            if not zero[i] and (
                not np.isfinite(limits[i])
                or limits[i] >= self.leak_scale[i] * (1.0 + 1e-9)
            ):
                drop[i] = True
        keep = ~zero & ~drop
        keep_idx = np.flatnonzero(keep)

        # exact limit of a binding zero constraint: restrict S to the
        # orthogonal complement of the corresponding channels
        if zero.any():
            cols = np.hstack(
                [self.chans[i].reshape(self.n, -1) for i in np.flatnonzero(zero)]
            )
            u_d, sv, _ = np.linalg.svd(cols, full_matrices=True)
            rank = int(np.sum(sv > 1e-12 * max(sv[0], 1.0))) if sv.size else 0
            q = u_d[:, rank:]
            if q.shape[1] == 0:
                s_full = np.zeros((self.n, self.n), dtype=complex)
                return self._result(
                    s_full, 0.0, 0.0, np.zeros(self.k), 0.0,
                    STATUS_CONVERGED, 0, 0.0,
                )
            hr = q.conj().T @ self.h
            grams_r = [q.conj().T @ self.grams[i] @ q for i in keep_idx]
        else:
            q = None
            hr = self.h
            grams_r = [self.grams[i] for i in keep_idx]

        rr = hr @ hr.conj().T
        rr = 0.5 * (rr + rr.conj().T)
        gamma_r = limits[keep]
        mu_full = np.zeros(self.k)

        def embed(s):
            return q @ s @ q.conj().T if q is not None else s

        s_un, cap_un, lam_un, lam_max = self._waterfill(rr)
        if not grams_r:
            s_full = embed(s_un)
            kkt, _, _ = self._kkt_residual(hr, [], s_un, lam_un, np.zeros(0))
            return self._result(
                s_full, cap_un, lam_un, mu_full, 0.0, STATUS_CONVERGED, 0, kkt
            )

        kr = len(grams_r)
        leaks_un = np.array(
            [float(np.sum(grams_r[j].conj() * s_un).real) for j in range(kr)]
        )
        # near-strict acceptance: callers probe points just inside the
        # largest achievable leakage and need the binding multiplier there
        if np.all(leaks_un <= gamma_r + 1e-12 * (1.0 + gamma_r)):
            s_full = embed(s_un)
            kkt, _, _ = self._kkt_residual(hr, grams_r, s_un, lam_un, np.zeros(kr))
            return self._result(
                s_full, cap_un, lam_un, mu_full, 0.0, STATUS_CONVERGED, 0, kkt
            )

        grams_arr = np.stack(grams_r)
        lam_hi = lam_max * 1.01 + 1e-12
        mu_hi = lam_max * self.power / np.maximum(gamma_r, 1e-6) + 1e-9
        box_hi = np.concatenate([[lam_hi], mu_hi])

        attempts = []
        if warm is not None:
            w_lam, w_mu = warm
            w_mu = np.asarray(w_mu, dtype=float)[keep]
            xw = np.concatenate([[max(w_lam, 0.0)], np.maximum(w_mu, 0.0)])
            if np.all(np.isfinite(xw)):
                rad_w = 0.25 * xw + 0.05 * box_hi + 1e-9
                attempts.append((xw, rad_w, min(max_iter, 220)))
        attempts.append((0.5 * box_hi, 0.5 * box_hi, max_iter))
        # widened box, in case the standard bounds missed the optimum
        attempts.append((5.0 * box_hi, 5.0 * box_hi, 2 * max_iter))

        rounds = 3 if polish else 1
        total_iters = 0
        result = None
        for x0, rad0, iters_cap in attempts:
            _, x_best, dual_best, s_best, primal_best, it = backend.solve_cr_dual(
                rr, grams_arr, self.power, gamma_r, x0, rad0,
                tol, iters_cap, self.floor_rel,
            )
            total_iters += it
            s_r, lam, mu_r, dual_best, primal_best, kkt = self._polish(
                hr, grams_r, gamma_r, rr, s_best, float(x_best[0]),
                np.asarray(x_best[1:], dtype=float), dual_best, primal_best,
                rounds,
            )
            gap = max(dual_best - primal_best, 0.0)
            if result is None or gap < result[0]:
                result = (gap, s_r, lam, mu_r, primal_best, kkt)
            if gap <= tol:
                break

        gap, s_r, lam, mu_r, primal_best, kkt = result
        if not polish:
            kkt = float("nan")
        mu_full[keep_idx] = mu_r
        out_status = STATUS_CONVERGED if gap <= tol else STATUS_MAX_ITER
        return self._result(
            embed(s_r), primal_best, lam, mu_full, gap,
            out_status, total_iters, kkt,
        )


def solve_cr(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, warm=None):
    """Solve a CrProblem to a certified duality gap of ``tol`` nats."""
    core = _PreparedCr(problem.H, problem.pu_channels, problem.power)
    return core.solve(problem.it_limits, warm=warm, tol=tol, max_iter=max_iter)


def log_det_capacity(problem, limits=None, tol=DEFAULT_TOL):
    """Capacity (nats) of the problem at the given limits; the log of the
    determinant-scale auxiliary value.  Use this form when exp() would
    overflow."""
    sol = solve_cr(problem.with_limits(limits) if limits is not None else problem,
                   tol=tol)
    return sol.capacity


def det_capacity(problem, limits=None, tol=DEFAULT_TOL):
    """Determinant-scale optimum det(I + H^H S* H) at the given limits.

    Always >= 1 (S = 0 is feasible).
    """
    return math.exp(log_det_capacity(problem, limits, tol=tol))


def det_capacity_gradient(problem, limits=None, tol=1e-8):
    """Gradient of ``det_capacity`` with respect to the limits.

    Equals ``mu_i * det_capacity`` at the optimal dual; entries for
    inactive constraints are 0 by complementary slackness.
    """
    prob = problem.with_limits(limits) if limits is not None else problem
    sol = solve_cr(prob, tol=tol)
    return sol.dual_it * math.exp(sol.capacity)
