"""Reference implementations used for validation.

These are deliberately independent of the main solvers: the brute-force
routines do multi-start projected (super)gradient ascent directly on the
covariance, the P-SVD baseline zero-forces the eavesdroppers, and
``finite_diff_grad`` estimates gradients numerically.  They are validation
aids and lower-bound oracles, not production solvers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import logdet_capacity, psd_project, trace_ball_project, waterfill_budget


@dataclass(frozen=True)
class OracleConfig:
    """Knobs for the brute-force oracles; the same seed reproduces the
    same trajectories bit for bit."""

    restarts: int = 8
    max_iters: int = 300
    step_rule: str = "armijo"
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def _rng(cfg, salt):
    return np.random.Generator(
        np.random.Philox(key=np.array([cfg.seed, salt], dtype=np.uint64))
    )


def _random_cov(rng, n, power):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    s = a @ a.conj().T
    return s * (power * rng.uniform(0.2, 1.0) / max(float(np.trace(s).real), 1e-300))


def p_svd_rate(problem):
    """Projected-channel SVD baseline: (covariance, secrecy rate in nats).

    Projects the main channel onto the orthogonal complement of all
    eavesdropper channels and water-fills the transmit power there.  The
    leakage is exactly zero, so the rate equals the projected channel's
    capacity; if the eavesdroppers span the whole space the rate is 0.
    """
    n = problem.n
    cols = np.hstack([e.reshape(n, -1) for e in problem.eavesdroppers])
    u, sv, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(sv > 1e-12 * max(float(sv[0]) if sv.size else 0.0, 1.0)))
    if rank >= n:
        return np.zeros((n, n), dtype=complex), 0.0
    q = u[:, rank:]
    h_proj = q.conj().T @ problem.H
    gains, basis = np.linalg.eigh(h_proj @ h_proj.conj().T)
    gains = np.maximum(gains, 0.0)
    alloc, _ = waterfill_budget(gains, problem.power)
    s_small = (basis * alloc) @ basis.conj().T
    s = q @ s_small @ q.conj().T
    rate = float(np.sum(np.log1p(gains * alloc)))
    return s, rate


def _secrecy_value_grad(s, h, scaled_eavs, matrix_mode):
    """Worst-case rate and a supergradient of the active term."""
    cap = logdet_capacity(h, s)
    inv = np.linalg.inv(np.eye(h.shape[1]) + h.conj().T @ s @ h)
    gcap = h @ inv @ h.conj().T
    worst = math.inf
    grad = None
    for e in scaled_eavs:
        if matrix_mode:
            leak = logdet_capacity(e, s)
            rate = cap - leak
            if rate < worst:
                worst = rate
                inv_e = np.linalg.inv(np.eye(e.shape[1]) + e.conj().T @ s @ e)
                grad = gcap - e @ inv_e @ e.conj().T
        else:
            q = max(float((e.conj() @ s @ e).real), 0.0)
            rate = cap - math.log1p(q)
            if rate < worst:
                worst = rate
                grad = gcap - np.outer(e, e.conj()) / (1.0 + q)
    return worst, 0.5 * (grad + grad.conj().T)


def brute_force_secrecy(problem, cfg=OracleConfig()):
    """Best secrecy rate found by multi-start projected supergradient
    ascent on the covariance (a lower-bound oracle; intended for small N).
    """
    h = problem.H
    n = problem.n
    power = problem.power
    scaled = problem.scaled_eavesdroppers()
    matrix_mode = problem.matrix_mode

    starts = [np.zeros((n, n), dtype=complex)]
    gains, basis = np.linalg.eigh(h @ h.conj().T)
    alloc, _ = waterfill_budget(np.maximum(gains, 0.0), power)
    starts.append((basis * alloc) @ basis.conj().T)
    starts.append(p_svd_rate(problem)[0])
    rng = _rng(cfg, 0xB0)
    while len(starts) < cfg.restarts:
        starts.append(_random_cov(rng, n, power))

    best = 0.0  # S = 0 always achieves rate 0
    for s0 in starts[: cfg.restarts]:
        s = s0.copy()
        val, _ = _secrecy_value_grad(s, h, scaled, matrix_mode)
        step = power
        for _ in range(cfg.max_iters):
            _, g = _secrecy_value_grad(s, h, scaled, matrix_mode)
            gnorm = float(np.linalg.norm(g))
            if gnorm < 1e-12:
                break
            tau = step / gnorm
            improved = False
            for _ in range(8):
                cand = trace_ball_project(s + tau * g, power)
                val_c, _ = _secrecy_value_grad(cand, h, scaled, matrix_mode)
                if val_c > val + 1e-14:
                    s, val = cand, val_c
                    step = tau * gnorm * 1.5
                    improved = True
                    break
                tau *= 0.3
            if not improved:
                step *= 0.3
                if step < 1e-12 * power:
                    break
        best = max(best, val)
    return best


def brute_force_cr(problem, cfg=OracleConfig()):
    """Capacity of the interference-constrained problem by projected
    gradient ascent with alternating feasibility projections (PSD last,
    so the returned iterate is always a valid covariance)."""
    h = problem.H
    n = problem.n
    power = problem.power
    grams = [np.outer(c, c.conj()) if c.ndim == 1 else c @ c.conj().T
             for c in problem.pu_channels]
    limits = np.asarray(problem.it_limits, dtype=float)

    n_eye = np.eye(n)
    gram_sq = [float(np.sum(np.abs(g) ** 2)) for g in grams]

    def feasible_project(s, passes=60):
        # alternating Frobenius projections onto the trace and interference
        # half-spaces, PSD cone last so the result is a valid covariance
        for _ in range(passes):
            tr = float(np.trace(s).real)
            if tr > power:
                s = s - ((tr - power) / n) * n_eye
            for g, g2, lim in zip(grams, gram_sq, limits):
                if not np.isfinite(lim) or g2 <= 0:
                    continue
                q = float(np.sum(g.conj() * s).real)
                if q > lim:
                    s = s - ((q - lim) / g2) * g
            s = psd_project(s)
            ok = float(np.trace(s).real) <= power * (1 + 1e-9)
            for g, lim in zip(grams, limits):
                if np.isfinite(lim):
                    ok = ok and float(np.sum(g.conj() * s).real) <= lim + 1e-9 * (
                        1 + lim
                    )
            if ok:
                break
        # exact feasibility by a final contraction toward the origin
        c = 1.0
        tr = float(np.trace(s).real)
        if tr > power:
            c = min(c, power / tr)
        for g, lim in zip(grams, limits):
            if np.isfinite(lim):
                q = float(np.sum(g.conj() * s).real)
                if q > lim:
                    c = min(c, lim / q if q > 0 else 0.0)
        return c * s

    def value_grad(s):
        cap = logdet_capacity(h, s)
        inv = np.linalg.inv(np.eye(h.shape[1]) + h.conj().T @ s @ h)
        g = h @ inv @ h.conj().T
        return cap, 0.5 * (g + g.conj().T)

    rng = _rng(cfg, 0xCA)
    starts = [np.zeros((n, n), dtype=complex)]
    while len(starts) < cfg.restarts:
        starts.append(feasible_project(_random_cov(rng, n, power)))

    best = 0.0
    for s0 in starts[: cfg.restarts]:
        s = s0.copy()
        val, _ = value_grad(s)
        step = power
        for _ in range(cfg.max_iters):
            _, g = value_grad(s)
            gnorm = float(np.linalg.norm(g))
            if gnorm < 1e-12:
                break
            tau = step / gnorm
            improved = False
            for _ in range(8):
                cand = feasible_project(s + tau * g)
                val_c, _ = value_grad(cand)
                if val_c > val + 1e-14:
                    s, val = cand, val_c
                    step = tau * gnorm * 1.5
                    improved = True
                    break
                tau *= 0.3
            if not improved:
                step *= 0.3
                if step < 1e-12 * power:
                    break
        best = max(best, val)
    return best


def finite_diff_grad(f, x, h):
    """Central-difference gradient estimate of ``f`` at ``x``.

    Falls back to a forward difference on coordinates where a backward
    step would leave the nonnegative domain.
    """
    x = np.asarray(x, dtype=float)
    steps = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    out = np.empty_like(x)
    for i in range(x.size):
        hi = float(steps[i])
        e = np.zeros_like(x)
        e[i] = hi
        if x[i] - hi >= 0:
            out[i] = (f(x + e) - f(x - e)) / (2 * hi)
        else:
            out[i] = (f(x + e) - f(x)) / hi
    return out
