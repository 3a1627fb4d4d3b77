"""Secrecy capacity solvers.

The non-convex secrecy problem

    maximize_S  min_i  log det(I + H^H S H) - (leakage to eavesdropper i)
    subject to  tr(S) <= P

is solved through its equivalent fractional program over interference caps:
``max over caps of min_i g(caps) / den_i(cap_i)`` where ``g`` is the
determinant-scale spectrum-sharing capacity (concave in the caps, computed
by :mod:`secrecap.cr`) and the denominators are ``1 + cap_i / sigma_i^2``
for single-antenna eavesdroppers or ``(1 + cap_i / L)^L`` with
``L = min(Ne, N)`` for the multi-antenna lower bound.  That ratio program
is quasi-concave, so a bisection on the level ``t`` reduces it to convex
feasibility problems; each feasibility problem is decided either by an
explicit cap witness (found by concave max-min ascent, using the capacity
gradient from the dual multipliers) or by a dual certificate ``nu`` on the
unit simplex whose value ``f0(nu)`` is certified negative.

Eavesdropper channels are scaled by their noise standard deviations on the
way in, so all internal formulas are unit-noise; reported leakages and cap
witnesses are converted back to raw units.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .cr import _PreparedCr
from .linalg import as_complex_matrix, logdet_capacity, trace_ball_project

DEFAULT_EPS_RATE = 1e-3
DEFAULT_CR_TOL = 1e-6


class SolverError(RuntimeError):
    """A feasibility or ascent subproblem failed to reach a verdict."""


@dataclass(frozen=True)
class SecrecyProblem:
    """A secrecy transmission instance.

    Attributes
    ----------
    H : (N, M) complex
        Channel to the legitimate receiver.
    eavesdroppers : tuple of arrays
        Either all (N,) vectors (single-antenna mode) or all (N, Ne)
        matrices (multi-antenna mode).
    noise_vars : array
        Noise variances: shape (K,) for one variance per eavesdropper, or
        (K, Ne) per-antenna in matrix mode.
    power : float
        Transmit power budget (> 0, linear scale).
    """

    H: np.ndarray
    eavesdroppers: tuple
    noise_vars: np.ndarray
    power: float

    def __post_init__(self):
        h = as_complex_matrix(self.H, "H")
        eavs = tuple(np.asarray(e, dtype=complex) for e in self.eavesdroppers)
        if not eavs:
            raise ValueError("at least one eavesdropper is required")
        modes = {e.ndim for e in eavs}
        if len(modes) != 1 or modes - {1, 2}:
            raise ValueError("eavesdroppers must be all vectors or all matrices")
        for e in eavs:
            if e.shape[0] != h.shape[0]:
                raise ValueError("eavesdropper dimension does not match H")
        nv = np.asarray(self.noise_vars, dtype=float)
        if nv.ndim == 0:
            nv = np.full(len(eavs), float(nv))
        if nv.shape[0] != len(eavs) or np.any(nv <= 0):
            raise ValueError("noise_vars must be positive, one (row) per eavesdropper")
        if not self.power > 0:
            raise ValueError("power budget must be positive")
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "eavesdroppers", eavs)
        object.__setattr__(self, "noise_vars", nv)

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def m(self):
        return self.H.shape[1]

    @property
    def k(self):
        return len(self.eavesdroppers)

    @property
    def matrix_mode(self):
        return self.eavesdroppers[0].ndim == 2

    def scaled_eavesdroppers(self):
        """Eavesdropper channels scaled to unit noise (columns / sigma)."""
        out = []
        for i, e in enumerate(self.eavesdroppers):
            nv = self.noise_vars[i]
            if e.ndim == 1:
                out.append(e / math.sqrt(float(np.asarray(nv).reshape(-1)[0])))
            else:
                sig = np.sqrt(np.broadcast_to(np.atleast_1d(nv), (e.shape[1],)))
                out.append(e / sig[np.newaxis, :])
        return out


@dataclass(frozen=True)
class SecrecySolution:
    """Solution of a secrecy instance.

    ``secrecy_rate`` is in nats; ``t_star`` is the converged level in
    determinant scale (log t_star tracks the rate to within the bisection
    tolerance).  ``gamma_star`` holds the received interference powers
    h_i^H S h_i in raw units and ``per_eav_leakage`` the corresponding
    per-eavesdropper mutual informations.  ``condition_residual`` (single
    eavesdropper) and ``eig_ratio`` (MISO) are solver diagnostics.
    """

    S: np.ndarray
    secrecy_rate: float
    t_star: float
    gamma_star: np.ndarray
    per_eav_leakage: np.ndarray
    iterations: int
    condition_residual: float = float("nan")
    eig_ratio: float = float("nan")


@dataclass(frozen=True)
class FeasibilityOutcome:
    """Verdict of one level-feasibility test.

    Exactly one of ``witness`` (cap values proving feasibility, raw units)
    and ``certificate`` (simplex weights with certified f0 < 0) is set.
    """

    feasible: bool
    f0_value: float
    witness: np.ndarray = None
    certificate: np.ndarray = None


@dataclass(frozen=True)
class BoundsResult:
    """Lower bound, achievable rate and upper bound (nats) for the
    multi-antenna-eavesdropper case, plus the covariance behind the lower
    bound."""

    lower_bound: float
    achievable_rate: float
    upper_bound: float
    S_lower: np.ndarray


def secrecy_rate(s, problem):
    """Worst-case secrecy rate of covariance ``s`` for ``problem`` (nats).

    May be negative for a poorly chosen covariance.
    """
    s = as_complex_matrix(s, "covariance")
    if s.shape != (problem.n, problem.n):
        raise ValueError("covariance shape does not match the problem")
    cap = logdet_capacity(problem.H, s)
    worst = math.inf
    for e in problem.scaled_eavesdroppers():
        if e.ndim == 1:
            leak = math.log1p(max(float((e.conj() @ s @ e).real), 0.0))
        else:
            leak = logdet_capacity(e, s)
        worst = min(worst, cap - leak)
    return worst


# ---------------------------------------------------------------------------
# level bisection machinery
# ---------------------------------------------------------------------------


class _LevelSearch:
    """Bisection on the ratio level with certificate-checked feasibility.

    Works in unit-noise (scaled) cap coordinates.  ``den_pows`` holds the
    exponent L_i of each denominator (1 + cap/L)^L; L_i = 1 reproduces the
    single-antenna 1 + cap form.
    """

    def __init__(self, core, den_pows, cr_tol=DEFAULT_CR_TOL):
        self.core = core
        self.L = np.asarray(den_pows, dtype=float)
        self.k = core.k
        self.cr_tol = cr_tol
        # the weighted objective is constant or decreasing in any cap beyond
        # the largest achievable leakage, so the search box stays strictly
        # inside that boundary, where the capacity multipliers (and with
        # them the certificate gradients) are informative
        self.hard_hi = core.leak_scale * (1.0 - 1e-9)
        self.lo_box = np.where(core.leak_scale > 0, 1e-9 * core.leak_scale, 0.0)
        self.hard_hi = np.maximum(self.hard_hi, self.lo_box)
        self.warm = None
        self.witness_gamma = None
        self.nu_warm = None
        self.max_feasible = -math.inf
        self.min_infeasible = math.inf
        self.solves = 0
        self.checks = 0
        # endpoints of the level interval
        sol_bar = self._solve(None)
        self.log_tbar = sol_bar.capacity
        self.sol_bar = sol_bar
        sol0 = self._solve(self.lo_box)
        self.log_g0 = sol0.capacity
        self.sol0 = sol0

    # -- capacity evaluations -------------------------------------------

    def _solve(self, gamma):
        self.solves += 1
        sol = self.core.solve(
            limits=gamma, warm=self.warm, tol=self.cr_tol, polish=False
        )
        self.warm = (sol.dual_power, sol.dual_it)
        return sol

    def _logden(self, gamma):
        return self.L * np.log1p(gamma / self.L)

    def _den(self, gamma):
        return np.exp(self._logden(gamma))

    def _dden(self, gamma):
        return np.exp((self.L - 1.0) * np.log1p(gamma / self.L))

    # -- inner maximization (weighted dual objective) ---------------------

    def _witness_tol(self, dens):
        return 1e-8 * (1.0 + float(np.max(dens)))

    def _try_witness(self, sol, log_t):
        """Witness test on the achieved leakages of a solve.

        Shrinking the cap candidate to the leakage actually received can
        only increase every slack, so it is always tested in place of the
        search point itself.
        """
        leaks = np.maximum(sol.leaks, 0.0)
        ratio = math.exp(sol.capacity - log_t)
        dens = self._den(leaks)
        slacks = ratio - dens
        if float(np.min(slacks)) >= -self._witness_tol(dens):
            return leaks, sol, slacks
        return None

    def _f0_pga(self, log_t, nu, gamma0, iters=60, grad_rtol=1e-6,
                want_witness=True):
        """Maximize ratio(caps) - sum(nu_i den_i(cap_i)) over the cap box.

        Projected gradient ascent with backtracking; the capacity gradient
        comes from the interference multipliers of each solve.  Returns
        (f0_low, f0_up, gamma_hat, witness) where f0_low is achieved,
        f0_up bounds the true maximum from above (used by infeasibility
        certificates), and witness is a feasibility witness if one was
        encountered along the way.
        """
        lo, hi = self.lo_box, self.hard_hi
        nu = np.asarray(nu, dtype=float)
        gamma = np.clip(np.asarray(gamma0, dtype=float), lo, hi)

        def value(sol, g):
            return math.exp(sol.capacity - log_t) - 1.0 - float(
                nu @ (self._den(g) - 1.0)
            )

        sol = self._solve(gamma)
        if want_witness:
            wit = self._try_witness(sol, log_t)
            if wit is not None:
                return 0.0, math.inf, gamma, wit
        val = value(sol, gamma)
        step = 1.0 + float(np.max(hi - lo))
        for _ in range(iters):
            ratio = math.exp(sol.capacity - log_t)
            grad = ratio * sol.dual_it - nu * self._dden(gamma)
            direction = grad.copy()
            direction[(gamma <= lo + 1e-15) & (direction < 0)] = 0.0
            direction[(gamma >= hi - 1e-15) & (direction > 0)] = 0.0
            gnorm = float(np.linalg.norm(direction))
            if gnorm <= grad_rtol * (1.0 + abs(val)):
                break
            improved = False
            tau = step / gnorm
            for _ in range(7):
                cand = np.clip(gamma + tau * direction, lo, hi)
                sol_c = self._solve(cand)
                if want_witness:
                    wit = self._try_witness(sol_c, log_t)
                    if wit is not None:
                        return 0.0, math.inf, cand, wit
                val_c = value(sol_c, cand)
                if val_c > val + 1e-15:
                    gamma, sol, val = cand, sol_c, val_c
                    step = tau * gnorm * 1.6
                    improved = True
                    break
                tau *= 0.25
            if not improved:
                step *= 0.25
                if step < 1e-13:
                    break
        # concavity bound: f0 <= value + sup over the box of <grad, . - x>,
        # with the capacity taken at its dual (upper) estimate
        ratio_up = math.exp(sol.capacity + max(sol.gap, 0.0) - log_t)
        val_up = ratio_up - 1.0 - float(nu @ (self._den(gamma) - 1.0))
        grad = ratio_up * sol.dual_it - nu * self._dden(gamma)
        excess = float(
            np.sum(np.maximum(grad * (hi - gamma), grad * (lo - gamma)))
        )
        return val, val_up + max(excess, 0.0), gamma, None

    # -- outer minimization over the simplex ------------------------------

    def _certificate_tol(self, log_t):
        return 1e-10 * (1.0 + math.exp(min(self.log_tbar - log_t, 60.0)))

    def _nu_minimize(self, log_t, gamma0, nodes, iters, grad_rtol):
        """Minimize f0 over simplex weights, stopping at the first witness
        or certified-negative value.  Returns (feasible, witness, nu, f0)
        or None when inconclusive within the budget."""
        k = self.k
        tol_c = self._certificate_tol(log_t)
        gamma = np.asarray(gamma0, dtype=float)
        best_up = math.inf
        best_nu = None

        def probe(nu):
            nonlocal gamma, best_up, best_nu
            low, up, gamma, wit = self._f0_pga(
                log_t, nu, gamma, iters=iters, grad_rtol=grad_rtol
            )
            if wit is not None:
                return (True, wit, None, 0.0)
            if up < best_up:
                best_up, best_nu = up, np.asarray(nu, dtype=float)
            if up < -tol_c:
                return (False, None, np.asarray(nu, dtype=float), up)
            return None

        if k == 1:
            return probe(np.ones(1))

        start = self.nu_warm if self.nu_warm is not None else np.full(k, 1.0 / k)
        out = probe(start)
        if out is not None:
            return out

        if k == 2:
            # f0 is convex on the segment; bisect on the sign of the
            # derivative d f0 / d nu_1 = den_2(cap_2) - den_1(cap_1)
            v_lo, v_hi = 0.0, 1.0
            for _ in range(nodes):
                v = 0.5 * (v_lo + v_hi)
                out = probe(np.array([v, 1.0 - v]))
                if out is not None:
                    return out
                dens = self._den(gamma)
                if dens[1] - dens[0] > 0.0:
                    v_hi = v
                else:
                    v_lo = v
            return None

        # K >= 3: cutting-plane (ellipsoid) on the reduced simplex coords
        ndim = k - 1
        x = np.full(ndim, 1.0 / k)
        e = np.eye(ndim) * float(ndim)
        for _ in range(nodes):
            ssum = float(np.sum(x))
            if np.any(x < 0.0):
                j = int(np.argmin(x))
                cut = np.zeros(ndim)
                cut[j] = -1.0
            elif ssum > 1.0:
                cut = np.ones(ndim)
            else:
                out = probe(np.concatenate([x, [1.0 - ssum]]))
                if out is not None:
                    return out
                dens = self._den(gamma) - 1.0
                cut = -(dens[:ndim] - dens[ndim])
                if float(np.linalg.norm(cut)) <= 1e-14:
                    break
            eg = e @ cut
            denom = float(cut @ eg)
            if not np.isfinite(denom) or denom <= 0.0:
                break
            eg /= math.sqrt(denom)
            x = x - eg / (ndim + 1.0)
            if ndim == 1:
                e = e * 0.25
            else:
                e = (ndim * ndim / (ndim * ndim - 1.0)) * (
                    e - (2.0 / (ndim + 1.0)) * np.outer(eg, eg)
                )
                e = 0.5 * (e + e.T)
            if float(np.max(np.diag(e))) < 1e-24:
                break
        return None

    # -- the feasibility test ---------------------------------------------

    def check(self, log_t):
        """Decide feasibility of level exp(log_t); returns the raw pieces
        (feasible, witness_tuple_or_None, nu_or_None, f0_norm)."""
        self.checks += 1
        if log_t <= self.log_g0 + 1e-15:
            wit = self._try_witness(self.sol0, log_t)
            if wit is not None:
                return True, wit, None, float(np.min(wit[2]))
        if log_t > self.log_tbar:
            return False, None, np.full(self.k, 1.0 / self.k), (
                math.exp(self.log_tbar - log_t) - 1.0
            )
        # cheap probe: does the previous witness still work at this level?
        gamma0 = self.witness_gamma if self.witness_gamma is not None \
            else self.lo_box
        sol = self._solve(np.maximum(gamma0, self.lo_box))
        wit = self._try_witness(sol, log_t)
        if wit is None:
            out = self._nu_minimize(log_t, gamma0, nodes=24, iters=60,
                                    grad_rtol=1e-6)
            if out is None:
                # tightened retry: high-accuracy solves, tight ascent
                saved_tol = self.cr_tol
                self.cr_tol = min(saved_tol, 1e-9)
                try:
                    out = self._nu_minimize(log_t, gamma0, nodes=60,
                                            iters=500, grad_rtol=1e-10)
                finally:
                    self.cr_tol = saved_tol
            if out is None:
                raise SolverError(
                    f"feasibility undecided at level log t = {log_t:.6g}"
                )
            feasible, wit, nu, f0 = out
            if not feasible:
                if log_t <= self.max_feasible:
                    raise SolverError(
                        "feasibility contradiction: certificate below a "
                        "witness level"
                    )
                self.min_infeasible = min(self.min_infeasible, log_t)
                self.nu_warm = nu
                return False, None, nu, f0
        if log_t >= self.min_infeasible:
            raise SolverError(
                "feasibility contradiction: witness above a certificate level"
            )
        self.max_feasible = max(self.max_feasible, log_t)
        self.witness_gamma = wit[0].copy()
        return True, wit, None, float(np.min(wit[2]))

    def run(self, eps_rate):
        """Bisection; returns (log_lo, log_hi, witness_gamma, witness_sol)."""
        lo, hi = self.log_g0, self.log_tbar
        wit_gamma, wit_sol = self.lo_box.copy(), self.sol0
        while hi - lo > eps_rate:
            mid = 0.5 * (lo + hi)
            feasible, wit, _, _ = self.check(mid)
            if feasible:
                lo = mid
                wit_gamma, wit_sol = wit[0], wit[1]
            else:
                hi = mid
        return lo, hi, wit_gamma, wit_sol


def _vector_core(problem):
    scaled = problem.scaled_eavesdroppers()
    return _PreparedCr(problem.H, scaled, problem.power)


def _solution_from_witness(problem, sol, log_lo, checks, **extra):
    s = sol.S
    cap = sol.capacity
    scaled_leaks = np.maximum(sol.leaks, 0.0)
    leak_logs = np.log1p(scaled_leaks)
    rate = float(cap - np.max(leak_logs))
    sigma = np.asarray(problem.noise_vars, dtype=float).reshape(-1)
    return SecrecySolution(
        S=s,
        secrecy_rate=rate,
        t_star=math.exp(log_lo),
        gamma_star=sigma * scaled_leaks,
        per_eav_leakage=leak_logs,
        iterations=checks,
        **extra,
    )


def secrecy_capacity(problem, eps_rate=DEFAULT_EPS_RATE, cr_tol=DEFAULT_CR_TOL):
    """Secrecy capacity with any number of single-antenna eavesdroppers.

    Level bisection on the equivalent ratio program; the returned rate is
    within ``eps_rate`` nats of the optimum.
    """
    if problem.matrix_mode:
        raise ValueError("single-antenna eavesdroppers required; use secrecy_bounds")
    core = _vector_core(problem)
    ls = _LevelSearch(core, np.ones(problem.k), cr_tol=cr_tol)
    lo, hi, wit_gamma, wit_sol = ls.run(eps_rate)
    return _solution_from_witness(problem, wit_sol, lo, ls.checks)


def level_feasible(t, problem, tol=DEFAULT_CR_TOL):
    """Feasibility of ratio level ``t`` (determinant scale) for the secrecy
    ratio program; returns a FeasibilityOutcome with a cap witness (raw
    noise units) or a simplex certificate."""
    if problem.matrix_mode:
        raise ValueError("single-antenna eavesdroppers required")
    if t <= 0:
        raise ValueError("level must be positive")
    core = _vector_core(problem)
    ls = _LevelSearch(core, np.ones(problem.k), cr_tol=tol)
    feasible, wit, nu, f0 = ls.check(math.log(t))
    sigma = np.asarray(problem.noise_vars, dtype=float).reshape(-1)
    if feasible:
        return FeasibilityOutcome(
            feasible=True, f0_value=t * f0, witness=sigma * wit[0]
        )
    return FeasibilityOutcome(feasible=False, f0_value=t * f0, certificate=nu)


def secrecy_capacity_single(problem, eps_rate=DEFAULT_EPS_RATE,
                            cr_tol=DEFAULT_CR_TOL):
    """Secrecy capacity for exactly one single-antenna eavesdropper.

    Bisects the cap value on the sign of the ratio derivative (through the
    dual multiplier of the interference constraint), avoiding the level
    feasibility machinery entirely.
    """
    if problem.matrix_mode or problem.k != 1:
        raise ValueError("exactly one single-antenna eavesdropper required")
    core = _vector_core(problem)
    sol_un = core.solve(None, tol=cr_tol)
    gamma_bar = max(float(sol_un.leaks[0]), 0.0)
    sigma2 = float(np.asarray(problem.noise_vars, dtype=float).reshape(-1)[0])

    def rate_of(sol):
        leak = max(float(sol.leaks[0]), 0.0)
        return float(sol.capacity - math.log1p(leak)), leak

    best_sol, best_rate = sol_un, rate_of(sol_un)[0]
    checks = 0
    residual = float("nan")
    if gamma_bar > 1e-14 * (1.0 + core.leak_scale[0]):
        lo_g, hi_g = 0.0, gamma_bar
        floor_g = 1e-9 * gamma_bar
        warm = None

        def condition(g):
            nonlocal best_sol, best_rate, warm, checks
            checks += 1
            sol = core.solve(np.array([max(g, floor_g)]), warm=warm, tol=cr_tol)
            warm = (sol.dual_power, sol.dual_it)
            r, _ = rate_of(sol)
            if r > best_rate:
                best_rate, best_sol = r, sol
            mu = float(sol.dual_it[0])
            return mu * (1.0 + max(g, floor_g)) - 1.0, sol

        d0, _ = condition(floor_g)
        if d0 > 0:
            while hi_g - lo_g > 1e-6 * gamma_bar:
                mid = 0.5 * (lo_g + hi_g)
                d, sol_mid = condition(mid)
                if d > 0:
                    lo_g = mid
                else:
                    hi_g = mid
            d_final, sol_final = condition(0.5 * (lo_g + hi_g))
            mu = float(sol_final.dual_it[0])
            g_val = math.exp(sol_final.capacity)
            gam = mu * g_val
            gstar = 0.5 * (lo_g + hi_g)
            residual = abs(gam * (1.0 + gstar) - g_val) / g_val
        else:
            residual = abs(d0)
    else:
        # eavesdropper decoupled from the transmit directions in use
        sol0 = core.solve(np.array([0.0]), tol=cr_tol)
        r0 = rate_of(sol0)[0]
        if r0 > best_rate:
            best_rate, best_sol = r0, sol0
        residual = 0.0
    return _solution_from_witness(
        problem, best_sol, best_rate, checks, condition_residual=residual
    )


# ---------------------------------------------------------------------------
# MISO (single-antenna receiver)
# ---------------------------------------------------------------------------


def _miso_max_slack(hs, eavs, t, power, s0, iters, grad_tol=1e-12):
    """Maximize min_i [1 + hs^H S hs - t (1 + h_i^H S h_i)] over the
    trace-capped PSD cone by restarted-Polyak supergradient ascent."""
    n = hs.shape[0]
    ghs = np.outer(hs, hs.conj())
    geav = [np.outer(e, e.conj()) for e in eavs]
    s = s0.copy() if s0 is not None else np.zeros((n, n), dtype=complex)

    def slacks(sm):
        main = 1.0 + float((hs.conj() @ sm @ hs).real)
        return np.array(
            [main - t * (1.0 + float((e.conj() @ sm @ e).real)) for e in eavs]
        )

    sl = slacks(s)
    best_val = float(np.min(sl))
    best_s = s.copy()
    delta = max(0.3 * (abs(best_val) + 1e-3 * t), 1e-9 * t)
    since_improve = 0
    for _ in range(iters):
        j = int(np.argmin(sl))
        g = ghs - t * geav[j]
        gnorm2 = float(np.sum(np.abs(g) ** 2))
        if gnorm2 <= grad_tol:
            break
        target = best_val + delta
        eta = (target - float(np.min(sl))) / gnorm2
        s = trace_ball_project(s + eta * g, power)
        sl = slacks(s)
        val = float(np.min(sl))
        if val > best_val + 1e-15:
            if val > best_val + 0.2 * delta:
                since_improve = 0
            best_val, best_s = val, s.copy()
        since_improve += 1
        if since_improve >= 40:
            delta *= 0.5
            since_improve = 0
            s = best_s.copy()
            sl = slacks(s)
            if delta < 1e-14 * (1.0 + t):
                break
    return best_val, best_s


def secrecy_capacity_miso(problem, eps_rate=DEFAULT_EPS_RATE):
    """Secrecy capacity for a single-antenna legitimate receiver (M = 1).

    Bisection on the ratio level; each feasibility test maximizes the
    minimum linear slack over the trace-capped PSD cone by projected
    supergradient ascent.  The converged covariance is reported together
    with its second-to-first eigenvalue ratio (the optimum is rank one,
    which is verified rather than imposed).
    """
    if problem.matrix_mode:
        raise ValueError("single-antenna eavesdroppers required")
    if problem.m != 1:
        raise ValueError("MISO solver requires a single receive antenna")
    hs = problem.H[:, 0]
    eavs = problem.scaled_eavesdroppers()
    power = problem.power
    hs_gain = float((hs.conj() @ hs).real)
    log_hi = math.log1p(power * hs_gain)
    s_try = power * np.outer(hs, hs.conj()) / max(hs_gain, 1e-300)
    log_lo = max(0.0, secrecy_rate(s_try, problem))
    s_warm = s_try
    tol_width = min(eps_rate, 1e-7 * (1.0 + log_hi))
    checks = 0
    while log_hi - log_lo > tol_width:
        mid = 0.5 * (log_lo + log_hi)
        t = math.exp(mid)
        checks += 1
        val, s_best = _miso_max_slack(hs, eavs, t, power, s_warm, iters=400)
        if val >= -1e-9 * (1.0 + t):
            log_lo = mid
            s_warm = s_best
        else:
            log_hi = mid
    # final high-accuracy ascent just above the converged level pins the
    # (unique) maximizer next to the optimal rank-one covariance
    _, s_final = _miso_max_slack(
        hs, eavs, math.exp(log_hi), power, s_warm, iters=4000
    )
    if secrecy_rate(s_final, problem) < secrecy_rate(s_warm, problem):
        s_final = s_warm
    w = np.linalg.eigvalsh(s_final)
    ratio = float(w[-2] / w[-1]) if w[-1] > 1e-14 * (1.0 + power) else 0.0
    scaled_leaks = np.array(
        [max(float((e.conj() @ s_final @ e).real), 0.0) for e in eavs]
    )
    sigma = np.asarray(problem.noise_vars, dtype=float).reshape(-1)
    rate = secrecy_rate(s_final, problem)
    return SecrecySolution(
        S=s_final,
        secrecy_rate=rate,
        t_star=math.exp(log_lo),
        gamma_star=sigma * scaled_leaks,
        per_eav_leakage=np.log1p(scaled_leaks),
        iterations=checks,
        eig_ratio=max(ratio, 0.0),
    )


# ---------------------------------------------------------------------------
# multi-antenna eavesdroppers: bounds
# ---------------------------------------------------------------------------


def secrecy_lower_bound(problem, eps_rate=DEFAULT_EPS_RATE,
                        cr_tol=DEFAULT_CR_TOL):
    """Lower bound on the secrecy capacity with multi-antenna eavesdroppers.

    Replaces each per-eavesdropper log-det leakage by its trace-constrained
    envelope (1 + cap/L)^L, L = min(Ne, N), and runs the level bisection
    with trace interference constraints.  Returns (bound_nats, S).
    """
    if not problem.matrix_mode:
        raise ValueError("matrix-mode eavesdroppers required")
    scaled = problem.scaled_eavesdroppers()
    core = _PreparedCr(problem.H, scaled, problem.power)
    pows = np.array([min(e.shape[1], problem.n) for e in scaled], dtype=float)
    ls = _LevelSearch(core, pows, cr_tol=cr_tol)
    lo, hi, wit_gamma, wit_sol = ls.run(eps_rate)
    return lo, wit_sol.S


def secrecy_upper_bound(problem, eps_rate=DEFAULT_EPS_RATE,
                        cr_tol=DEFAULT_CR_TOL):
    """Upper bound: treat every eavesdropper antenna as an independent
    single-antenna eavesdropper and solve that (easier) secrecy problem."""
    if not problem.matrix_mode:
        raise ValueError("matrix-mode eavesdroppers required")
    cols = []
    for e in problem.scaled_eavesdroppers():
        for j in range(e.shape[1]):
            cols.append(e[:, j])
    expanded = SecrecyProblem(
        H=problem.H,
        eavesdroppers=tuple(cols),
        noise_vars=np.ones(len(cols)),
        power=problem.power,
    )
    return secrecy_capacity(expanded, eps_rate=eps_rate, cr_tol=cr_tol).secrecy_rate


def secrecy_bounds(problem, eps_rate=DEFAULT_EPS_RATE, cr_tol=DEFAULT_CR_TOL):
    """Lower bound, achievable rate and upper bound for matrix-mode
    eavesdroppers; lower <= achievable <= upper up to the bisection
    tolerances."""
    lower, s_low = secrecy_lower_bound(problem, eps_rate, cr_tol)
    achievable = secrecy_rate(s_low, problem)
    upper = secrecy_upper_bound(problem, eps_rate, cr_tol)
    return BoundsResult(
        lower_bound=lower,
        achievable_rate=achievable,
        upper_bound=upper,
        S_lower=s_low,
    )
