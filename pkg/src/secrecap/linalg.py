"""Complex Hermitian matrix primitives shared by all solvers.

Everything here is a pure function of its arguments; matrices are plain
``numpy`` arrays (complex128) and are never mutated.  Rates are natural
logarithms (nats) throughout the package; conversion to bits happens only
at the reporting layer.
"""

from typing import NamedTuple

import numpy as np

from . import backend

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-9


class EigDecomposition(NamedTuple):
    """Eigenvalues (real, descending) and eigenvectors (unitary columns)."""

    values: np.ndarray
    vectors: np.ndarray


def as_complex_matrix(a, name="matrix"):
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def hermitian_defect(a):
    """max |A - A^H| entrywise; 0 for exactly Hermitian input."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def require_hermitian(a, rtol=HERMITIAN_RTOL, name="matrix"):
    """Validate Hermitian symmetry and return the symmetrized copy.

    The tolerance is relative: defect <= rtol * (1 + max|A|).
    """
    a = as_complex_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    scale = 1.0 + (float(np.max(np.abs(a))) if a.size else 0.0)
    if hermitian_defect(a) > rtol * scale:
        raise ValueError(f"{name} is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def min_eigenvalue(a):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(a)[0])


def require_psd(a, rtol=PSD_RTOL, name="matrix"):
    """Validate positive semidefiniteness: min eig >= -rtol * (1 + trace)."""
    a = require_hermitian(a, name=name)
    tr = float(np.trace(a).real)
    if min_eigenvalue(a) < -rtol * (1.0 + abs(tr)):
        raise ValueError(f"{name} is not positive semidefinite within tolerance")
    return a


def eigh(a):
    """Hermitian eigendecomposition with descending eigenvalues.

    Contract (both backends): reconstruction error ||A - U diag(w) U^H||_F
    <= 1e-9 * (1 + ||A||_F) and ||U^H U - I||_F <= 1e-9.
    """
    a = require_hermitian(a)
    w, u = backend.eigh_desc(a)
    return EigDecomposition(w, u)


def logdet_capacity(h, s):
    """log det(I + H^H S H) in nats, for channel H (N x M) and covariance S.

    Evaluated through the eigenvalues of the Hermitian product for
    stability; S = 0 gives exactly 0.
    """
    h = as_complex_matrix(h, "channel")
    s = as_complex_matrix(s, "covariance")
    if s.shape[0] != s.shape[1] or s.shape[0] != h.shape[0]:
        raise ValueError(
            f"dimension mismatch: channel {h.shape} vs covariance {s.shape}"
        )
    m = h.conj().T @ s @ h
    m = 0.5 * (m + m.conj().T)
    w = np.linalg.eigvalsh(m)
    # eigenvalues are >= 0 up to rounding for PSD S
    return float(np.sum(np.log1p(np.maximum(w, -0.5))))


def whiten_inv_sqrt(a, floor=None):
    """Inverse square root A_f^{-1/2} with eigenvalues floored at ``floor``.

    ``floor`` defaults to 1e-10 * (1 + max eigenvalue); the flooring keeps
    the whitening well defined when the dual matrix is singular.
    """
    a = require_hermitian(a)
    w, u = backend.eigh_desc(a)
    if floor is None:
        floor = 1e-10 * (1.0 + max(float(w[0]), 0.0))
    if floor <= 0.0:
        raise ValueError("floor must be positive")
    w = np.maximum(w, floor)
    return (u * (1.0 / np.sqrt(w))) @ u.conj().T


def penalized_waterfill(gains):
    """Maximizer of sum(log(1 + g_k p_k)) - sum(p_k) over p >= 0.

    Closed form p_k = max(0, 1 - 1/g_k); gains must be finite and >= 0.
    """
    g = np.asarray(gains, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("gains must be finite and nonnegative")
    with np.errstate(divide="ignore"):
        p = 1.0 - 1.0 / g
    return np.where(g > 1.0, p, 0.0)


def waterfill_budget(gains, total):
    """Power allocation maximizing sum(log(1 + g_k p_k)) with sum(p) <= total.

    Returns (p, level) where ``level`` is the water level 1/lambda of the
    binding power constraint (inf when all gains are zero and p = 0).
    """
    g = np.asarray(gains, dtype=float)
    if total < 0:
        raise ValueError("power budget must be nonnegative")
    p = np.zeros_like(g)
    pos = g > 0
    if total == 0 or not np.any(pos):
        return p, np.inf
    inv = 1.0 / g[pos]
    order = np.argsort(inv)
    inv_sorted = inv[order]
    # fill channels in order of increasing noise-to-gain
    k_active = inv_sorted.size
    csum = np.cumsum(inv_sorted)
    for k in range(1, inv_sorted.size + 1):
        level = (total + csum[k - 1]) / k
        if k < inv_sorted.size and level > inv_sorted[k]:
            continue
        k_active = k
        break
    level = (total + csum[k_active - 1]) / k_active
    alloc = np.zeros_like(inv_sorted)
    alloc[:k_active] = level - inv_sorted[:k_active]
    undo = np.empty_like(alloc)
    undo[order] = alloc
    p[pos] = np.maximum(undo, 0.0)
    return p, float(level)


def psd_project(a):
    """Nearest (Frobenius) PSD matrix: clip negative eigenvalues."""
    a = 0.5 * (a + a.conj().T)
    w, u = np.linalg.eigh(a)
    w = np.maximum(w, 0.0)
    return (u * w) @ u.conj().T


def trace_ball_project(a, limit):
    """Exact Frobenius projection onto {S >= 0, tr(S) <= limit}.

    Both constraints are unitarily invariant, so the projection keeps the
    eigenvectors and projects the eigenvalues onto the simplex-capped cone.
    """
    a = 0.5 * (a + a.conj().T)
    w, u = np.linalg.eigh(a)
    w = np.maximum(w, 0.0)
    excess = w.sum() - limit
    if excess > 0:
        # shift eigenvalues down until the trace meets the budget
        ws = np.sort(w)[::-1]
        csum = np.cumsum(ws)
        kk = np.arange(1, ws.size + 1)
        tau = (csum - limit) / kk
        valid = tau <= ws
        t = tau[valid][-1] if np.any(valid) else (w.sum() - limit) / w.size
        w = np.maximum(w - max(t, 0.0), 0.0)
    return (u * w) @ u.conj().T
