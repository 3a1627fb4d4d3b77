"""Kernel backend selection.

The compiled extension (``secrecap._core``) is preferred; the pure-numpy
fallback (``secrecap._core_py``) is used when the extension is missing or
when ``SECRECAP_BACKEND=python`` is set.  ``SECRECAP_BACKEND=compiled``
demands the extension and raises if it cannot be imported.
"""

import os

_choice = os.environ.get("SECRECAP_BACKEND", "").strip().lower()

if _choice in ("python", "py"):
    from . import _core_py as impl
elif _choice in ("compiled", "c"):
    from . import _core as impl  # noqa: F401  (raises if not built)
else:
    try:
        from . import _core as impl
    except ImportError:
        from . import _core_py as impl

COMPILED = bool(impl.COMPILED)

eigh_desc = impl.eigh_desc
logdet_ipsr = impl.logdet_ipsr
solve_cr_dual = impl.solve_cr_dual
dual_oracle = impl.dual_oracle
STATUS_CONVERGED = impl.STATUS_CONVERGED
STATUS_MAX_ITER = impl.STATUS_MAX_ITER


def name():
    """Human-readable backend name, recorded in run manifests."""
    return "compiled" if COMPILED else "python"


def load_impl(kind):
    """Load a specific backend module ("compiled" or "python"), for tests
    and benchmarks that compare the two."""
    if kind == "python":
        from . import _core_py

        return _core_py
    if kind == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend kind: {kind!r}")
