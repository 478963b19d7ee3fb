"""Numba acceleration switch.

Hot numerical kernels (Jacobi sweeps, coordinate descent, the simulation
recursion) are written as plain Python loops and compiled with ``numba.njit``
when it is available.  Setting the environment variable
``KGRANGER_DISABLE_NUMBA=1`` (checked once at import) forces the pure
NumPy/Python fallback path; the same switch engages automatically when numba
is not installed.  ``benchmarks/accel_benchmark.py`` compares the two paths.
"""

from __future__ import annotations

import os


def _env_disabled() -> bool:
    return os.environ.get("KGRANGER_DISABLE_NUMBA", "").strip().lower() in {
        "1",
        "true",
        "yes",
        "on",
    }


if _env_disabled():
    _numba_njit = None
else:
    try:
        from numba import njit as _numba_njit
    except ImportError:  # pragma: no cover - numba is a hard dep, but be safe
        _numba_njit = None

#: True when compiled kernels are in use for this process.
NUMBA_ENABLED = _numba_njit is not None


def jit_compile(func):
    """Return a compiled version of ``func``, or ``None`` when disabled.

    Call sites keep the plain function around and dispatch explicitly::

        _kernel_jit = jit_compile(_kernel)

        def kernel(...):
            impl = _kernel_jit if _kernel_jit is not None else _kernel
            return impl(...)
    """
    if _numba_njit is None:
        return None
    return _numba_njit(cache=True)(func)
