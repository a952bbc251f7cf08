"""Backend selection for the loop-heavy kernels.

A few inner loops (Bargmann quadrature, cube sweeps over point sets) are
compiled with numba when it is available.  Set ``PSLAB_BACKEND=numpy`` to
force the pure-numpy fallbacks, ``PSLAB_BACKEND=numba`` to insist on the
compiled path, or leave it unset to use numba when it imports cleanly.
``PSLAB_THREADS`` caps the numba thread count.
"""

from __future__ import annotations

import os

try:
    import numba

    from numba import njit

    HAVE_NUMBA = True
    _cap = os.environ.get("PSLAB_THREADS", "").strip()
    if _cap:
        numba.set_num_threads(max(1, min(int(_cap), numba.config.NUMBA_NUM_THREADS)))
except ImportError:  # pragma: no cover - exercised only on numba-free installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """Stand-in decorator so kernel modules import without numba."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


_FORCED = os.environ.get("PSLAB_BACKEND", "auto").strip().lower()


def use_numba() -> bool:
    """True when the compiled kernels are active for this process."""
    if _FORCED == "numpy":
        return False
    if _FORCED == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("PSLAB_BACKEND=numba requested but numba is not importable")
        return True
    if _FORCED != "auto":
        raise ValueError(f"PSLAB_BACKEND must be auto, numpy, or numba, got {_FORCED!r}")
    return HAVE_NUMBA
