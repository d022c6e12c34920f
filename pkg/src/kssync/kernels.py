"""Kernel backend selection.

The compiled extension is preferred when importable, with a numpy fallback
otherwise.  Set KSSYNC_KERNELS=python or =cython to force one; forcing the
compiled backend when it is unavailable raises at import.
"""

import os

_requested = os.environ.get("KSSYNC_KERNELS", "").strip().lower()

if _requested in ("python", "py", "numpy"):
    from . import _kernels_py as _impl

    BACKEND = "python"
elif _requested in ("cython", "cy", "compiled"):
    from . import _kernels_cy as _impl

    BACKEND = "cython"
elif _requested == "":
    try:
        from . import _kernels_cy as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"
else:
    raise ImportError(f"unknown KSSYNC_KERNELS value {_requested!r}")

convolve_hermitian = _impl.convolve_hermitian
master_rhs_kernel = _impl.master_rhs_kernel
euler_run = _impl.euler_run


def available_backends():
    """Names of the importable backends, compiled first when present."""
    names = []
    try:
        from . import _kernels_cy  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("python")
    return names
