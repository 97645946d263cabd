"""Hot-kernel backend selection.

The compiled extension (``_core``) is preferred when importable; otherwise
the pure-numpy reference backend is used. Selection can be forced with the
``COBA_BACKEND`` environment variable (``auto`` | ``cython`` | ``numpy``).
Both backends implement the same functions with identical semantics; see
``benchmarks/bench_kernels.py`` for a speed comparison.
"""

import os

from . import numpy_backend

_requested = os.environ.get("COBA_BACKEND", "auto").lower()
if _requested not in ("auto", "cython", "numpy"):
    raise RuntimeError(f"COBA_BACKEND must be auto|cython|numpy, got {_requested!r}")

_impl = None
if _requested in ("auto", "cython"):
    try:
        from . import _core as _impl
    except ImportError:
        if _requested == "cython":
            raise
        _impl = None

if _impl is not None:
    BACKEND = "cython"
    conv1d_forward = _impl.conv1d_forward
    conv1d_backward = _impl.conv1d_backward
    lstm_forward = _impl.lstm_forward
    lstm_backward = _impl.lstm_backward
else:
    BACKEND = "numpy"
    conv1d_forward = numpy_backend.conv1d_forward
    conv1d_backward = numpy_backend.conv1d_backward
    lstm_forward = numpy_backend.lstm_forward
    lstm_backward = numpy_backend.lstm_backward

def blas_single_thread():
    """Context manager capping BLAS pools at one thread.

    The kernels here issue many small matrix products; multi-threaded BLAS
    spends more time waking workers than computing (numpy and the compiled
    extension each carry their own OpenBLAS pool). No-op when threadpoolctl
    is unavailable.
    """
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        import contextlib
        return contextlib.nullcontext()
    return threadpool_limits(limits=1, user_api="blas")


__all__ = [
    "BACKEND",
    "blas_single_thread",
    "conv1d_forward",
    "conv1d_backward",
    "lstm_forward",
    "lstm_backward",
    "numpy_backend",
]
