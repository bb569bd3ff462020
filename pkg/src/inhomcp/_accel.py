"""JIT switch for the hot kernels.

Set ``INHOMCP_DISABLE_JIT=1`` to run every kernel as plain Python/NumPy.
Both paths consume the random stream identically, so results are
bit-for-bit the same; only speed differs.
"""
import os

_FLAG = os.environ.get("INHOMCP_DISABLE_JIT", "").strip().lower()

JIT_ENABLED = _FLAG not in ("1", "true", "yes", "on")

if JIT_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False


def kernel(fn):
    """Compile ``fn`` with numba unless the fallback path was requested."""
    if JIT_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    return fn


def backend_name():
    return "numba" if JIT_ENABLED else "python"
