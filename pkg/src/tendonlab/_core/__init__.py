"""Simulation kernel backends.

The compiled Cython kernel is used when available; the pure-Python fallback
is selected otherwise. Both implement the same functions over the packed
parameter layout and are kept bit-identical. Set TENDONLAB_BACKEND to
"python" or "compiled" to force one.
"""

import os

from . import _fallback

_requested = os.environ.get("TENDONLAB_BACKEND", "auto").strip().lower()

if _requested in ("auto", "compiled"):
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _fallback
        BACKEND = "python"
elif _requested == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    raise RuntimeError(f"unknown TENDONLAB_BACKEND {_requested!r}")

limb_rollout = _impl.limb_rollout
scene_rollout = _impl.scene_rollout


def available_backends():
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Fetch a specific backend module (for benchmarks and equality tests)."""
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
