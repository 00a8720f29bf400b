"""Select the compiled core if available, else the pure-Python fallback.

Set EMPIRES_FORCE_PYTHON=1 to skip the compiled extension (useful for
benchmarking the two backends against each other).
"""

from __future__ import annotations

import os

if os.environ.get("EMPIRES_FORCE_PYTHON"):
    from . import _core_py as core
else:
    try:
        from . import _speedups as core  # type: ignore[no-redef]
    except ImportError:
        from . import _core_py as core  # type: ignore[no-redef]


def backend_name() -> str:
    """'compiled' or 'python', whichever is active."""
    return core.BACKEND_NAME


def get_backend(name: str | None = None):
    """Return a core module by name ('compiled', 'python', or None=active)."""
    if name is None:
        return core
    if name == "python":
        from . import _core_py
        return _core_py
    if name == "compiled":
        from . import _speedups  # raises ImportError if not built
        return _speedups
    raise ValueError(f"unknown backend {name!r}")
