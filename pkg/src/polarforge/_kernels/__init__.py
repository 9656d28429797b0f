"""Backend selection for the hot merge loops.

The compiled Cython core is used when it imported cleanly; otherwise the
pure-Python reference takes over.  ``POLARFORGE_BACKEND=pure|compiled``
forces the choice (``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import pure

_requested = os.environ.get("POLARFORGE_BACKEND", "auto").lower()

if _requested == "pure":
    backend = pure
elif _requested == "compiled":
    from . import _core as backend  # type: ignore[no-redef]
else:
    try:
        from . import _core as backend  # type: ignore[no-redef]
    except ImportError:
        backend = pure

degrade_greedy = backend.degrade_greedy
upgrade_greedy = backend.upgrade_greedy
tool2_adjust = pure.tool2_adjust
window_adjust = pure.window_adjust
pair_cap = pure.pair_cap


def active_backend() -> str:
    """Name of the kernel backend in use: 'compiled' or 'pure'."""
    return backend.NAME
