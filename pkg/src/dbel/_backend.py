"""Select the line-scan kernel at import time.

The compiled extension is used when it is importable.  Setting the
environment variable ``DBEL_PURE_PYTHON=1`` forces the numpy version,
which is also the automatic fallback when the extension was not built.
"""

from __future__ import annotations

import os

from . import _kernel_py

BACKEND = "python"
scan_line = _kernel_py.scan_line

if os.environ.get("DBEL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        scan_line = _kernel.scan_line
        BACKEND = "compiled"

python_scan_line = _kernel_py.scan_line


def compiled_scan_line():
    """The compiled ``scan_line`` or ``None`` when the extension is missing."""
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover
        return None
    return _kernel.scan_line
