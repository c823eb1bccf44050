"""Kernel selection: the Cython build if importable, else the numpy fallback.

Set ``NBLSAT_PURE_PYTHON=1`` to force the fallback.
"""

import os
from types import ModuleType

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # pragma: no cover - depends on the build
    _ckernel = None

AVAILABLE: dict[str, ModuleType] = {"python": _pykernel}
if _ckernel is not None:
    AVAILABLE["compiled"] = _ckernel

if os.environ.get("NBLSAT_PURE_PYTHON") or _ckernel is None:
    DEFAULT = "python"
else:
    DEFAULT = "compiled"


def get_kernel(name: str | None = None) -> ModuleType:
    name = name or DEFAULT
    try:
        return AVAILABLE[name]
    except KeyError:
        raise ValueError(
            f"kernel {name!r} not available (have: {', '.join(AVAILABLE)})"
        ) from None
