"""Select the compiled kernels when available, otherwise the numpy twins.

Set ``SPDKIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("SPDKIT_PURE_PYTHON"):
    kernels = _compiled
else:
    kernels = _fallback

BACKEND = kernels.NAME


def available():
    """Names of the kernel implementations importable in this process."""
    names = [_fallback.NAME]
    if _compiled is not None:
        names.insert(0, _compiled.NAME)
    return names


def get(name):
    if name == _fallback.NAME:
        return _fallback
    if _compiled is not None and name == _compiled.NAME:
        return _compiled
    raise ValueError(f"kernel backend {name!r} not available; have {available()}")
