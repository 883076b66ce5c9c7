"""Split-scan kernel with a compiled core and a NumPy fallback.

The compiled extension is used when it imported successfully at build
time; set DROUGHTKIT_PURE=1 to force the fallback (used by the
benchmark and the backend-agreement tests).
"""

import os

from . import pure as _pure

if os.environ.get("DROUGHTKIT_PURE"):
    _impl = _pure
else:
    try:
        from . import _split as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
best_split = _impl.best_split

# both implementations stay importable for side-by-side benchmarking
pure_best_split = _pure.best_split

try:
    from ._split import best_split as compiled_best_split
except ImportError:
    compiled_best_split = None
