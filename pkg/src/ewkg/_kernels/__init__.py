"""Hot-kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python reference
implementation when the extension is unavailable (or when the environment
variable EWKG_PURE_PYTHON is set, which the benchmark and the backend
agreement tests use).
"""

import os

if os.environ.get("EWKG_PURE_PYTHON"):
    from ._fallback import BACKEND_NAME, constraint_march, march_null_slice
else:
    try:
        from ._core import BACKEND_NAME, constraint_march, march_null_slice
    except ImportError:
        from ._fallback import BACKEND_NAME, constraint_march, march_null_slice

__all__ = ["BACKEND_NAME", "constraint_march", "march_null_slice"]
