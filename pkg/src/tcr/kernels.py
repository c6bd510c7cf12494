"""Backend selection for the dense-layer kernels.

Prefers the compiled Cython extension; falls back to the pure-NumPy
implementation when the extension is missing or when the environment
variable TCR_PURE_PYTHON is set to a non-empty value other than "0".
Both backends expose identical signatures.
"""

import os

if os.environ.get("TCR_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
linear_forward = _impl.linear_forward
relu = _impl.relu
relu_backward = _impl.relu_backward
linear_backward = _impl.linear_backward
