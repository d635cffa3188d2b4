"""Hot numerical kernels with a compiled core and a numpy fallback.

The Cython extension ``_core`` is built by setup.py when a compiler is
available; otherwise (or when MCFLOW_PURE_PYTHON is set) the pure numpy
implementations in ``_fallback`` are used. Both expose the same three
functions and agree to rounding accuracy; ``benchmarks/bench_kernels.py``
compares their throughput.
"""

import os

from . import _fallback

if os.environ.get("MCFLOW_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

residual_full = _impl.residual_full
jacobian_blocks = _impl.jacobian_blocks
rk4_slope = _impl.rk4_slope
