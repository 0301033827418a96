"""Kernel backend selection.

The fractional stepper exists twice: a Cython extension (``_core``) for the
O(N^2) hot loops and a pure-numpy fallback (``_pure``).  The compiled
backend is used when the extension imported successfully; set
``FUZZYFRAC_KERNEL=pure`` or ``compiled`` to force one (``compiled`` raises
if the extension is unavailable).  ``benchmarks/bench_kernels.py`` compares
the two.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("FUZZYFRAC_KERNEL", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"
elif _requested == "compiled":
    from . import _core as _impl

    BACKEND = "compiled"
elif _requested in ("pure", "python"):
    _impl = _pure
    BACKEND = "pure"
else:
    raise ValueError(
        f"FUZZYFRAC_KERNEL={_requested!r}: expected 'auto', 'compiled' or 'pure'"
    )

caputo_pece = _impl.caputo_pece
pece_weights = _pure.pece_weights
correction_weights = _pure.correction_weights


def available_backends() -> dict:
    """Map backend name -> kernel function, for tests and benchmarks."""
    out = {"pure": _pure.caputo_pece}
    try:
        from . import _core

        out["compiled"] = _core.caputo_pece
    except ImportError:
        pass
    return out
