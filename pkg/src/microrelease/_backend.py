"""Hot-kernel backend selection.

The compiled extension is preferred when importable; the pure-NumPy
fallback is always available.  Set ``MICRORELEASE_BACKEND=pure`` or
``=compiled`` to force a choice (forcing ``compiled`` raises if the
extension was not built).
"""
import os

_requested = os.environ.get("MICRORELEASE_BACKEND", "").strip().lower()
if _requested not in ("", "pure", "compiled"):
    raise ImportError(
        f"MICRORELEASE_BACKEND must be 'pure' or 'compiled', got {_requested!r}")

if _requested == "pure":
    from . import _purekernels as _impl
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _purekernels as _impl

release_matrix = _impl.release_matrix
coupled_power_sum = _impl.coupled_power_sum
BACKEND_NAME = _impl.BACKEND_NAME
