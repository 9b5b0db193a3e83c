"""Kernel backend selection.

The compiled extension is preferred when it built; set
``REDPEN_PURE_PYTHON=1`` to force the pure-Python kernels (the benchmark
and the cross-backend tests use this).  Both backends implement the same
contract — see ``pure.py`` for the tie-break rules.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import pure


def _select() -> ModuleType:
    if os.environ.get("REDPEN_PURE_PYTHON", "").strip() not in {"", "0"}:
        return pure
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        return pure
    return _speedups


_impl = _select()

BACKEND_NAME: str = _impl.BACKEND_NAME
lcs_length = _impl.lcs_length
lcs_match_pairs = _impl.lcs_match_pairs


def available_backends() -> dict[str, ModuleType]:
    """All importable kernel backends, keyed by name (for benchmarks/tests)."""
    backends: dict[str, ModuleType] = {pure.BACKEND_NAME: pure}
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        backends[_speedups.BACKEND_NAME] = _speedups
    return backends


__all__ = ["BACKEND_NAME", "available_backends", "lcs_length", "lcs_match_pairs"]
