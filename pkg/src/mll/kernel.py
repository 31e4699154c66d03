"""Evaluation backend selection.

The compiled extension is used when importable; set MLL_KERNEL=pure (or
=compiled) to force a backend.  Both backends implement the same engine API
(decode_segments / eval_point / run_span / initial_point) and produce
bitwise-identical results.
"""

from __future__ import annotations

import os
from typing import Optional

from . import _pycore

try:
    from . import _core

    _HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _core = None
    _HAVE_COMPILED = False


def default_backend() -> str:
    forced = os.environ.get("MLL_KERNEL")
    if forced:
        if forced not in ("pure", "compiled"):
            raise ValueError(f"MLL_KERNEL must be 'pure' or 'compiled', got {forced!r}")
        if forced == "compiled" and not _HAVE_COMPILED:
            raise ImportError("MLL_KERNEL=compiled but the extension is not built")
        return forced
    return "compiled" if _HAVE_COMPILED else "pure"


def have_compiled() -> bool:
    return _HAVE_COMPILED


def make_engine(layout, backend: Optional[str] = None):
    """Engine instance for a layout; engines hold scratch state, use one per
    worker."""
    name = backend or default_backend()
    if name == "pure":
        return _pycore.PureEngine(layout)
    if name == "compiled":
        if not _HAVE_COMPILED:
            raise ImportError("compiled kernel not available")
        return _core.Engine(layout)
    raise ValueError(f"unknown backend {name!r}")
