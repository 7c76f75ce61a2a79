"""Kernel selector for poset closure: compiled extension if built, else pure Python."""
from __future__ import annotations

try:
    from ._poset import add_edges, closure  # type: ignore[attr-defined]
    KERNEL = "compiled"
except ImportError:  # pragma: no cover - depends on the build
    from ._poset_py import add_edges, closure
    KERNEL = "python"

__all__ = ["add_edges", "closure", "KERNEL"]
