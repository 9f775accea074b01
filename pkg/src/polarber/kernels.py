"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable ``POLARBER_PURE_PYTHON=1`` forces the pure-Python kernels.
"""
from __future__ import annotations

import os

from . import _pykernels

python = _pykernels

try:
    from . import _ccore as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("POLARBER_PURE_PYTHON"):
    active = compiled
else:
    active = python

BACKEND = active.NAME


def available() -> dict:
    """Map of backend name to kernel module for every importable backend."""
    out = {"python": python}
    if compiled is not None:
        out["compiled"] = compiled
    return out


def get(name: str | None = None):
    """Return the kernel module ``name`` (default: the active one)."""
    if name is None:
        return active
    try:
        return available()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
