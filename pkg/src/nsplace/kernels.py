"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when importable; otherwise, or
when ``NSPLACE_PURE=1`` is set, the numpy fallback in ``_pykernels`` is used.
Both expose identical functions.
"""
import os

import numpy as np

from . import _pykernels

python = _pykernels
compiled = None
if not os.environ.get("NSPLACE_PURE"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_active = compiled if compiled is not None else python


def backend():
    return _active.BACKEND


def get(name=None):
    """Return a kernel module: ``"cython"``, ``"python"`` or the active one."""
    if name is None:
        return _active
    if name == "python":
        return python
    if name == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def available():
    return ["python"] + (["cython"] if compiled is not None else [])


def solve_pairs(mod, pins, net_ptr, pairs, U, G, F, warm, lo=0, hi=None):
    """Dispatch ``solve_pairs`` with the array layouts each backend expects."""
    if mod is compiled:
        mod.solve_pairs(pins, net_ptr, pairs, U, G, F, warm.view(np.uint8), lo, hi)
    else:
        mod.solve_pairs(pins, net_ptr, pairs, U, G, F, warm, lo, hi)
