"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise. ``RSVD_BACKEND=python`` or ``RSVD_BACKEND=compiled`` forces a
choice (forcing ``compiled`` when the extension is missing raises at import).
Both backends expose the same functions: ``gauss_fill``, ``mm``, ``spmm_nt``,
``spmm_t``, ``jacobi_sweeps``.
"""

import os

from . import _kernels_py as py_impl

try:
    from . import _kernels as c_impl
except ImportError:  # pragma: no cover - depends on the build environment
    c_impl = None

_forced = os.environ.get("RSVD_BACKEND", "").strip().lower()
if _forced == "python":
    _active = py_impl
elif _forced == "compiled":
    if c_impl is None:
        raise ImportError(
            "RSVD_BACKEND=compiled but the rsvdkit._kernels extension is not built"
        )
    _active = c_impl
elif _forced:
    raise ImportError(f"unknown RSVD_BACKEND value: {_forced!r}")
else:
    _active = c_impl if c_impl is not None else py_impl


def active_backend():
    """Name of the kernel backend in use: 'compiled' or 'python'."""
    return "compiled" if _active is c_impl and c_impl is not None else "python"


gauss_fill = _active.gauss_fill
mm = _active.mm
spmm_nt = _active.spmm_nt
spmm_t = _active.spmm_t
jacobi_sweeps = _active.jacobi_sweeps
