"""Kernel backend selection.

The compiled FFTW kernel is preferred when it imported cleanly; the numpy
kernel is the fallback. Set PTKHO_KERNEL=numpy or PTKHO_KERNEL=fftw to force
a choice (forcing fftw when the extension failed to build raises at import).
"""

from __future__ import annotations

import os
import warnings

from . import _kernel_numpy

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:
    _kernel = None

_FORCED = os.environ.get("PTKHO_KERNEL", "").strip().lower()

if _FORCED == "numpy":
    _active = _kernel_numpy
elif _FORCED == "fftw":
    if _kernel is None:
        raise ImportError("PTKHO_KERNEL=fftw but the compiled kernel is not available")
    _active = _kernel
elif _FORCED:
    raise ImportError(f"unknown PTKHO_KERNEL value: {_FORCED!r} (use 'fftw' or 'numpy')")
elif _kernel is not None:
    _active = _kernel
else:
    warnings.warn("compiled FFTW kernel unavailable; falling back to the "
                  "slower numpy kernel", RuntimeWarning, stacklevel=2)
    _active = _kernel_numpy

active_name: str = _active.name


def make_kernel(size: int, backend: str | None = None):
    """Return a fresh SpectralKernel; each caller owns its instance."""
    if backend is None:
        return _active.SpectralKernel(size)
    if backend == "numpy":
        return _kernel_numpy.SpectralKernel(size)
    if backend == "fftw":
        if _kernel is None:
            raise ValueError("compiled fftw kernel is not available")
        return _kernel.SpectralKernel(size)
    raise ValueError(f"unknown kernel backend: {backend!r}")


def available_backends() -> tuple[str, ...]:
    return ("fftw", "numpy") if _kernel is not None else ("numpy",)
