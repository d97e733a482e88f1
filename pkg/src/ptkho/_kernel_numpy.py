"""Pure-numpy reference kernel, API-identical to the compiled one.

Used when the compiled extension is unavailable (or forced via the
PTKHO_KERNEL environment variable) and as the ground truth the compiled
kernel is checked against.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

name = "numpy"


class SpectralKernel:
    """Split-step inner loop on FFT-ordered complex128 arrays, in place."""

    def __init__(self, size: int):
        if size < 2:
            raise ValueError("kernel size must be >= 2")
        self.size = int(size)
        self._tables: tuple[np.ndarray, ...] | None = None

    def set_tables(self, kick: np.ndarray, kin_half: np.ndarray,
                   kin_full: np.ndarray, pot: np.ndarray) -> None:
        tables = []
        for tab in (kick, kin_half, kin_full, pot):
            arr = np.ascontiguousarray(tab, dtype=np.complex128)
            if arr.shape != (self.size,):
                raise ValueError("table length does not match kernel size")
            tables.append(arr)
        self._tables = tuple(tables)

    def _require_state(self, psi: np.ndarray) -> None:
        if self._tables is None:
            raise RuntimeError("set_tables must be called before applying steps")
        if psi.shape != (self.size,):
            raise ValueError("state length does not match kernel size")

    def apply_kick(self, psi: np.ndarray) -> None:
        self._require_state(psi)
        kick = self._tables[0]
        psi[:] = scipy.fft.fft(scipy.fft.ifft(psi) * kick)

    def apply_harmonic(self, psi: np.ndarray, substeps: int) -> None:
        self._require_state(psi)
        if substeps < 1:
            raise ValueError("substeps must be >= 1")
        _, kin_half, kin_full, pot = self._tables
        work = psi * kin_half
        for s in range(substeps):
            work = scipy.fft.fft(scipy.fft.ifft(work) * pot)
            work *= kin_full if s < substeps - 1 else kin_half
        psi[:] = work
