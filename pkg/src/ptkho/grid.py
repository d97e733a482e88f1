"""Momentum/coordinate lattice and the spectral transform between them.

Momentum amplitudes are indexed by the integer quantum number m, stored in
ascending order m = -D/2 .. D/2-1 with eigenvalue p_m = m * hbar_eff.
Coordinate samples live on the uniform circle grid theta_j = -pi + 2*pi*j/D.
The transform convention places the 1/sqrt(2*pi) factor of the plane-wave
basis in the transform itself, so sum |psi_m|^2 is the physical norm and the
theta-space quadrature sum |psi(theta_j)|^2 * (2*pi/D) matches it exactly
(Parseval).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class LatticeGrid:
    """Immutable lattice: momentum indices, coordinate samples, hbar_eff."""

    size: int
    hbar_eff: float
    m_indices: np.ndarray
    theta_points: np.ndarray

    @property
    def momenta(self) -> np.ndarray:
        """Momentum eigenvalues p_m = m * hbar_eff, ascending in m."""
        return self.m_indices * self.hbar_eff

    @property
    def theta_spacing(self) -> float:
        return TWO_PI / self.size


@dataclass
class WaveFunction:
    """State in the momentum eigenbasis plus norm-growth bookkeeping.

    log_norm_growth accumulates ln of every norm factor divided out by
    renormalization; it is 0 for a fresh state.
    """

    amplitudes: np.ndarray
    log_norm_growth: float = 0.0

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes.copy(), self.log_norm_growth)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def make_grid(size: int, hbar_eff: float) -> LatticeGrid:
    """Build a lattice with D momentum states and D coordinate points.

    size must be even and >= 8 (powers of two transform fastest but any even
    size is accepted); hbar_eff must be positive.
    """
    if size % 2 != 0 or size < 8:
        raise ValueError(f"grid size must be even and >= 8, got {size}")
    if not hbar_eff > 0:
        raise ValueError(f"hbar_eff must be positive, got {hbar_eff}")
    m = np.arange(-(size // 2), size // 2, dtype=np.int64)
    # theta_j = (j - D/2) * (2*pi/D): one rounding per point, exactly odd
    # under j -> D-j, which keeps parity-symmetric dynamics symmetric to
    # the last bit.
    theta = m.astype(np.float64) * (TWO_PI / size)
    m.setflags(write=False)
    theta.setflags(write=False)
    return LatticeGrid(size=size, hbar_eff=float(hbar_eff), m_indices=m,
                       theta_points=theta)


def _parity_signs(grid: LatticeGrid) -> np.ndarray:
    # (-1)^m implements the theta-origin offset between the stored grid
    # (starting at -pi) and the FFT's natural grid (starting at 0).
    return np.where(grid.m_indices % 2 == 0, 1.0, -1.0)


def to_coordinate(state: WaveFunction | np.ndarray, grid: LatticeGrid) -> np.ndarray:
    """Evaluate psi(theta_j) = sum_m psi_m exp(i m theta_j) / sqrt(2 pi)."""
    amps = state.amplitudes if isinstance(state, WaveFunction) else np.asarray(state)
    if amps.shape != (grid.size,):
        raise ValueError(f"state length {amps.shape} does not match grid size {grid.size}")
    a = np.fft.ifftshift(amps * _parity_signs(grid))
    return np.fft.ifft(a) * (grid.size / np.sqrt(TWO_PI))


def from_coordinate(values: np.ndarray, grid: LatticeGrid) -> np.ndarray:
    """Invert to_coordinate; returns momentum amplitudes in ascending m."""
    values = np.asarray(values)
    if values.shape != (grid.size,):
        raise ValueError(f"value length {values.shape} does not match grid size {grid.size}")
    a = np.fft.fftshift(np.fft.fft(values)) * (np.sqrt(TWO_PI) / grid.size)
    return a * _parity_signs(grid)
