"""Expectation values and probability densities of the evolving state.

Every quantity divides explicitly by the current norm, so records are
identical whether or not the run renormalizes (scale invariance). The
potential energy uses the wrapped coordinate theta in [-pi, pi), the same
branch the propagator applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .grid import LatticeGrid, WaveFunction, to_coordinate

if TYPE_CHECKING:  # circular at runtime: evolution drives measure() per kick
    from .evolution import FloquetParams


@dataclass(frozen=True)
class ObservableRecord:
    """Per-kick scalar observables."""

    t: int
    log_norm: float
    p_mean: float
    e_kin: float
    e_pot: float
    e_tot: float
    width: float


@dataclass(frozen=True)
class DensitySnapshot:
    """Normalized densities at one kick time.

    momentum_density sums to 1 over bins; coordinate_density integrates to 1
    with the theta spacing as quadrature weight.
    """

    t: int
    momenta: np.ndarray
    momentum_density: np.ndarray
    theta: np.ndarray
    coordinate_density: np.ndarray


def _probability(amplitudes: np.ndarray, what: str) -> np.ndarray:
    prob = amplitudes.real ** 2 + amplitudes.imag ** 2
    total = float(np.sum(prob))
    if total == 0.0:
        raise ValueError(f"cannot {what} a zero-norm state")
    if not math.isfinite(total):
        raise ValueError(f"cannot {what} a non-finite state")
    return prob / total


def measure(state: WaveFunction, params: FloquetParams, grid: LatticeGrid,
            t: int) -> ObservableRecord:
    """Momentum moments, energies, and width of the normalized density."""
    if state.amplitudes.shape != (grid.size,):
        raise ValueError("state length does not match grid size")
    prob = _probability(state.amplitudes, "measure")
    p = grid.momenta
    p_mean = float(np.dot(prob, p))
    p_second = float(np.dot(prob, p * p))
    e_kin = 0.5 * p_second
    width = p_second - p_mean * p_mean

    coord = to_coordinate(state, grid)
    coord_prob = _probability(coord, "measure")
    theta = grid.theta_points
    e_pot = 0.5 * params.osc_freq ** 2 * float(np.dot(coord_prob, theta * theta))

    log_norm = state.log_norm_growth + 0.5 * math.log(state.norm_sq())
    return ObservableRecord(t=int(t), log_norm=log_norm, p_mean=p_mean,
                            e_kin=e_kin, e_pot=e_pot, e_tot=e_kin + e_pot,
                            width=width)


def snapshot(state: WaveFunction, grid: LatticeGrid, t: int) -> DensitySnapshot:
    """Momentum and coordinate probability densities, each normalized."""
    if state.amplitudes.shape != (grid.size,):
        raise ValueError("state length does not match grid size")
    momentum_density = _probability(state.amplitudes, "snapshot")
    coord = to_coordinate(state, grid)
    coordinate_density = _probability(coord, "snapshot") / grid.theta_spacing
    return DensitySnapshot(t=int(t), momenta=grid.momenta.copy(),
                           momentum_density=momentum_density,
                           theta=grid.theta_points.copy(),
                           coordinate_density=coordinate_density)
