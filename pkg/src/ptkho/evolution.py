"""Floquet propagation: kick operator, split-step harmonic interval, run loop.

One driving period is one time unit. The kick acts first, multiplying the
coordinate-space wavefunction by exp[-(i/hbar) * K * (cos(theta) +
i*kick_gain*sin(theta))]; its imaginary part makes the factor real-positive
(norm-changing) for kick_gain > 0. The harmonic interval is then integrated
with `substeps` Strang splittings, kinetic half-phases in momentum space
around a potential phase on the wrapped coordinate theta in [-pi, pi).

Norm bookkeeping stays in log space: at kick_gain = 1, K = 5, hbar_eff = 0.1
a single kick grows the squared norm by a factor ~ I0(100) ~ e^96, so raw
accumulation over a run would overflow immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from . import observables
from .grid import LatticeGrid, WaveFunction


class NormOverflowError(RuntimeError):
    """State amplitudes left double-precision range (or hit zero norm)."""

    def __init__(self, message: str, kick: int | None = None):
        super().__init__(message)
        self.kick = kick


class EdgeGuardError(RuntimeError):
    """Probability reached the outer momentum band: the grid is too small."""

    def __init__(self, message: str, kick: int | None = None):
        super().__init__(message)
        self.kick = kick


@dataclass(frozen=True)
class FloquetParams:
    """Physics of one Floquet period.

    kick_strength: real kick amplitude (K >= 0).
    kick_gain: relative strength of the imaginary (gain/loss) kick part
        (lambda >= 0; 0 restores Hermitian dynamics).
    osc_freq: dimensionless harmonic frequency (eta >= 0); eta/(2*pi)
        rational puts the drive on resonance.
    hbar_eff: effective Planck constant; must match the grid's.
    substeps: Strang substeps per harmonic interval, each of duration
        1/substeps.
    """

    kick_strength: float
    kick_gain: float
    osc_freq: float
    hbar_eff: float
    substeps: int

    def __post_init__(self):
        for name in ("kick_strength", "kick_gain", "osc_freq", "hbar_eff"):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")
        if self.kick_strength < 0:
            raise ValueError(f"kick_strength must be >= 0, got {self.kick_strength}")
        if self.kick_gain < 0:
            raise ValueError(f"kick_gain must be >= 0, got {self.kick_gain}")
        if self.osc_freq < 0:
            raise ValueError(f"osc_freq must be >= 0, got {self.osc_freq}")
        if not self.hbar_eff > 0:
            raise ValueError(f"hbar_eff must be positive, got {self.hbar_eff}")
        if not (isinstance(self.substeps, (int, np.integer)) and self.substeps >= 1):
            raise ValueError(f"substeps must be a positive integer, got {self.substeps}")


@dataclass(frozen=True)
class RunConfig:
    """One run: physics, horizon, and bookkeeping switches."""

    params: FloquetParams
    total_kicks: int
    renormalize: bool = True
    snapshot_times: tuple[int, ...] = ()
    edge_guard: float = 1e-8

    def __post_init__(self):
        if not (isinstance(self.total_kicks, (int, np.integer)) and self.total_kicks >= 0):
            raise ValueError(f"total_kicks must be a non-negative integer, got {self.total_kicks}")
        for t in self.snapshot_times:
            if not (isinstance(t, (int, np.integer)) and 0 <= t <= self.total_kicks):
                raise ValueError(f"snapshot time {t} outside [0, {self.total_kicks}]")
        if not (0 < self.edge_guard < 1):
            raise ValueError(f"edge_guard must lie in (0, 1), got {self.edge_guard}")


def initial_state(grid: LatticeGrid) -> WaveFunction:
    """Zero-momentum eigenstate: psi_m = delta_{m,0}."""
    amps = np.zeros(grid.size, dtype=np.complex128)
    amps[grid.size // 2] = 1.0
    return WaveFunction(amps)


def _check_consistent(params: FloquetParams, grid: LatticeGrid) -> None:
    if params.hbar_eff != grid.hbar_eff:
        raise ValueError(f"params.hbar_eff={params.hbar_eff} does not match "
                         f"grid.hbar_eff={grid.hbar_eff}")


class _StepEngine:
    """Phase tables plus a kernel instance for one (params, grid) pair.

    Works on FFT-ordered arrays (index 0 is m=0); the public functions
    shift in and out of the ascending-m layout at the boundary.
    """

    def __init__(self, params: FloquetParams, grid: LatticeGrid,
                 backend: str | None = None):
        _check_consistent(params, grid)
        self.params = params
        self.grid = grid
        hb = params.hbar_eff
        dt = 1.0 / params.substeps
        theta = np.fft.ifftshift(grid.theta_points)
        p = np.fft.ifftshift(grid.momenta)
        kick = np.exp((-1j * params.kick_strength / hb) * np.cos(theta)
                      + (params.kick_strength * params.kick_gain / hb) * np.sin(theta))
        if not np.all(np.isfinite(kick)):
            raise NormOverflowError(
                "kick factor overflows double precision: kick_strength="
                f"{params.kick_strength}, kick_gain={params.kick_gain}, "
                f"hbar_eff={hb} (gain exponent {params.kick_strength * params.kick_gain / hb:.3g})")
        kin_half = np.exp(-1j * p * p * (dt / (4.0 * hb)))
        pot = np.exp(-1j * params.osc_freq ** 2 * theta * theta * (dt / (2.0 * hb)))
        self.kernel = _backend.make_kernel(grid.size, backend)
        self.kernel.set_tables(kick, kin_half, kin_half * kin_half, pot)

    def apply_kick(self, work: np.ndarray) -> None:
        self.kernel.apply_kick(work)

    def apply_harmonic(self, work: np.ndarray) -> None:
        self.kernel.apply_harmonic(work, self.params.substeps)


def _to_fft_order(amplitudes: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.fft.ifftshift(amplitudes), dtype=np.complex128)


def kick_apply(state: WaveFunction, params: FloquetParams, grid: LatticeGrid,
               backend: str | None = None) -> WaveFunction:
    """Apply one kick operator; the result is unnormalized for kick_gain > 0."""
    engine = _StepEngine(params, grid, backend)
    work = _to_fft_order(state.amplitudes)
    engine.apply_kick(work)
    if not np.all(np.isfinite(work)):
        raise NormOverflowError(
            f"amplitudes overflowed during kick: kick_strength={params.kick_strength}, "
            f"kick_gain={params.kick_gain}, hbar_eff={params.hbar_eff}")
    return WaveFunction(np.fft.fftshift(work), state.log_norm_growth)


def harmonic_apply(state: WaveFunction, params: FloquetParams, grid: LatticeGrid,
                   backend: str | None = None) -> WaveFunction:
    """Propagate through one harmonic interval (unitary)."""
    engine = _StepEngine(params, grid, backend)
    work = _to_fft_order(state.amplitudes)
    engine.apply_harmonic(work)
    return WaveFunction(np.fft.fftshift(work), state.log_norm_growth)


def _edge_band(size: int) -> slice:
    # Outer 10% of momentum indices: ceil(5%) per side. In FFT order both
    # extremes sit contiguously around index D/2.
    per_side = -(-size // 20)
    return slice(size // 2 - per_side, size // 2 + per_side)


def _settle_kick(work: np.ndarray, log_norm_growth: float, config: RunConfig,
                 kick: int | None) -> float:
    """Post-step checks plus optional renormalization; returns new log growth."""
    norm_sq = float(np.sum(work.real ** 2 + work.imag ** 2))
    where = "" if kick is None else f" at kick {kick}"
    if norm_sq == 0.0:
        raise NormOverflowError(f"state norm vanished{where}", kick)
    if not math.isfinite(norm_sq):
        raise NormOverflowError(
            f"state norm left double-precision range{where} (norm^2 = {norm_sq}); "
            "kick_gain is too large for unrenormalized evolution", kick)
    band = work[_edge_band(work.size)]
    edge_fraction = float(np.sum(band.real ** 2 + band.imag ** 2)) / norm_sq
    if edge_fraction > config.edge_guard:
        raise EdgeGuardError(
            f"probability {edge_fraction:.3e} in the outer 10% of momentum bins "
            f"exceeds edge_guard={config.edge_guard:.1e}{where}; "
            f"grid size {work.size} is too small for these dynamics", kick)
    if config.renormalize:
        log_norm_growth += 0.5 * math.log(norm_sq)
        work *= 1.0 / math.sqrt(norm_sq)
    return log_norm_growth


def floquet_step(state: WaveFunction, config: RunConfig, grid: LatticeGrid,
                 backend: str | None = None) -> WaveFunction:
    """One full period: kick, then harmonic interval, then bookkeeping."""
    engine = _StepEngine(config.params, grid, backend)
    work = _to_fft_order(state.amplitudes)
    engine.apply_kick(work)
    engine.apply_harmonic(work)
    log_norm_growth = _settle_kick(work, state.log_norm_growth, config, None)
    return WaveFunction(np.fft.fftshift(work), log_norm_growth)


class MemorySink:
    """Collects records and snapshots in memory; the default run consumer."""

    def __init__(self):
        self.records: list[observables.ObservableRecord] = []
        self.snapshots: list[observables.DensitySnapshot] = []

    def record(self, rec: observables.ObservableRecord) -> None:
        self.records.append(rec)

    def snapshot(self, snap: observables.DensitySnapshot) -> None:
        self.snapshots.append(snap)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)


def run(config: RunConfig, grid: LatticeGrid, sink=None,
        backend: str | None = None) -> WaveFunction:
    """Evolve from the zero-momentum state for total_kicks periods.

    Emits one measured record per kick (t=0 included) to sink.record and a
    density snapshot at every requested time to sink.snapshot. Deterministic:
    identical configs produce identical records on the same platform.
    """
    params = config.params
    engine = _StepEngine(params, grid, backend)
    work = _to_fft_order(initial_state(grid).amplitudes)
    log_norm_growth = 0.0
    snap_times = frozenset(config.snapshot_times)

    def emit(t: int) -> WaveFunction:
        st = WaveFunction(np.fft.fftshift(work), log_norm_growth)
        if sink is not None:
            sink.record(observables.measure(st, params, grid, t))
            if t in snap_times:
                sink.snapshot(observables.snapshot(st, grid, t))
        return st

    state = emit(0)
    for t in range(1, config.total_kicks + 1):
        engine.apply_kick(work)
        engine.apply_harmonic(work)
        log_norm_growth = _settle_kick(work, log_norm_growth, config, t)
        state = emit(t)
    return state
