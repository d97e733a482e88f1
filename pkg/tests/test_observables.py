"""Expectation values and density snapshots."""

import numpy as np
import pytest

from ptkho.evolution import FloquetParams, initial_state
from ptkho.grid import WaveFunction, make_grid
from ptkho.observables import measure, snapshot


def params(freq=2 * np.pi, hbar=0.1):
    return FloquetParams(kick_strength=5.0, kick_gain=0.0, osc_freq=freq,
                         hbar_eff=hbar, substeps=50)


def random_state(grid, seed=7):
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2))
    return WaveFunction(amps)


def test_ground_state_momentum_moments_vanish():
    grid = make_grid(64, 0.1)
    rec = measure(initial_state(grid), params(), grid, t=0)
    assert rec.t == 0
    assert rec.p_mean == 0.0
    assert rec.e_kin == 0.0
    assert rec.width == 0.0


def test_uniform_coordinate_density_potential_energy():
    # |phi_0> is flat in theta, so <theta^2> is the plain integral pi^2/3
    grid = make_grid(1024, 0.1)
    freq = 2 * np.pi / np.e**2
    rec = measure(initial_state(grid), params(freq=freq), grid, t=0)
    expected = freq**2 * np.pi**2 / 6.0
    # the theta lattice samples -pi but not +pi, so the discrete second
    # moment sits 2/D^2 above the continuum integral
    assert rec.e_pot == pytest.approx(expected, rel=3.0 / grid.size**2)
    assert rec.e_pot == pytest.approx(expected * (1 + 2.0 / grid.size**2),
                                      rel=1e-10)


def test_two_site_superposition_moments():
    grid = make_grid(64, 0.1)
    amps = np.zeros(64, dtype=np.complex128)
    half = 64 // 2
    amps[half + 1] = 1 / np.sqrt(2)
    amps[half - 1] = 1 / np.sqrt(2)
    rec = measure(WaveFunction(amps), params(), grid, t=3)
    assert rec.p_mean == pytest.approx(0.0, abs=1e-15)
    assert rec.e_kin == pytest.approx(0.005, rel=1e-12)
    assert rec.width == pytest.approx(0.1**2, rel=1e-12)


def test_measure_scale_invariant_exact_for_binary_scale():
    # a power-of-two factor rescales amplitudes without rounding, so the
    # normalized record must come out bit-identical
    grid = make_grid(128, 0.1)
    state = random_state(grid)
    scaled = WaveFunction(state.amplitudes * 4.0)
    a = measure(state, params(), grid, t=1)
    b = measure(scaled, params(), grid, t=1)
    assert (a.p_mean, a.e_kin, a.e_pot, a.width) == \
        (b.p_mean, b.e_kin, b.e_pot, b.width)


def test_measure_scale_invariant_general_complex_factor():
    grid = make_grid(128, 0.1)
    state = random_state(grid, seed=11)
    scaled = WaveFunction(state.amplitudes * (0.3 - 1.7j))
    a = measure(state, params(), grid, t=1)
    b = measure(scaled, params(), grid, t=1)
    assert b.p_mean == pytest.approx(a.p_mean, rel=1e-12, abs=1e-14)
    assert b.e_kin == pytest.approx(a.e_kin, rel=1e-12)
    assert b.e_pot == pytest.approx(a.e_pot, rel=1e-12)
    assert b.width == pytest.approx(a.width, rel=1e-12)


def test_width_matches_definitional_identity():
    grid = make_grid(256, 0.1)
    rec = measure(random_state(grid, seed=3), params(), grid, t=0)
    assert rec.width == pytest.approx(2.0 * rec.e_kin - rec.p_mean**2,
                                      abs=1e-12)
    assert rec.width >= -1e-12


def test_total_energy_is_exact_sum():
    grid = make_grid(128, 0.1)
    rec = measure(random_state(grid, seed=5), params(), grid, t=0)
    assert rec.e_tot == rec.e_kin + rec.e_pot


def test_potential_energy_bounded_by_wrapped_maximum():
    freq = 2 * np.pi
    grid = make_grid(128, 0.1)
    bound = 0.5 * freq**2 * np.pi**2
    for seed in range(6):
        rec = measure(random_state(grid, seed=seed), params(freq=freq),
                      grid, t=0)
        assert 0.0 <= rec.e_pot <= bound


def test_kinetic_energy_consistent_with_momentum_density():
    grid = make_grid(256, 0.1)
    state = random_state(grid, seed=13)
    rec = measure(state, params(), grid, t=0)
    snap = snapshot(state, grid, t=0)
    second_moment = float(np.dot(snap.momentum_density, snap.momenta**2))
    assert rec.e_kin == pytest.approx(0.5 * second_moment, abs=1e-10)


def test_snapshot_densities_normalized():
    grid = make_grid(512, 0.1)
    snap = snapshot(random_state(grid, seed=17), grid, t=9)
    assert snap.t == 9
    assert np.sum(snap.momentum_density) == pytest.approx(1.0, abs=1e-10)
    integral = np.sum(snap.coordinate_density) * grid.theta_spacing
    assert integral == pytest.approx(1.0, abs=1e-10)


def test_snapshot_of_ground_state():
    grid = make_grid(64, 0.1)
    snap = snapshot(initial_state(grid), grid, t=0)
    peak = np.zeros(64)
    peak[64 // 2] = 1.0
    np.testing.assert_allclose(snap.momentum_density, peak, atol=1e-15)
    np.testing.assert_allclose(snap.coordinate_density,
                               np.full(64, 1.0 / (2 * np.pi)), rtol=1e-12)


def test_snapshot_scale_invariant():
    grid = make_grid(128, 0.1)
    state = random_state(grid, seed=19)
    scaled = WaveFunction(state.amplitudes * 2.0)
    a = snapshot(state, grid, t=0)
    b = snapshot(scaled, grid, t=0)
    np.testing.assert_array_equal(a.momentum_density, b.momentum_density)
    np.testing.assert_array_equal(a.coordinate_density, b.coordinate_density)


def test_zero_norm_state_rejected():
    grid = make_grid(64, 0.1)
    dead = WaveFunction(np.zeros(64, dtype=np.complex128))
    with pytest.raises(ValueError, match="zero-norm"):
        measure(dead, params(), grid, t=0)
    with pytest.raises(ValueError, match="zero-norm"):
        snapshot(dead, grid, t=0)


def test_non_finite_state_rejected():
    grid = make_grid(64, 0.1)
    amps = np.ones(64, dtype=np.complex128)
    amps[3] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        measure(WaveFunction(amps), params(), grid, t=0)


def test_size_mismatch_rejected():
    grid = make_grid(64, 0.1)
    short = WaveFunction(np.ones(32, dtype=np.complex128))
    with pytest.raises(ValueError, match="grid size"):
        measure(short, params(), grid, t=0)
    with pytest.raises(ValueError, match="grid size"):
        snapshot(short, grid, t=0)


def test_log_norm_reports_residual_and_removed_growth():
    grid = make_grid(64, 0.1)
    amps = np.zeros(64, dtype=np.complex128)
    amps[64 // 2] = 2.0  # norm_sq = 4, residual ln-norm = ln 2
    state = WaveFunction(amps, log_norm_growth=1.5)
    rec = measure(state, params(), grid, t=0)
    assert rec.log_norm == pytest.approx(1.5 + np.log(2.0), rel=1e-12)
