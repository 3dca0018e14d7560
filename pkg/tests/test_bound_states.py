"""Small-amplitude bound-state family: construction, scalings, decay."""

import numpy as np
import pytest

import oracles as orc
from magnls import (
    ContractionSetViolation,
    MagnlsError,
    InsufficientDecayWindow,
    apply_h,
    decay_fit,
    default_z_max,
    fixed_point_step,
    make_field,
    norm_h2,
    norm_l2,
    norm_lp,
    solve_bound_state,
    zeros,
)


def test_first_sweep_energy_slope_closed_form(sech_spec, sech_eig):
    """One application of the map from (0, 0) has a known frequency update."""
    z = 0.05
    _, e1 = fixed_point_step(sech_spec, sech_eig, z, zeros(sech_spec.grid), 0.0, 1)
    expected = z * z * norm_lp(sech_eig.phi0, 4.0) ** 4
    assert e1 == pytest.approx(expected, rel=1e-12)
    # focusing flips the sign of the update
    _, e1f = fixed_point_step(sech_spec, sech_eig, z, zeros(sech_spec.grid), 0.0, -1)
    assert e1f == pytest.approx(-expected, rel=1e-12)


def test_bound_state_solves_the_nonlinear_eigenproblem(sech_spec, sech_eig,
                                                       sech_family):
    state = sech_family.solve(0.05)
    psi = state.field
    e_total = state.energy
    residual = (apply_h(sech_spec, psi).values
                + np.abs(psi.values) ** 2 * psi.values
                - e_total * psi.values)
    assert norm_l2(make_field(sech_spec.grid, residual)) < 1e-9
    assert state.residual < 1e-9


def test_matches_dense_newton_oracle(magnetic_spec, magnetic_eig):
    z = 0.05
    state = solve_bound_state(magnetic_spec, magnetic_eig, z, 1)
    e_dense, phi_dense = orc.dense_ground_state(magnetic_spec)
    q_dense, ep_dense = orc.dense_bound_state(
        magnetic_spec, phi_dense, e_dense, z, 1)
    assert abs(state.e_prime - ep_dense) < 1e-10
    assert np.max(np.abs(state.correction.values - q_dense)) < 1e-8


def test_amplitude_scalings(sech_family):
    zs = np.array([0.02, 0.04, 0.08])
    qs = [norm_h2(sech_family.solve(z).correction) for z in zs]
    eps = [abs(sech_family.solve(z).e_prime) for z in zs]
    slope_q = np.polyfit(np.log(zs), np.log(qs), 1)[0]
    slope_e = np.polyfit(np.log(zs), np.log(eps), 1)[0]
    assert slope_q == pytest.approx(3.0, abs=0.1)
    assert slope_e == pytest.approx(2.0, abs=0.1)


def test_gauge_equivariance_of_the_family(sech_spec, sech_eig, sech_family):
    z = 0.04
    alpha = 0.7
    rotated = sech_family.solve(z * np.exp(1j * alpha))
    direct = sech_family.solve(z)
    diff = rotated.field.values - np.exp(1j * alpha) * direct.field.values
    assert np.max(np.abs(diff)) < 1e-12
    assert rotated.energy == pytest.approx(direct.energy, abs=1e-12)


def test_contraction_ceiling_is_enforced(sech_spec, sech_eig):
    ceiling = default_z_max(sech_eig)
    with pytest.raises(MagnlsError):
        solve_bound_state(sech_spec, sech_eig, 2.0 * ceiling, 1)
    with pytest.raises(MagnlsError):
        fixed_point_step(sech_spec, sech_eig, 0.05, zeros(sech_spec.grid), 0.0, 2)


def test_invariant_set_violation_is_detected(sech_spec, sech_eig):
    # feed the map a correction far too large for the amplitude
    big = make_field(sech_spec.grid, 0.5 * sech_eig.phi0.values)
    with pytest.raises(ContractionSetViolation):
        fixed_point_step(sech_spec, sech_eig, 0.01, big, 0.0, 1)


def test_warm_and_cold_starts_agree(sech_spec, sech_eig, sech_family):
    warm = sech_family.solve(0.06)   # family reuses the nearest cached state
    cold = solve_bound_state(sech_spec, sech_eig, 0.06, 1)
    assert np.max(np.abs(warm.field.values - cold.field.values)) < 1e-11
    assert warm.e_prime == pytest.approx(cold.e_prime, abs=1e-12)


def test_phase_rotation_generator_identity(sech_family):
    d = sech_family.derivative_fields(0.05)
    scale = norm_l2(sech_family.solve(0.05).field)
    assert d.identity_residual < 1e-5 * scale


def test_decay_rate_tracks_the_linear_rate(sech_family):
    state = sech_family.solve(0.01)
    fit = decay_fit(state.field)
    assert fit.beta == pytest.approx(1.0, rel=0.2)
    assert fit.r_squared > 0.99
    assert fit.beta > 0


def test_decay_fit_needs_a_usable_window(sech_spec, sech_eig):
    tiny = make_field(sech_spec.grid, 1e-12 * sech_eig.phi0.values)
    with pytest.raises(InsufficientDecayWindow):
        decay_fit(tiny)
