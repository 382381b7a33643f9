import math

import numpy as np
import pytest

from engine.dynamics import (
    Pointer,
    SpinArrays,
    conditional_states,
    conditional_unitary,
    decoherence_factor_fragment,
    decoherence_factor_spin,
    decoherence_factors,
    insensitive_axis,
)
from tests.conftest import random_spins, spin
from utils.errors import ConfigError
from utils.qmath import IDENTITY2, QubitState


@pytest.mark.parametrize("s", [Pointer.UP, Pointer.DOWN])
def test_conditional_unitary_is_unitary(s):
    v = conditional_unitary(spin(g=0.7, omega=1.3), s, 2.1)
    np.testing.assert_allclose(v @ v.conj().T, IDENTITY2, atol=1e-14)


def test_no_field_unitary_is_diagonal_phase():
    g, t = 0.5, 1.2
    v_up = conditional_unitary(spin(g=g), Pointer.UP, t)
    np.testing.assert_allclose(v_up, np.diag([np.exp(-1j * g * t), np.exp(1j * g * t)]), atol=1e-14)


def test_zero_coupling_and_field_is_identity():
    np.testing.assert_allclose(conditional_unitary(spin(g=0.0), Pointer.UP, 3.0), IDENTITY2)


def test_negative_time_rejected():
    with pytest.raises(ConfigError):
        conditional_unitary(spin(), Pointer.UP, -1.0)


def test_closed_form_gamma_matches_matrix_trace(rng):
    spins = random_spins(rng, 50)
    t = 1.7
    closed = decoherence_factors(SpinArrays.from_spins(spins), t)
    matrix = np.array([decoherence_factor_spin(s, t) for s in spins])
    np.testing.assert_allclose(closed, matrix, atol=1e-12)


def test_pure_state_gamma_is_cos_half_separation(rng):
    for s in random_spins(rng, 30, pure=True):
        pair = conditional_states(s, 0.9)
        assert abs(pair.gamma) ** 2 == pytest.approx(math.cos(pair.theta_sep / 2) ** 2, abs=1e-10)


def test_no_field_gamma_is_cos_2gt():
    g, t = 0.5, 15 * math.pi / 64
    gamma = decoherence_factor_spin(spin(g=g), t)
    assert abs(gamma) ** 2 == pytest.approx(math.cos(2 * g * t) ** 2, abs=1e-14)


def test_conditional_states_keep_bloch_length(rng):
    s = random_spins(rng, 1)[0]
    pair = conditional_states(s, 2.4)
    assert pair.up.a == pytest.approx(s.init.a, abs=1e-12)
    assert pair.down.a == pytest.approx(s.init.a, abs=1e-12)


@pytest.mark.parametrize("g", [0.3, 1.0, -0.8])
@pytest.mark.parametrize("omega", [0.5, math.pi / 2, 2.0])
@pytest.mark.parametrize("t", [0.4, 1.9, 7.3])
def test_insensitive_axis_states_never_decohere(g, omega, t):
    axis = insensitive_axis(spin(g=g, omega=omega), t)
    assert -math.pi / 2 < axis.theta_star <= math.pi / 2
    on_axis = spin(g=g, omega=omega, a=1.0).model_copy(update={"init": axis.as_state(1.0)})
    assert abs(decoherence_factor_spin(on_axis, t)) == pytest.approx(1.0, abs=1e-10)


def test_insensitive_axis_is_z_without_field():
    axis = insensitive_axis(spin(g=0.5, omega=0.0), 1.0)
    assert axis.theta_star == 0.0
    np.testing.assert_allclose(axis.direction, [0, 0, 1], atol=1e-15)


def test_fragment_gamma_is_product(rng):
    spins = random_spins(rng, 4)
    t = 0.8
    expected = np.prod([decoherence_factor_spin(s, t) for s in spins])
    assert decoherence_factor_fragment(spins, t) == pytest.approx(expected, abs=1e-12)
    assert decoherence_factor_fragment([], t) == 1.0


@pytest.mark.parametrize("g", [0.1, 0.5, 2.0])
def test_strong_field_decouples_the_spin(g, rng):
    for t in np.linspace(0.1, 20.0, 25):
        s = spin(g=g, omega=1e3 * g, theta=rng.uniform(0, math.pi), phi=rng.uniform(0, 2 * math.pi))
        assert math.sin(conditional_states(s, t).theta_sep / 2) ** 2 < 4e-4


def _state_at_axis_angle(axis_dir, beta, psi):
    """Unit Bloch vector at angle beta from axis_dir, azimuth psi around it."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis_dir[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis_dir, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis_dir, e1)
    v = math.cos(beta) * axis_dir + math.sin(beta) * (math.cos(psi) * e1 + math.sin(psi) * e2)
    return QubitState(a=1.0, theta=math.atan2(math.hypot(v[0], v[1]), v[2]), phi=math.atan2(v[1], v[0]))


@pytest.mark.parametrize("g,omega,t", [(0.5, math.pi / 2, 15 * math.pi / 64), (1.2, 0.4, 2.3), (-0.7, 1.9, 0.8)])
def test_separation_is_symmetric_about_insensitive_axis(g, omega, t):
    base = spin(g=g, omega=omega)
    axis = insensitive_axis(base, t).direction
    for beta in (0.3, 1.1, 2.5):
        seps = [
            conditional_states(base.model_copy(update={"init": _state_at_axis_angle(axis, beta, psi)}), t).theta_sep
            for psi in np.linspace(0, 2 * math.pi, 7, endpoint=False)
        ]
        np.testing.assert_allclose(seps, seps[0], atol=1e-10)


def test_no_field_gamma_ignores_azimuth():
    for a, theta, t in [(1.0, 0.9, 1.3), (0.6, 2.2, 4.0), (0.3, math.pi / 2, 0.7)]:
        ref = spin(g=0.8, a=a, theta=theta, phi=0.0)
        ref_gamma = decoherence_factor_spin(ref, t)
        ref_sep = conditional_states(ref, t).theta_sep
        for phi in (0.5, 2.0, 4.4):
            s = spin(g=0.8, a=a, theta=theta, phi=phi)
            assert abs(decoherence_factor_spin(s, t) - ref_gamma) < 1e-12
            assert conditional_states(s, t).theta_sep == pytest.approx(ref_sep, abs=1e-12)
