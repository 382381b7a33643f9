import math

import numpy as np
import pytest

from engine.chernoff import (
    MixednessFactor,
    decoherence_time,
    mean_overlap,
    onset_time,
    redundancy_discretized,
    redundancy_gaussian,
    redundancy_qcb,
)
from engine.ensembles import (
    BandSpec,
    Haziness,
    band_asymptote,
    band_decoherence_time,
    band_mean_overlap,
    band_mean_overlap_quadrature,
    band_redundancy,
    bloch_length_from_lambda,
    haziness_to_bloch_length,
    fig4_redundancy,
    fig4_relative_redundancy,
    make_fig2_spin,
    make_fig3_scenario,
    make_fig4_scenario,
    make_fig5_scenario,
)
from engine.model import SpinSpec, realize_environment
from utils.errors import BadHaziness, ConfigError
from utils.qmath import binary_entropy


# ===== haziness =====

@pytest.mark.parametrize("h", [0.01, 0.2, 0.5, 0.9])
def test_haziness_round_trip(h):
    a = haziness_to_bloch_length(h)
    assert binary_entropy(0.5 * (1 + a)) == pytest.approx(h, abs=1e-10)


def test_haziness_examples():
    assert haziness_to_bloch_length(0.0) == 1.0
    assert haziness_to_bloch_length(Haziness(0.2)) == pytest.approx(0.9378, abs=1e-4)
    for bad in (1.0, -0.1, math.nan):
        with pytest.raises(BadHaziness):
            haziness_to_bloch_length(bad)


def test_lambda_to_bloch_length():
    for a in (0.0, 0.3, 11 / 16, 1.0):
        lam = MixednessFactor.from_bloch_length(a).lam
        assert bloch_length_from_lambda(lam) == pytest.approx(a, abs=1e-12)
    with pytest.raises(ConfigError):
        bloch_length_from_lambda(1.5)


# ===== band averages =====

@pytest.mark.parametrize("width", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("t", [0.01, 0.4, 1.0, 7.3])
def test_band_closed_form_matches_quadrature(width, t):
    band = BandSpec(width=width, lam=0.8, theta=1.1)
    assert band_mean_overlap(band, t) == pytest.approx(band_mean_overlap_quadrature(band, t), abs=1e-10)


def test_band_limits():
    band = BandSpec(width=1.0)
    assert band_mean_overlap(band, 0.0) == 1.0
    assert band_mean_overlap(band, 1e4) == pytest.approx(0.5, abs=1e-4)
    values = band_mean_overlap(band, np.array([0.0, 0.1, 1.0]))
    assert values.shape == (3,)
    assert values[0] == 1.0
    with pytest.raises(ConfigError):
        band_mean_overlap(band, -1.0)


def test_band_without_mixedness_factor_records_nothing():
    band = BandSpec(width=1.0, lam=0.0)
    assert band_redundancy(band, 1000, 2.0, 1e-16).r_delta == 0.0
    assert band_asymptote(band, 1000, 1e-16) == 0.0


def test_band_asymptote():
    band = BandSpec(width=1.0)
    n, delta = 1000, 1e-16
    assert band_asymptote(band, n, delta) == pytest.approx(n * math.log(2) / math.log(1e16))
    late = band_redundancy(band, n, 1e4, delta).r_delta
    assert late == pytest.approx(band_asymptote(band, n, delta), rel=1e-3)


def test_band_small_time_is_gaussian():
    band = BandSpec(width=2.0, lam=0.6, theta=1.2)
    n, delta = 1000, 1e-16
    t = 0.01 / band.width
    tau_d = band_decoherence_time(band, n)
    quadratic = redundancy_gaussian(band.lam, tau_d, t, delta)
    assert band_redundancy(band, n, t, delta).r_delta == pytest.approx(quadratic, rel=1e-2)


def test_band_decoherence_time():
    band = BandSpec(width=1.0)
    assert band_decoherence_time(band) == pytest.approx(math.sqrt(3) / 2)
    assert band_decoherence_time(band, 4) == pytest.approx(math.sqrt(3) / 4)
    assert math.isinf(band_decoherence_time(BandSpec(width=1.0, theta=0.0)))


# ===== figure scenarios =====

def test_fig2_panels():
    spin_a, t = make_fig2_spin("a")
    assert isinstance(spin_a, SpinSpec)
    assert t == pytest.approx(15 * math.pi / 64)
    assert make_fig2_spin("b")[0].init.a == pytest.approx(11 / 16)
    assert make_fig2_spin("c")[0].omega == pytest.approx(math.pi / 2)
    with pytest.raises(ConfigError):
        make_fig2_spin("d")


@pytest.mark.slow
def test_fig3_decoherence_time_and_onset():
    sc = make_fig3_scenario(10000, seed=17)
    env = realize_environment(sc.environment)
    tau_d = decoherence_time(env)
    assert tau_d == pytest.approx(math.sqrt(3) / 4, rel=0.02)
    assert onset_time(math.sqrt(3) / 4, sc.delta) == pytest.approx(3.717, abs=1e-3)
    assert len(sc.times) == 41


def test_fig3_early_growth_is_quadratic():
    sc = make_fig3_scenario(2000, seed=5)
    env = realize_environment(sc.environment)
    tau_d = decoherence_time(env)
    for t in (0.05, 0.1):
        xi = -math.log(mean_overlap(env, t))
        qcb = redundancy_qcb(xi, len(env), sc.delta).r_delta
        assert qcb == pytest.approx(redundancy_gaussian(1.0, tau_d, t, sc.delta), rel=1e-2)


def test_fig4_scenario_spins():
    sc = make_fig4_scenario(0.2, 0.125, 0.3)
    env = realize_environment(sc.environment)
    assert len(env) == 100
    assert all(s.g == pytest.approx(0.1) for s in env)
    assert env[0].init.a == pytest.approx(0.9378, abs=1e-4)
    assert sc.system.p_up == 0.125


@pytest.mark.parametrize("h", [0.0, 0.2, 0.5, 0.8])
@pytest.mark.parametrize("t", [0.1, math.pi / 8])
def test_fig4_scaling_with_haziness(h, t):
    lam = MixednessFactor.from_bloch_length(haziness_to_bloch_length(h)).lam
    ratio = fig4_relative_redundancy(h, 0.5, t, n_env=1000)
    assert ratio == pytest.approx(lam * (8 * t / math.pi) ** 2, rel=1e-2)


def test_fig4_ordering_and_prior_independence():
    values = [fig4_redundancy(h, 0.5, 0.3) for h in (0.0, 0.2, 0.5, 0.8)]
    assert values == sorted(values, reverse=True)
    assert fig4_redundancy(0.2, 0.125, 0.3) == pytest.approx(fig4_redundancy(0.2, 0.5, 0.3))


def test_fig5_discretized_plateaus():
    sc = make_fig5_scenario()
    env = realize_environment(sc.environment)
    assert len(env) == 32 and len(sc.times) == 100
    assert all(0.0 <= s.g <= 1.0 for s in env)
    for t in sc.times[1:]:
        res = redundancy_discretized(env, t, sc.delta)
        assert res.f_delta >= 1 and res.f_delta == int(res.f_delta)
        assert res.r_delta == pytest.approx(32 / res.f_delta)
        assert res.f_delta >= res.diagnostics["f_continuous"] - 1e-12
