"""Full-size scenario runs and 10^3-case oracle suites. Deselect with -m 'not slow'."""
import math

import numpy as np
import pytest

from engine.chernoff import (
    MixednessFactor,
    decoherence_time,
    fano_lower_bound,
    helstrom_error,
    onset_time,
    optimize_c,
    recurrence_time,
    redundancy_discretized,
    redundancy_gaussian,
    redundancy_qcb,
    xi_bar_typical,
    xi_closed_field,
    xi_closed_mixed,
)
from engine.dynamics import conditional_states, decoherence_factor_fragment, decoherence_factor_spin
from engine.ensembles import make_fig3_scenario, make_fig4_scenario, make_fig5_scenario
from engine.holevo import (
    FragmentSelection,
    find_fragment_size,
    holevo_curve,
    holevo_dense,
    holevo_pure_closed,
    redundancy_exact,
    system_entropy,
)
from engine.model import SystemSpec, realize_environment
from tests.conftest import random_spins
from utils.errors import TooManySubsets
from utils.qmath import kron

pytestmark = pytest.mark.slow

CASES = 1000


# ===== Gaussian environment =====

def test_exact_redundancy_follows_chernoff_estimate_past_onset():
    sc = make_fig3_scenario(10000, seed=17)
    env = realize_environment(sc.environment)
    t_star = onset_time(decoherence_time(env), sc.delta)
    assert t_star == pytest.approx(3.717, rel=0.02)

    for t in (3.9, 5.0, 8.0, 12.0, 20.0):
        qcb = redundancy_qcb(xi_bar_typical(env, t), len(env), sc.delta).r_delta
        assert qcb >= 2
        exact = redundancy_exact(sc.system, env, t, sc.delta, samples=10000, seed=1)
        assert exact.r_delta == pytest.approx(qcb, rel=0.1)

    before = redundancy_exact(sc.system, env, 0.95 * t_star, sc.delta, samples=10000, seed=1)
    after = redundancy_exact(sc.system, env, 1.05 * t_star, sc.delta, samples=10000, seed=1)
    assert before.r_delta < 2 <= after.r_delta


@pytest.mark.parametrize("n_env", [256, 1024])
def test_finite_environment_grows_quadratically_early(n_env):
    sc = make_fig3_scenario(n_env, seed=3)
    env = realize_environment(sc.environment)
    tau_d = decoherence_time(env)
    t_star = onset_time(tau_d, sc.delta)
    t_rec = recurrence_time(env)
    # t_star / t_rec = 2 sqrt(2 ln 1/delta) / (pi sqrt(#E)), seed independent
    assert t_star < 0.4 * t_rec
    for t in np.linspace(1.02 * t_star, 0.4 * t_rec, 4):
        exact = redundancy_exact(sc.system, env, t, sc.delta, samples=10000, seed=2)
        assert exact.r_delta == pytest.approx(redundancy_gaussian(1.0, tau_d, t, sc.delta), rel=0.1)


@pytest.mark.parametrize("n_env", [64, 256, 1024])
def test_finite_environment_falls_behind_quadratic_law(n_env):
    sc = make_fig3_scenario(n_env, seed=3)
    env = realize_environment(sc.environment)
    tau_d = decoherence_time(env)
    t_rec = recurrence_time(env)
    exact = redundancy_exact(sc.system, env, t_rec, sc.delta, samples=10000, seed=2)
    assert exact.r_delta < 0.9 * redundancy_gaussian(1.0, tau_d, t_rec, sc.delta)


# ===== mixed environments =====

@pytest.mark.parametrize("p_up", [0.5, 0.125, 0.03125])
def test_dense_holevo_orders_by_haziness(p_up):
    t = 1.0
    curves = []
    for h in (0.0, 0.2, 0.4, 0.6, 0.8):
        sc = make_fig4_scenario(h, p_up, t, n_env=8)
        env = realize_environment(sc.environment)
        curves.append([e.mean_chi for e in holevo_curve(sc.system, env, t, range(1, 9))])
    for hazier, clearer in zip(curves[1:], curves):
        assert all(c >= m - 1e-12 for c, m in zip(clearer, hazier))
    assert curves[0][-1] > curves[-1][-1]


# ===== oscillating environment =====

def _fig5_fragment_size(system, env, t, delta):
    try:
        return find_fragment_size(system, env, t, delta, mode="enumerate")
    except TooManySubsets:
        return find_fragment_size(system, env, t, delta, mode="monte_carlo", samples=4000, seed=1)


def test_enumerated_fragment_sizes_track_discretized_estimate():
    sc = make_fig5_scenario()
    env = realize_environment(sc.environment)
    n = len(env)
    unreachable = n + 1
    close = 0
    plateaus = set()
    for t in sc.times[1:]:
        found = _fig5_fragment_size(sc.system, env, t, sc.delta)
        exact_f = found.f_delta if found.reached else unreachable
        if found.reached:
            plateaus.add(exact_f)
        qcb_f = min(int(redundancy_discretized(env, t, sc.delta).f_delta), unreachable)
        close += abs(exact_f - qcb_f) <= 1
    # t = 0 carries no record on either side
    assert close + 1 >= 90
    # R oscillates between several plateaus n / F
    assert len(plateaus) >= 2


# ===== oracle suites =====

def test_closed_holevo_matches_dense_route():
    rng = np.random.default_rng(101)
    for _ in range(CASES):
        system = SystemSpec(p_up=rng.uniform(0.02, 0.98))
        env = random_spins(rng, int(rng.integers(1, 11)), pure=True)
        t = rng.uniform(0, 6)
        gamma = decoherence_factor_fragment(env, t)
        frag = FragmentSelection(range(len(env)))
        assert holevo_dense(system, env, frag, t) == pytest.approx(holevo_pure_closed(system, gamma), abs=1e-10)


def test_closed_chernoff_matches_matrix_route():
    rng = np.random.default_rng(202)
    for s in random_spins(rng, CASES):
        t = rng.uniform(0.1, 6)
        pair = conditional_states(s, t)
        matrix = optimize_c(pair.rho_up, pair.rho_down, expect_symmetric=True)
        assert abs(matrix.c_star - 0.5) < 1e-6
        assert xi_closed_field(s, t) == pytest.approx(matrix.xi, abs=1e-10)
        lam = MixednessFactor.from_bloch_length(s.init.a)
        assert xi_closed_mixed(lam, pair.theta_sep) == pytest.approx(matrix.xi, abs=1e-10)


def test_pure_overlap_is_half_angle_cosine():
    rng = np.random.default_rng(303)
    for s in random_spins(rng, CASES, pure=True):
        t = rng.uniform(0, 6)
        gamma2 = abs(decoherence_factor_spin(s, t)) ** 2
        assert gamma2 == pytest.approx(math.cos(conditional_states(s, t).theta_sep / 2) ** 2, abs=1e-10)


def test_holevo_never_below_fano_bound():
    rng = np.random.default_rng(404)
    violations = 0
    for _ in range(CASES):
        system = SystemSpec(p_up=rng.uniform(0.02, 0.98))
        env = random_spins(rng, int(rng.integers(1, 9)))
        t = rng.uniform(0, 6)
        pairs = [conditional_states(s, t) for s in env]
        p_e = helstrom_error(system, kron([p.rho_up for p in pairs]), kron([p.rho_down for p in pairs]))
        chi = holevo_dense(system, env, FragmentSelection(range(len(env))), t)
        violations += chi < fano_lower_bound(system_entropy(system), p_e) - 1e-10
    assert violations == 0
