import math

import pytest
from pydantic import ValidationError

from engine.model import (
    ConstantDist,
    EnvironmentSpec,
    RandomEnv,
    Scenario,
    SymmetricEnv,
    UniformDist,
    realize_environment,
    validate,
)
from utils.errors import BadDistribution, ScenarioValidationError


def scenario_dict(**overrides):
    data = {
        "system": {"p_up": 0.5},
        "environment": {
            "seed": 7,
            "variant": {
                "kind": "random",
                "count": 20,
                "g": {"kind": "uniform", "lo": -2.0, "hi": 2.0},
                "theta": math.pi / 2,
            },
        },
        "times": [0.0, 1.0, 2.0],
        "delta": 0.1,
    }
    data.update(overrides)
    return data


def test_validate_accepts_good_scenario():
    sc = validate(scenario_dict())
    assert isinstance(sc, Scenario)
    assert sc.environment.count == 20
    assert isinstance(sc.environment.variant.theta, ConstantDist)


def test_validate_reports_field_paths():
    with pytest.raises(ScenarioValidationError) as info:
        validate(scenario_dict(system={"p_up": 1.0}))
    assert any(p.startswith("system.p_up") for p in info.value.problems)


def test_validate_collects_every_problem():
    with pytest.raises(ScenarioValidationError) as info:
        validate(scenario_dict(system={"p_up": 1.5}, delta=0.7))
    paths = [p.split(":")[0] for p in info.value.problems]
    assert "system.p_up" in paths
    assert "delta" in paths


def test_times_must_ascend():
    with pytest.raises(ScenarioValidationError) as info:
        validate(scenario_dict(times=[2.0, 1.0]))
    assert any(p.startswith("times") for p in info.value.problems)


def test_time_grid_shorthand():
    sc = validate(scenario_dict(times={"start": 0, "stop": 2, "num": 5}))
    assert sc.times == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])


def test_bad_uniform_is_a_validation_error():
    data = scenario_dict()
    data["environment"]["variant"]["g"] = {"kind": "uniform", "lo": 1.0, "hi": -1.0}
    with pytest.raises(ScenarioValidationError) as info:
        validate(data)
    assert any(p.startswith("environment.variant") for p in info.value.problems)


def test_theta_support_checked():
    with pytest.raises(ValidationError):
        RandomEnv(g=1.0, theta=UniformDist(lo=0.0, hi=4.0), count=3)


def test_coherence_bounded_by_pure_value():
    with pytest.raises(ScenarioValidationError):
        validate(scenario_dict(system={"p_up": 0.5, "coherence": 0.6}))
    sc = validate(scenario_dict(system={"p_up": 0.5, "coherence": 0.2}))
    assert not sc.system.is_pure


def test_realization_is_deterministic_per_seed():
    spec = validate(scenario_dict()).environment
    first = realize_environment(spec)
    assert first == realize_environment(spec)
    other = realize_environment(spec.model_copy(update={"seed": 8}))
    assert [s.g for s in other] != [s.g for s in first]


def test_spin_streams_do_not_depend_on_count():
    small = EnvironmentSpec(variant=RandomEnv(g=UniformDist(lo=0, hi=1), count=5), seed=3)
    large = EnvironmentSpec(variant=RandomEnv(g=UniformDist(lo=0, hi=1), count=10), seed=3)
    assert realize_environment(small) == realize_environment(large)[:5]


def test_gaussian_scaling_divides_by_sqrt_count():
    variant = SymmetricEnv(spin={"g": 1.0, "init": {"a": 1.0, "theta": 1.0}}, count=4, gaussian_scaling=True)
    spins = realize_environment(EnvironmentSpec(variant=variant))
    assert len(spins) == 4
    assert all(s.g == pytest.approx(0.5) for s in spins)


def test_random_env_draws_in_support():
    spec = validate(scenario_dict()).environment
    spins = realize_environment(spec)
    assert all(-2.0 <= s.g <= 2.0 for s in spins)
    assert all(s.init.theta == pytest.approx(math.pi / 2) for s in spins)
    assert all(s.omega == 0.0 and s.init.a == 1.0 for s in spins)


def test_check_distribution_rejects_out_of_range():
    from engine.model import check_distribution

    with pytest.raises(BadDistribution):
        check_distribution(ConstantDist(value=1.5), 0.0, 1.0, "a")
