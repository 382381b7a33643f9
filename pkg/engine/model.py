"""
Scenario model - system qubit, environment spins, distributions, realization.

The pydantic models below ARE the config-file contract: a YAML `scenario:` block
validates straight into `Scenario`.
"""
import logging
import math
from typing import Annotated, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.config import DEFAULT_SEED
from utils.errors import BadDistribution, ScenarioValidationError
from utils.qmath import QubitState

logger = logging.getLogger(__name__)

# Stream purposes for the counter-based generator; (seed, purpose, index) names a stream
SPIN_STREAM = 0
DRAW_STREAM = 1


def stream(seed: int, purpose: int, index: int) -> np.random.Generator:
    """Independent Philox stream for (seed, purpose, index), independent of partitioning."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), purpose, int(index)])))


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")


# ===== distributions =====

class ConstantDist(_Frozen):
    kind: Literal["constant"] = "constant"
    value: float

    def support(self) -> Tuple[float, float]:
        return self.value, self.value

    def draw(self, rng: np.random.Generator) -> float:
        return self.value


class UniformDist(_Frozen):
    kind: Literal["uniform"] = "uniform"
    lo: float
    hi: float

    @model_validator(mode="after")
    def _ordered(self):
        if self.lo > self.hi:
            raise BadDistribution(f"uniform lo={self.lo} > hi={self.hi}")
        return self

    def support(self) -> Tuple[float, float]:
        return self.lo, self.hi

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))


class DiscreteDist(_Frozen):
    kind: Literal["discrete"] = "discrete"
    values: List[float]

    @field_validator("values")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise BadDistribution("discrete distribution with empty support")
        return v

    def support(self) -> Tuple[float, float]:
        return min(self.values), max(self.values)

    def draw(self, rng: np.random.Generator) -> float:
        return float(self.values[int(rng.integers(len(self.values)))])


Distribution = Annotated[Union[ConstantDist, UniformDist, DiscreteDist], Field(discriminator="kind")]


def _constant_shorthand(v):
    """Let configs write `theta: 1.5708` instead of `{kind: constant, value: 1.5708}`."""
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return {"kind": "constant", "value": float(v)}
    return v


def check_distribution(dist, lo: float = -math.inf, hi: float = math.inf, name: str = "distribution"):
    if isinstance(dist, DiscreteDist) and not dist.values:
        raise BadDistribution(f"{name}: empty support")
    if isinstance(dist, UniformDist) and dist.lo > dist.hi:
        raise BadDistribution(f"{name}: lo={dist.lo} > hi={dist.hi}")
    s_lo, s_hi = dist.support()
    if s_lo < lo or s_hi > hi:
        raise BadDistribution(f"{name}: support [{s_lo}, {s_hi}] leaves [{lo}, {hi}]")


# ===== specs =====

class SpinSpec(_Frozen):
    """One environment spin: coupling g, x-field omega, initial state."""

    g: float
    omega: float = 0.0
    init: QubitState


class SystemSpec(_Frozen):
    p_up: float = Field(gt=0.0, lt=1.0)
    coherence: Optional[float] = None

    @field_validator("coherence")
    @classmethod
    def _coherence_range(cls, v, info):
        if v is None:
            return v
        p = info.data.get("p_up")
        if p is None:
            return v
        if v < 0 or v > math.sqrt(p * (1.0 - p)) + 1e-15:
            raise ValueError(f"coherence {v} outside [0, sqrt(p_up p_down)]")
        return v

    @property
    def p_down(self) -> float:
        return 1.0 - self.p_up

    @property
    def coherence_magnitude(self) -> float:
        pure = math.sqrt(self.p_up * self.p_down)
        return pure if self.coherence is None else self.coherence

    @property
    def is_pure(self) -> bool:
        return abs(self.coherence_magnitude - math.sqrt(self.p_up * self.p_down)) <= 1e-12


class SymmetricEnv(_Frozen):
    kind: Literal["symmetric"] = "symmetric"
    spin: SpinSpec
    count: int = Field(ge=1)
    gaussian_scaling: bool = False


class ExplicitEnv(_Frozen):
    kind: Literal["explicit"] = "explicit"
    spins: List[SpinSpec] = Field(min_length=1)
    gaussian_scaling: bool = False

    @property
    def count(self) -> int:
        return len(self.spins)


class RandomEnv(_Frozen):
    kind: Literal["random"] = "random"
    g: Distribution
    omega: Distribution = ConstantDist(value=0.0)
    theta: Distribution = ConstantDist(value=math.pi / 2)
    phi: Distribution = ConstantDist(value=0.0)
    a: Distribution = ConstantDist(value=1.0)
    count: int = Field(ge=1)
    gaussian_scaling: bool = False

    @field_validator("g", "omega", "theta", "phi", "a", mode="before")
    @classmethod
    def _shorthand(cls, v):
        return _constant_shorthand(v)

    @model_validator(mode="after")
    def _supports(self):
        check_distribution(self.theta, 0.0, math.pi, "theta")
        check_distribution(self.a, 0.0, 1.0, "a")
        return self


EnvironmentVariant = Annotated[Union[SymmetricEnv, ExplicitEnv, RandomEnv], Field(discriminator="kind")]


class EnvironmentSpec(_Frozen):
    variant: EnvironmentVariant
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)

    @property
    def count(self) -> int:
        return self.variant.count


class Scenario(_Frozen):
    system: SystemSpec
    environment: EnvironmentSpec
    times: List[float] = Field(min_length=1)
    delta: float = Field(gt=0.0, le=0.5)

    @field_validator("times", mode="before")
    @classmethod
    def _grid(cls, v):
        """`times: {start: 0, stop: 20, num: 41}` expands to an evenly spaced list."""
        if isinstance(v, Mapping):
            missing = {"start", "stop", "num"} - set(v)
            if missing:
                raise ValueError(f"time grid needs {sorted(missing)}")
            return np.linspace(float(v["start"]), float(v["stop"]), int(v["num"])).tolist()
        return v

    @field_validator("times")
    @classmethod
    def _ascending(cls, v):
        if any(t < 0 for t in v):
            raise ValueError("times must be nonnegative")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("times must be ascending")
        return v


# ===== operations =====

def validate(sc: Union[Scenario, Mapping]) -> Scenario:
    """Check every invariant; raise ScenarioValidationError listing all 'field.path: message' problems."""
    data = sc.model_dump() if isinstance(sc, Scenario) else sc
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            path = ".".join(str(p) for p in err["loc"]) or "scenario"
            problems.append(f"{path}: {err['msg']}")
        raise ScenarioValidationError(problems) from None


def _scaled(spins: List[SpinSpec], count: int) -> List[SpinSpec]:
    scale = 1.0 / math.sqrt(count)
    return [s.model_copy(update={"g": s.g * scale}) for s in spins]


def realize_environment(spec: EnvironmentSpec) -> List[SpinSpec]:
    """Concrete spin list. Deterministic in (spec, seed); spin k draws from its own stream."""
    v = spec.variant
    if isinstance(v, SymmetricEnv):
        spins = [v.spin] * v.count
    elif isinstance(v, ExplicitEnv):
        spins = list(v.spins)
    else:
        for name in ("g", "omega", "theta", "phi", "a"):
            check_distribution(getattr(v, name), name=name)
        check_distribution(v.theta, 0.0, math.pi, "theta")
        check_distribution(v.a, 0.0, 1.0, "a")
        spins = []
        for k in range(v.count):
            rng = stream(spec.seed, SPIN_STREAM, k)
            # Fixed draw order: g, omega, theta, phi, a
            g = v.g.draw(rng)
            omega = v.omega.draw(rng)
            theta = v.theta.draw(rng)
            phi = v.phi.draw(rng)
            a = v.a.draw(rng)
            spins.append(SpinSpec(g=g, omega=omega, init=QubitState(a=a, theta=theta, phi=phi)))
        logger.debug("realized %d random spins (seed=%d)", v.count, spec.seed)

    if v.gaussian_scaling:
        # g_k = G_k / sqrt(#E)
        if isinstance(v, SymmetricEnv):
            return [_scaled([v.spin], v.count)[0]] * v.count
        return _scaled(spins, v.count)
    return spins
