"""
Ensembles - coupling-band averages, haziness and the ready-made figure scenarios.

Band: couplings g ~ U[0, W] with lambda and theta shared by every spin.
    <1 - lambda sin^2(2gt) sin^2(theta)>_g = 1 - lambda sin^2(theta) [1/2 - sin(4Wt)/(8Wt)]
The quadrature version of the same average is kept as the reference it is checked against.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import Field
from scipy import integrate, optimize

from config.config import DEFAULT_SEED
from engine.chernoff import RedundancyResult, mean_overlap, redundancy_qcb
from engine.model import (
    ConstantDist,
    EnvironmentSpec,
    RandomEnv,
    Scenario,
    SpinSpec,
    SymmetricEnv,
    SystemSpec,
    UniformDist,
    _Frozen,
    realize_environment,
)
from utils.errors import BadDelta, BadHaziness, ConfigError
from utils.qmath import QubitState, binary_entropy

logger = logging.getLogger(__name__)

FIG2_TIME = 15 * math.pi / 64
FIG4_REFERENCE_TIME = math.pi / 8


class BandSpec(_Frozen):
    width: float = Field(gt=0.0)
    lam: float = Field(1.0, ge=0.0, le=1.0)
    theta: float = Field(math.pi / 2, ge=0.0, le=math.pi)


@dataclass(frozen=True)
class Haziness:
    """Initial entropy h = H[(1 + a)/2] of an environment spin, in bits."""

    h: float

    def __post_init__(self):
        if not (0.0 <= self.h < 1.0) or not math.isfinite(self.h):
            raise BadHaziness(f"haziness {self.h} outside [0, 1); h = 1 is the fully mixed spin")


# ===== mixedness conversions =====

def haziness_to_bloch_length(h) -> float:
    h = h if isinstance(h, Haziness) else Haziness(float(h))
    if h.h == 0.0:
        return 1.0

    def excess(a: float) -> float:
        return binary_entropy(0.5 * (1.0 + a)) - h.h

    # excess(0) = 1 - h > 0 and excess(1) = -h < 0
    return float(optimize.bisect(excess, 0.0, 1.0, xtol=1e-12, maxiter=200))


def bloch_length_from_lambda(lam: float) -> float:
    """Inverse of lambda = 1 - sqrt(1 - a^2)."""
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"mixedness factor {lam} outside [0, 1]")
    return math.sqrt(max(0.0, 1.0 - (1.0 - lam) ** 2))


# ===== band averages =====

def band_mean_overlap(band: BandSpec, t):
    """Exact coupling average of the per-spin overlap; 1 at t = 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ConfigError("time must be nonnegative")
    x = 4.0 * band.width * t_arr
    # np.sinc(x/pi) = sin(x)/x with the x -> 0 limit built in
    mean_sin2 = 0.5 - 0.5 * np.sinc(x / math.pi)
    value = 1.0 - band.lam * math.sin(band.theta) ** 2 * mean_sin2
    return float(value) if value.ndim == 0 else value


def band_mean_overlap_quadrature(band: BandSpec, t: float) -> float:
    """(1/W) integral_0^W [1 - lambda sin^2(2gt) sin^2(theta)] dg by adaptive quadrature."""
    sin2_theta = math.sin(band.theta) ** 2

    def integrand(g: float) -> float:
        return 1.0 - band.lam * math.sin(2.0 * g * t) ** 2 * sin2_theta

    # Oscillation count grows with W t; give quad enough subintervals
    limit = max(50, int(4 * band.width * t) + 50)
    value, _ = integrate.quad(integrand, 0.0, band.width, epsabs=1e-13, epsrel=1e-13, limit=limit)
    return value / band.width


def band_redundancy(band: BandSpec, n_env: int, t: float, delta: float) -> RedundancyResult:
    overlap = band_mean_overlap(band, t)
    return redundancy_qcb(max(0.0, -math.log(max(overlap, 1e-300))), n_env, delta)


def band_asymptote(band: BandSpec, n_env: int, delta: float) -> float:
    """t -> infinity centre of the oscillation: -#E ln(1 - lambda sin^2(theta)/2) / ln(1/delta)."""
    if not (0.0 < delta < 1.0):
        raise BadDelta(f"delta={delta} outside (0, 1)")
    centre = 1.0 - 0.5 * band.lam * math.sin(band.theta) ** 2
    return -n_env * math.log(centre) / math.log(1.0 / delta)


def band_decoherence_time(band: BandSpec, n_env: int = 1) -> float:
    """tau_D of the whole band, 1/tau_D^2 = #E (4 W^2/3) sin^2(theta)."""
    inv_tau2 = n_env * 4.0 * band.width ** 2 / 3.0 * math.sin(band.theta) ** 2
    return math.inf if inv_tau2 == 0 else 1.0 / math.sqrt(inv_tau2)


# ===== figure scenarios =====

def make_fig2_spin(panel: str = "a") -> Tuple[SpinSpec, float]:
    """Bloch-mesh spins: a) a=1, g=1/2, omega=0  b) a=11/16  c) omega=pi/2; all at t = 15 pi/64."""
    panels = {
        "a": (1.0, 0.0),
        "b": (11.0 / 16.0, 0.0),
        "c": (1.0, math.pi / 2),
    }
    if panel not in panels:
        raise ConfigError(f"unknown panel '{panel}', expected one of {sorted(panels)}")
    a, omega = panels[panel]
    spin = SpinSpec(g=0.5, omega=omega, init=QubitState(a=a, theta=math.pi / 2, phi=0.0))
    return spin, FIG2_TIME


def _times(times: Optional[Sequence[float]], stop: float, num: int):
    return list(times) if times is not None else np.linspace(0.0, stop, num).tolist()


def make_fig3_scenario(n_env: int, seed: int = DEFAULT_SEED, times: Optional[Sequence[float]] = None,
                       delta: float = 1e-16) -> Scenario:
    """G ~ U[-2, 2] with g = G/sqrt(#E), theta = pi/2, p_up = 1/2: tau_D -> sqrt(3)/4."""
    return Scenario(
        system=SystemSpec(p_up=0.5),
        environment=EnvironmentSpec(
            variant=RandomEnv(
                g=UniformDist(lo=-2.0, hi=2.0),
                theta=ConstantDist(value=math.pi / 2),
                count=n_env,
                gaussian_scaling=True,
            ),
            seed=seed,
        ),
        times=_times(times, 20.0, 41),
        delta=delta,
    )


def make_fig4_scenario(h, p_up: float, t: float, n_env: int = 100, delta: float = 1e-16) -> Scenario:
    """Identical spins, g_k = 1 scaled by 1/sqrt(#E), theta = pi/2, Bloch length from the haziness."""
    a = haziness_to_bloch_length(h)
    spin = SpinSpec(g=1.0, omega=0.0, init=QubitState(a=a, theta=math.pi / 2, phi=0.0))
    return Scenario(
        system=SystemSpec(p_up=p_up),
        environment=EnvironmentSpec(variant=SymmetricEnv(spin=spin, count=n_env, gaussian_scaling=True)),
        times=[t],
        delta=delta,
    )


def make_fig5_scenario(n_env: int = 32, delta: float = 0.1, seed: int = DEFAULT_SEED,
                       times: Optional[Sequence[float]] = None) -> Scenario:
    """One set of spins with couplings g ~ U[0, 1], unscaled, theta = pi/2."""
    return Scenario(
        system=SystemSpec(p_up=0.5),
        environment=EnvironmentSpec(
            variant=RandomEnv(
                g=UniformDist(lo=0.0, hi=1.0),
                theta=ConstantDist(value=math.pi / 2),
                count=n_env,
            ),
            seed=seed,
        ),
        times=_times(times, 20.0, 100),
        delta=delta,
    )


def fig4_redundancy(h, p_up: float, t: float, n_env: int = 100, delta: float = 1e-16) -> float:
    sc = make_fig4_scenario(h, p_up, t, n_env=n_env, delta=delta)
    env = realize_environment(sc.environment)
    xi = max(0.0, -math.log(max(mean_overlap(env, t), 1e-300)))
    return redundancy_qcb(xi, len(env), delta).r_delta


def fig4_relative_redundancy(h, p_up: float, t: float, n_env: int = 100, delta: float = 1e-16) -> float:
    """R(h, t) / R(0, pi/8); at small g t this is lambda(h) (8 t / pi)^2."""
    reference = fig4_redundancy(0.0, p_up, FIG4_REFERENCE_TIME, n_env, delta)
    return fig4_redundancy(h, p_up, t, n_env, delta) / reference
