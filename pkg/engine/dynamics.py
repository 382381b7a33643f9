"""
Conditional dynamics of environment spins under H = sigma_S^z sum g_k sigma_k^z + sum omega_k sigma_k^x.

For pointer state s (up: +1, down: -1) spin k evolves with V_s = exp(-i t (s g sigma_z + omega sigma_x)).
hbar = 1; time and frequency are reciprocal dimensionless units.

Scalar operations take a SpinSpec; the `*_arrays` variants evaluate the same closed forms
over a whole environment at once and power the large-#E paths.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from engine.model import SpinSpec
from utils.errors import ConfigError
from utils.qmath import (
    IDENTITY2,
    SIGMA_X,
    SIGMA_Z,
    QubitState,
    bloch_components,
    bloch_to_density,
    density_to_bloch,
)


class Pointer(str, Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        return 1 if self is Pointer.UP else -1


@dataclass(frozen=True)
class ConditionalPair:
    """rho_{k|up}, rho_{k|down}, gamma_k and the Bloch separation angle Theta."""

    up: QubitState
    down: QubitState
    gamma: complex
    theta_sep: float
    rho_up: np.ndarray
    rho_down: np.ndarray


@dataclass(frozen=True)
class InsensitiveAxis:
    """'+' branch: theta* = arctan[omega tan(w t)/w] in (-pi/2, pi/2], phi* = pi/2."""

    theta_star: float
    phi_star: float

    @property
    def direction(self) -> np.ndarray:
        st = math.sin(self.theta_star)
        return np.array([st * math.cos(self.phi_star), st * math.sin(self.phi_star), math.cos(self.theta_star)])

    def as_state(self, a: float = 1.0) -> QubitState:
        """A state of Bloch length a pointing along the axis (negative theta* folded over the pole)."""
        if self.theta_star < 0:
            return QubitState(a=a, theta=-self.theta_star, phi=self.phi_star + math.pi)
        return QubitState(a=a, theta=self.theta_star, phi=self.phi_star)


def _check_time(t: float):
    if not math.isfinite(t) or t < 0:
        raise ConfigError(f"time must be finite and nonnegative, got {t}")


def effective_field(spin: SpinSpec) -> float:
    """w_k = sqrt(g_k^2 + omega_k^2)."""
    return math.hypot(spin.g, spin.omega)


def conditional_unitary(spin: SpinSpec, s: Pointer, t: float) -> np.ndarray:
    """cos(wt) I - i sin(wt)/w (s g sigma_z + omega sigma_x)."""
    _check_time(t)
    s = Pointer(s)
    w = effective_field(spin)
    if w == 0.0:
        return IDENTITY2.copy()
    generator = s.sign * spin.g * SIGMA_Z + spin.omega * SIGMA_X
    return math.cos(w * t) * IDENTITY2 - 1j * (math.sin(w * t) / w) * generator


def separation_angle(r1: np.ndarray, r2: np.ndarray) -> float:
    """Angle between two Bloch vectors via atan2(|r1 x r2|, r1.r2); stable near 0 and pi."""
    return float(math.atan2(np.linalg.norm(np.cross(r1, r2)), float(np.dot(r1, r2))))


def conditional_states(spin: SpinSpec, t: float) -> ConditionalPair:
    rho = bloch_to_density(spin.init)
    v_up = conditional_unitary(spin, Pointer.UP, t)
    v_down = conditional_unitary(spin, Pointer.DOWN, t)
    rho_up = v_up @ rho @ v_up.conj().T
    rho_down = v_down @ rho @ v_down.conj().T
    gamma = complex(np.trace(v_up @ rho @ v_down.conj().T))
    theta_sep = separation_angle(bloch_components(rho_up), bloch_components(rho_down))
    return ConditionalPair(
        up=density_to_bloch(rho_up),
        down=density_to_bloch(rho_down),
        gamma=gamma,
        theta_sep=theta_sep,
        rho_up=rho_up,
        rho_down=rho_down,
    )


def decoherence_factor_spin(spin: SpinSpec, t: float) -> complex:
    """gamma_k = tr[V_up rho_k(0) V_down^dagger]."""
    rho = bloch_to_density(spin.init)
    v_up = conditional_unitary(spin, Pointer.UP, t)
    v_down = conditional_unitary(spin, Pointer.DOWN, t)
    return complex(np.trace(v_up @ rho @ v_down.conj().T))


def insensitive_axis(spin: SpinSpec, t: float) -> InsensitiveAxis:
    _check_time(t)
    w = effective_field(spin)
    if w == 0.0 or spin.omega == 0.0:
        # omega = 0: the z-axis
        return InsensitiveAxis(theta_star=0.0, phi_star=math.pi / 2)
    # arctan[omega tan(wt)/w] written as atan2 so the tan poles pass through continuously
    theta = math.atan2(spin.omega * math.sin(w * t) / w, math.cos(w * t))
    if theta > math.pi / 2:
        theta -= math.pi
    elif theta <= -math.pi / 2:
        theta += math.pi
    return InsensitiveAxis(theta_star=theta, phi_star=math.pi / 2)


# ===== vectorized closed forms =====

@dataclass(frozen=True)
class SpinArrays:
    g: np.ndarray
    omega: np.ndarray
    a: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    @classmethod
    def from_spins(cls, spins: Sequence[SpinSpec]) -> "SpinArrays":
        return cls(
            g=np.array([s.g for s in spins], dtype=float),
            omega=np.array([s.omega for s in spins], dtype=float),
            a=np.array([s.init.a for s in spins], dtype=float),
            theta=np.array([s.init.theta for s in spins], dtype=float),
            phi=np.array([s.init.phi for s in spins], dtype=float),
        )

    def __len__(self):
        return self.g.shape[0]

    def take(self, idx) -> "SpinArrays":
        return SpinArrays(self.g[idx], self.omega[idx], self.a[idx], self.theta[idx], self.phi[idx])

    @property
    def directions(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)

    @property
    def mixedness(self) -> np.ndarray:
        """lambda = 1 - sqrt(1 - a^2)."""
        return 1.0 - np.sqrt(np.clip(1.0 - self.a ** 2, 0.0, 1.0))

    @property
    def is_pure(self) -> bool:
        return bool(np.all(self.a >= 1.0 - 1e-12))


def relative_rotation_arrays(g: np.ndarray, omega: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """D = V_down^dagger V_up = d0 I - i d.sigma, returned as (d0, d with shape (n, 3))."""
    w = np.hypot(g, omega)
    safe = np.where(w > 0, w, 1.0)
    c = np.cos(w * t)
    s = np.sin(w * t)
    d0 = np.where(w > 0, c ** 2 + s ** 2 * (omega ** 2 - g ** 2) / safe ** 2, 1.0)
    dy = np.where(w > 0, 2.0 * s ** 2 * g * omega / safe ** 2, 0.0)
    dz = np.where(w > 0, 2.0 * c * s * g / safe, 0.0)
    return d0, np.stack([np.zeros_like(d0), dy, dz], axis=-1)


def decoherence_factors(arrs: SpinArrays, t: float) -> np.ndarray:
    """Per-spin gamma_k = tr[D rho_k(0)] = d0 - i a (d . n)."""
    _check_time(t)
    d0, d = relative_rotation_arrays(arrs.g, arrs.omega, t)
    proj = np.einsum("ij,ij->i", d, arrs.directions)
    return d0 - 1j * arrs.a * proj


def gamma_abs2_arrays(arrs: SpinArrays, t: float) -> np.ndarray:
    gam = decoherence_factors(arrs, t)
    return np.clip(gam.real ** 2 + gam.imag ** 2, 0.0, 1.0)


def axis_directions(arrs: SpinArrays, t: float) -> np.ndarray:
    """Unit insensitive axes (0, omega sin(wt)/w, cos(wt)) / norm; z where degenerate."""
    w = np.hypot(arrs.g, arrs.omega)
    safe = np.where(w > 0, w, 1.0)
    my = np.where(w > 0, arrs.omega * np.sin(w * t) / safe, 0.0)
    mz = np.where(w > 0, np.cos(w * t), 1.0)
    norm = np.hypot(my, mz)
    degenerate = norm < 1e-300
    norm = np.where(degenerate, 1.0, norm)
    return np.stack([np.zeros_like(my), np.where(degenerate, 0.0, my / norm), np.where(degenerate, 1.0, mz / norm)], axis=-1)


def decoherence_factor_fragment(spins: Sequence[SpinSpec], t: float) -> complex:
    """gamma = prod_k gamma_k; the empty product is 1."""
    _check_time(t)
    if len(spins) == 0:
        return 1.0 + 0.0j
    return complex(np.prod(decoherence_factors(SpinArrays.from_spins(spins), t)))
