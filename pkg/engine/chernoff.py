"""
Quantum Chernoff information and the redundancy estimators built on it.

Units: xi is in nats (natural log, it is divided by ln 1/delta); entropies H and chi are in bits.
Anything mixing the two (Fano vs QCB, the corrected estimate) converts explicitly.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config.config import OVERLAP_FLOOR
from engine.dynamics import (
    SpinArrays,
    axis_directions,
    conditional_states,
    insensitive_axis,
)
from engine.model import SpinSpec, SystemSpec
from utils.errors import (
    BadDelta,
    BadExponent,
    BadProbability,
    ConfigError,
    DimMismatch,
    EmptyEnvironment,
    FieldPresent,
    NumericalError,
    TrivialSystem,
    ZeroInformation,
)
from utils.qmath import (
    DenseState,
    binary_entropy,
    check_state,
    fractional_power,
    psd_spectrum,
    trace_norm,
)

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class ChernoffResult:
    overlap: float
    c_star: float
    xi: float


@dataclass(frozen=True)
class MixednessFactor:
    """lambda = 1 - sqrt(4 lambda_- lambda_+) = 1 - sqrt(1 - a^2)."""

    lam: float

    @classmethod
    def from_bloch_length(cls, a: float) -> "MixednessFactor":
        return cls(1.0 - math.sqrt(max(0.0, 1.0 - a * a)))


@dataclass(frozen=True)
class RedundancyResult:
    xi_bar: float
    f_delta: float
    r_delta: float
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)


def _check_delta(delta: float):
    if not (0.0 < delta < 1.0):
        raise BadDelta(f"delta={delta} outside (0, 1)")


def _neg_log(overlap: float) -> float:
    return max(0.0, -math.log(max(overlap, OVERLAP_FLOOR)))


# ===== matrix route =====

def _powered(w: np.ndarray, c: float) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] ** c
    return out


def chernoff_overlap(rho1: np.ndarray, rho2: np.ndarray, c: float) -> float:
    """tr[rho1^c rho2^(1-c)], real part, clamped into [0, 1]."""
    if not (0.0 <= c <= 1.0):
        raise BadExponent(f"exponent c={c} outside [0, 1]")
    check_state(rho1)
    check_state(rho2)
    value = np.trace(fractional_power(rho1, c) @ fractional_power(rho2, 1.0 - c))
    if abs(value.imag) > 1e-12:
        logger.debug("overlap imaginary residue %.3e", value.imag)
    return min(1.0, max(0.0, float(value.real)))


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> Tuple[float, float]:
    """
    Golden-section search.

    Given f with a single local minimum in [a, b], return a bracket [c, d]
    containing the minimum with d - c <= tol.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc < yd:
        return a, d
    return c, b


def optimize_c(rho1: np.ndarray, rho2: np.ndarray, expect_symmetric: bool = False) -> ChernoffResult:
    """
    Minimize tr[rho1^c rho2^(1-c)] over c in [0, 1].

    Both spectra are computed once; the objective is then a double sum over eigenpairs.
    Flat objectives (equal or pure states) resolve ties toward c = 1/2.
    With expect_symmetric, a distinguishable pair whose optimum is not c = 1/2 raises NumericalError.
    """
    check_state(rho1)
    check_state(rho2)
    w1, u1 = psd_spectrum(rho1)
    w2, u2 = psd_spectrum(rho2)
    weights = np.abs(u1.conj().T @ u2) ** 2

    def objective(c: float) -> float:
        return float(_powered(w1, c) @ weights @ _powered(w2, 1.0 - c))

    lo, hi = golden_section(objective, 0.0, 1.0, tol=1e-9)
    best_c = 0.5 * (lo + hi)
    best = objective(best_c)
    for cand in (0.5, 0.0, 1.0):
        val = objective(cand)
        if val <= best + 1e-14 and (cand == 0.5 or val < best):
            best_c, best = cand, val
            if cand == 0.5:
                break

    overlap = min(1.0, max(0.0, best))
    if expect_symmetric and overlap < 1.0 - 1e-12 and abs(best_c - 0.5) >= 1e-6:
        raise NumericalError(
            "Chernoff optimum away from c = 1/2 for a conditional pair",
            {"c_star": best_c, "overlap": overlap},
        )
    return ChernoffResult(overlap=overlap, c_star=best_c, xi=_neg_log(overlap))


# ===== closed forms =====

def field_factor(g, omega, t: float):
    """f(t) = [g^4 sin^2(2wt) + 4 g^2 omega^2 sin^2(wt)] / w^4, w = sqrt(g^2 + omega^2)."""
    g = np.asarray(g, dtype=float)
    omega = np.asarray(omega, dtype=float)
    w2 = g ** 2 + omega ** 2
    w = np.sqrt(w2)
    safe = np.where(w2 > 0, w2, 1.0)
    f = np.where(
        w2 > 0,
        (g ** 4 * np.sin(2 * w * t) ** 2 + 4 * g ** 2 * omega ** 2 * np.sin(w * t) ** 2) / safe ** 2,
        0.0,
    )
    f = np.clip(f, 0.0, 1.0)
    return float(f) if f.ndim == 0 else f


def overlaps_arrays(arrs: SpinArrays, t: float) -> np.ndarray:
    """Per-spin optimal overlaps 1 - lambda f(t) sin^2(theta~), theta~ measured from the insensitive axis."""
    f = field_factor(arrs.g, arrs.omega, t)
    cos_tilde = np.einsum("ij,ij->i", arrs.directions, axis_directions(arrs, t))
    sin2_tilde = np.clip(1.0 - cos_tilde ** 2, 0.0, 1.0)
    return np.clip(1.0 - arrs.mixedness * f * sin2_tilde, 0.0, 1.0)


def xi_closed_mixed(lam: Union[MixednessFactor, float], theta_sep: float) -> float:
    """-ln(1 - lambda sin^2(Theta/2))."""
    lam = lam.lam if isinstance(lam, MixednessFactor) else float(lam)
    return _neg_log(1.0 - lam * math.sin(theta_sep / 2) ** 2)


def xi_closed_no_field(spin: SpinSpec, t: float) -> float:
    """-ln(1 - lambda sin^2(2gt) sin^2(theta)); omega must vanish."""
    if spin.omega != 0.0:
        raise FieldPresent(f"omega={spin.omega} != 0; use xi_closed_field")
    lam = MixednessFactor.from_bloch_length(spin.init.a).lam
    return _neg_log(1.0 - lam * math.sin(2 * spin.g * t) ** 2 * math.sin(spin.init.theta) ** 2)


def xi_closed_field(spin: SpinSpec, t: float) -> float:
    """-ln(1 - lambda f(t) sin^2 theta~(t))."""
    lam = MixednessFactor.from_bloch_length(spin.init.a).lam
    f = field_factor(spin.g, spin.omega, t)
    cos_tilde = float(np.dot(spin.init.direction, insensitive_axis(spin, t).direction))
    return _neg_log(1.0 - lam * f * max(0.0, 1.0 - cos_tilde ** 2))


def mean_overlap(env: Sequence[SpinSpec], t: float) -> float:
    if len(env) == 0:
        raise EmptyEnvironment("environment has no spins")
    arrs = env if isinstance(env, SpinArrays) else SpinArrays.from_spins(env)
    return float(np.mean(overlaps_arrays(arrs, t)))


def xi_bar_typical(env: Sequence[SpinSpec], t: float, c: float = 0.5) -> float:
    """-ln <tr[rho_up^c rho_down^(1-c)]>_k : mean over spins first, then the log."""
    if len(env) == 0:
        raise EmptyEnvironment("environment has no spins")
    if not (0.0 <= c <= 1.0):
        raise BadExponent(f"exponent c={c} outside [0, 1]")
    if c == 0.5:
        return _neg_log(mean_overlap(env, t))
    overlaps = []
    for spin in env:
        pair = conditional_states(spin, t)
        overlaps.append(chernoff_overlap(pair.rho_up, pair.rho_down, c))
    return _neg_log(float(np.mean(overlaps)))


# ===== redundancy estimators =====

def redundancy_qcb(xi_bar: float, n_env: int, delta: float) -> RedundancyResult:
    """R = #E xi / ln(1/delta), capped at #E (fragments of at least one spin)."""
    _check_delta(delta)
    if n_env < 1:
        raise EmptyEnvironment("n_env must be >= 1")
    log_inv = math.log(1.0 / delta)
    if xi_bar <= 0.0:
        return RedundancyResult(xi_bar=0.0, f_delta=math.inf, r_delta=0.0, method="qcb")
    f = log_inv / xi_bar
    r = n_env * xi_bar / log_inv
    diagnostics = {}
    if f < 1.0:
        diagnostics["capped"] = True
        f, r = 1.0, float(n_env)
    return RedundancyResult(xi_bar=xi_bar, f_delta=f, r_delta=r, method="qcb", diagnostics=diagnostics)


def correction_constant(system: SystemSpec) -> float:
    """C = H_S (p_up - p_down) ln2 / (p_up p_down ln(p_up/p_down)); ln 4 at p_up = 1/2."""
    p, q = system.p_up, 1.0 - system.p_up
    if not (0.0 < p < 1.0):
        raise TrivialSystem(f"p_up={p}: no missing information to record")
    if abs(p - 0.5) < 1e-6:
        return math.log(4.0)
    h_s = binary_entropy(p)
    return h_s * (p - q) * math.log(2.0) / (p * q * math.log(p / q))


def redundancy_corrected(mean_overlap_value: float, n_env: int, delta: float, system: SystemSpec) -> RedundancyResult:
    """Finite-delta estimate R = #E ln<overlap> / (ln delta + ln C)."""
    _check_delta(delta)
    c_const = correction_constant(system)
    denom = math.log(delta) + math.log(c_const)
    if denom >= 0.0:
        raise BadDelta(f"delta*C = {delta * c_const:.3g} >= 1; corrected estimate undefined")
    xi = _neg_log(mean_overlap_value)
    if xi == 0.0:
        return RedundancyResult(xi_bar=0.0, f_delta=math.inf, r_delta=0.0, method="corrected", diagnostics={"C": c_const})
    f = -denom / xi
    r = n_env * xi / -denom
    diagnostics = {"C": c_const}
    if f < 1.0:
        diagnostics["capped"] = True
        f, r = 1.0, float(n_env)
    return RedundancyResult(xi_bar=xi, f_delta=f, r_delta=r, method="corrected", diagnostics=diagnostics)


def redundancy_discretized(env: Sequence[SpinSpec], t: float, delta: float) -> RedundancyResult:
    """R = #E / ceil(F^c), F^c = ln delta / ln<1 - lambda f sin^2 theta~>_1, fragment floored at 1."""
    _check_delta(delta)
    avg = mean_overlap(env, t)
    if avg >= 1.0:
        raise ZeroInformation(f"mean overlap is 1 at t={t}; no spin carries a record")
    f_cont = math.log(delta) / math.log(max(avg, OVERLAP_FLOOR))
    # 1e-12 guards ceil against round-off just above an integer
    f_int = max(1, math.ceil(f_cont - 1e-12))
    return RedundancyResult(
        xi_bar=_neg_log(avg),
        f_delta=float(f_int),
        r_delta=len(env) / f_int,
        method="discretized",
        diagnostics={"f_continuous": f_cont},
    )


def fano_lower_bound(h_system: float, p_error: float) -> float:
    """chi >= H_S - H(P_e), in bits, clamped at 0."""
    if not (0.0 <= p_error <= 0.5):
        raise BadProbability(f"error probability {p_error} outside [0, 1/2]")
    return max(0.0, h_system - binary_entropy(p_error))


def helstrom_error(system: SystemSpec, frag_up: DenseState, frag_down: DenseState) -> float:
    """P_e = (1 - ||p_up rho_up - p_down rho_down||_1) / 2."""
    if frag_up.dim != frag_down.dim:
        raise DimMismatch(f"fragment dims {frag_up.dim} vs {frag_down.dim}")
    diff = system.p_up * frag_up.matrix - (1.0 - system.p_up) * frag_down.matrix
    return min(0.5, max(0.0, 0.5 * (1.0 - trace_norm(diff))))


# ===== Gaussian decoherence =====

def _arrays(env) -> SpinArrays:
    if len(env) == 0:
        raise EmptyEnvironment("environment has no spins")
    return env if isinstance(env, SpinArrays) else SpinArrays.from_spins(env)


def decoherence_time(env: Sequence[SpinSpec]) -> float:
    """1/tau_D^2 = <4 G^2 sin^2 theta>_1 with G_k = sqrt(#E) g_k; inf when nothing decoheres."""
    arrs = _arrays(env)
    if np.any(arrs.omega != 0.0):
        logger.warning("decoherence_time assumes omega = 0; %d spins carry a field", int(np.sum(arrs.omega != 0)))
    n = len(arrs)
    inv_tau2 = float(np.mean(4.0 * n * arrs.g ** 2 * np.sin(arrs.theta) ** 2))
    if inv_tau2 <= 0.0:
        logger.warning("⚠️ no spin decoheres the system: tau_D = inf")
        return math.inf
    return 1.0 / math.sqrt(inv_tau2)


def receptivity(env: Sequence[SpinSpec]) -> float:
    """alpha = <lambda>_1."""
    return float(np.mean(_arrays(env).mixedness))


def redundancy_gaussian(alpha: float, tau_d: float, t: float, delta: float) -> float:
    """R ~ alpha t^2 / tau_D^2 / ln(1/delta)."""
    _check_delta(delta)
    if not tau_d > 0:
        raise ConfigError(f"tau_D must be positive, got {tau_d}")
    if math.isinf(tau_d):
        return 0.0
    return alpha * (t / tau_d) ** 2 / math.log(1.0 / delta)


def onset_time(tau_d: float, delta: float) -> float:
    """t* = tau_D sqrt(2 ln 1/delta), where the quadratic law gives R = 2."""
    _check_delta(delta)
    return tau_d * math.sqrt(2.0 * math.log(1.0 / delta))


def gaussian_decoherence(t: float, tau_d: float) -> float:
    """|gamma|^2 ~ exp(-t^2/tau_D^2)."""
    if math.isinf(tau_d):
        return 1.0
    return math.exp(-((t / tau_d) ** 2))


def recurrence_time(env: Sequence[SpinSpec]) -> float:
    """pi / (4 sqrt(<g_k^2>_1)): quadratic growth stops around here."""
    mean_g2 = float(np.mean(_arrays(env).g ** 2))
    return math.inf if mean_g2 == 0 else math.pi / (4.0 * math.sqrt(mean_g2))


def relative_efficiency(xi: float, xi_ref: float) -> float:
    """R* = lim_{delta->0} R/R' = xi/xi'."""
    if xi_ref <= 0.0:
        raise ZeroInformation("reference case carries no information")
    return xi / xi_ref


# ===== Bloch mesh =====

def bloch_mesh(spin_template: SpinSpec, t: float, a: float, grid: Tuple[int, int]) -> pd.DataFrame:
    """xi over initial states (a, theta, phi) on a theta x phi grid; long format."""
    n_theta, n_phi = grid
    if n_theta < 2 or n_phi < 2:
        raise ConfigError(f"mesh grid must be at least 2x2, got {grid}")
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    size = th.size
    arrs = SpinArrays(
        g=np.full(size, spin_template.g),
        omega=np.full(size, spin_template.omega),
        a=np.full(size, float(a)),
        theta=th.ravel(),
        phi=ph.ravel(),
    )
    overlaps = overlaps_arrays(arrs, t)
    xi = -np.log(np.maximum(overlaps, OVERLAP_FLOOR))
    return pd.DataFrame({"theta": th.ravel(), "phi": ph.ravel(), "xi": np.maximum(xi, 0.0)})
