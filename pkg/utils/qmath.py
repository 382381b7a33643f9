"""
Small-dimension quantum linear algebra.

2x2 Hermitian matrices, Bloch-sphere maps, entropies (bits by default, nats on request),
fractional matrix powers and dense Kronecker products for brute-force fragment states.
Everything here is a pure function of its inputs.
"""
import math
from functools import reduce
from typing import Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.config import DENSE_CAP, DENSE_CAP_MAX, HERMITIAN_TOL, PSD_TOL, TRACE_TOL
from utils.errors import (
    BadExponent,
    BadProbability,
    DimMismatch,
    NotAState,
    NotHermitian,
    NotPSD,
    TooLarge,
)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Eigenvalues at or below this are structural zeros (0^c = 0, 0 log 0 = 0).
ZERO_EIG = 1e-14

TWO_PI = 2.0 * math.pi


class QubitState(BaseModel):
    """Bloch parametrization (a, theta, phi) of a qubit density matrix."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    a: float = Field(1.0, ge=0.0, le=1.0)
    theta: float = Field(0.0, ge=0.0, le=math.pi)
    phi: float = 0.0

    @field_validator("phi")
    @classmethod
    def _wrap_phi(cls, v: float) -> float:
        v = math.fmod(v, TWO_PI)
        if v < 0:
            v += TWO_PI
        return 0.0 if v >= TWO_PI else v

    @property
    def eigenvalues(self) -> Tuple[float, float]:
        """(lambda_minus, lambda_plus) = ((1 - a)/2, (1 + a)/2)."""
        return (0.5 * (1.0 - self.a), 0.5 * (1.0 + self.a))

    @property
    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


class DenseState:
    """A dim x dim density matrix, dim a power of two. Immutable."""

    __slots__ = ("matrix", "dim")

    def __init__(self, matrix, check: bool = True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotAState(f"density matrix must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise NotAState(f"dimension {dim} is not a power of two")
        if check:
            check_state(m)
        m.setflags(write=False)
        self.matrix = m
        self.dim = dim

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __repr__(self):
        return f"DenseState(dim={self.dim})"


MatrixLike = Union[np.ndarray, DenseState]


def _as_matrix(m: MatrixLike) -> np.ndarray:
    if isinstance(m, DenseState):
        return m.matrix
    return np.asarray(m, dtype=complex)


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL):
    if not np.all(np.isfinite(m)):
        raise NotAState("matrix has non-finite entries")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix must be square, got shape {m.shape}")
    residue = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if residue > tol:
        raise NotHermitian(f"Hermiticity residue {residue:.3e} exceeds {tol:.0e}")


def _clip_spectrum(w: np.ndarray) -> np.ndarray:
    """Clip floating-point PSD drift; anything below -PSD_TOL is a real violation."""
    if w.size and w.min() < -PSD_TOL:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{PSD_TOL:.0e}")
    return np.where(w <= ZERO_EIG, 0.0, w)


def check_state(m: MatrixLike):
    """Raise NotAState unless m is Hermitian, unit-trace and PSD within 1e-10."""
    m = _as_matrix(m)
    _check_hermitian(m)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAState(f"trace {tr:.12f} differs from 1")
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w.min() < -PSD_TOL:
        raise NotPSD(f"eigenvalue {w.min():.3e} below -{PSD_TOL:.0e}")


def bloch_vector(q: QubitState) -> np.ndarray:
    return q.a * q.direction


def bloch_to_density(q: QubitState) -> np.ndarray:
    """(I + a n.sigma)/2 with n = (sin th cos ph, sin th sin ph, cos th)."""
    x, y, z = bloch_vector(q)
    return 0.5 * (IDENTITY2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def bloch_components(m: np.ndarray) -> np.ndarray:
    """Cartesian Bloch vector of a 2x2 matrix, no validation."""
    return np.array([2.0 * m[0, 1].real, -2.0 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])


def density_to_bloch(m: np.ndarray) -> QubitState:
    m = _as_matrix(m)
    if m.shape != (2, 2):
        raise NotAState(f"expected a 2x2 matrix, got {m.shape}")
    check_state(m)
    x, y, z = bloch_components(m)
    rho_xy = math.hypot(x, y)
    a = math.hypot(rho_xy, z)
    if a < ZERO_EIG:
        return QubitState(a=0.0, theta=0.0, phi=0.0)
    # atan2 keeps theta accurate near the poles where arccos(z/a) loses digits
    theta = math.atan2(rho_xy, z)
    phi = math.atan2(y, x) if rho_xy > 0 else 0.0
    return QubitState(a=min(a, 1.0), theta=theta, phi=phi)


def eig2_hermitian(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and the unitary of eigenvectors (columns), m = U diag U^dagger."""
    m = _as_matrix(m)
    _check_hermitian(m)
    w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w, u


def psd_spectrum(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with drift clipped (zeros are exact zeros)."""
    w, u = eig2_hermitian(m)
    return _clip_spectrum(w), u


def fractional_power(m: np.ndarray, c: float) -> np.ndarray:
    """m^c through the eigenbasis, with 0^c = 0 for every c in [0, 1] (0^0 = 0 too)."""
    if not (0.0 <= c <= 1.0) or not math.isfinite(c):
        raise BadExponent(f"exponent c={c} outside [0, 1]")
    w, u = psd_spectrum(m)
    mapped = np.zeros_like(w)
    support = w > 0
    mapped[support] = w[support] ** c
    return (u * mapped) @ u.conj().T


def _log(x: np.ndarray, base: float) -> np.ndarray:
    return np.log(x) if base == math.e else np.log(x) / math.log(base)


def shannon_entropy(probs: np.ndarray, base: float = 2.0) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > ZERO_EIG]
    return float(-np.sum(p * _log(p, base)))


def von_neumann_entropy(s: MatrixLike, base: float = 2.0) -> float:
    """-tr rho log rho, bits unless base=math.e. 0 log 0 = 0."""
    m = _as_matrix(s)
    if not isinstance(s, DenseState):
        check_state(m)
    w = _clip_spectrum(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))
    h = shannon_entropy(w, base)
    return min(max(h, 0.0), float(_log(np.float64(m.shape[0]), base)))


def binary_entropy(p, base: float = 2.0):
    """H(p) = -p log p - (1-p) log(1-p). Works on scalars and arrays."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise BadProbability(f"probability outside [0, 1]: {p}")
    arr = np.clip(arr, 0.0, 1.0)
    q = 1.0 - arr
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(arr > 0, arr * _log(np.where(arr > 0, arr, 1.0), base), 0.0)
        h -= np.where(q > 0, q * _log(np.where(q > 0, q, 1.0), base), 0.0)
    return float(h) if h.ndim == 0 else h


def kron(states: Sequence[MatrixLike], cap: int = None) -> DenseState:
    """Tensor product in list order, as a 2^L-dimensional DenseState."""
    cap = DENSE_CAP if cap is None else cap
    if cap > DENSE_CAP_MAX:
        raise TooLarge(f"dense cap {cap} above the hard ceiling of {DENSE_CAP_MAX} spins")
    mats = [_as_matrix(s) for s in states]
    if not mats:
        raise DimMismatch("kron of an empty list")
    n_qubits = sum(int(m.shape[0]).bit_length() - 1 for m in mats)
    if n_qubits > cap:
        raise TooLarge(f"{n_qubits} spins exceed the dense cap of {cap}")
    # Factors are valid states, so the product is one by construction
    return DenseState(reduce(np.kron, mats), check=False)


def trace_norm(m: np.ndarray) -> float:
    m = _as_matrix(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))


def trace_norm_distance(s1: MatrixLike, s2: MatrixLike) -> float:
    m1, m2 = _as_matrix(s1), _as_matrix(s2)
    if m1.shape != m2.shape:
        raise DimMismatch(f"dimension mismatch {m1.shape} vs {m2.shape}")
    return 0.5 * trace_norm(m1 - m2)
