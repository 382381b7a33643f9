"""
Holevo quantity of environment fragments, fragment averaging and the exact redundancy search.

Two evaluators compute chi for one fragment:
  closed_pure - pure environment and pure system: chi = H(mu+-) from |gamma_F|^2, O(#F)
  dense       - anything else: conditional fragment states built with kron, capped by DENSE_CAP

Averages over fragments of a given size are exact (enumerate) or sampled (monte_carlo).
Monte Carlo draw d owns the stream (seed, DRAW_STREAM, d) and one permutation of the
environment; a fragment of size F is its first F entries, so every draw gives nested
fragments and chi-bar(F) is monotone in F draw by draw. Draws are reduced in fixed
MC_CHUNK blocks, so the result never depends on the worker count.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

from config.config import DENSE_CAP, ENUM_CHUNK, ENUM_LIMIT, MC_CHUNK, MONOTONE_TOL
from engine.chernoff import RedundancyResult, xi_bar_typical
from engine.dynamics import SpinArrays, conditional_states, decoherence_factor_fragment, gamma_abs2_arrays
from engine.model import DRAW_STREAM, SpinSpec, SystemSpec, stream
from utils.errors import (
    BadDelta,
    ConfigError,
    EmptyEnvironment,
    MixedEnvironment,
    MixedSystem,
    NumericalError,
    TooLarge,
    TooManySubsets,
    ZeroInformation,
)
from utils.parallel import ordered_map, ordered_sum
from utils.qmath import DenseState, binary_entropy, kron, von_neumann_entropy

logger = logging.getLogger(__name__)

MODES = ("enumerate", "monte_carlo")

# Refinement passes of the Monte Carlo search evaluate at most this many sizes each
REFINE_POINTS = 512

# Terms of the small-argument series in the information deficit
DEFICIT_SERIES_TERMS = 10


@dataclass(frozen=True)
class FragmentSelection:
    """Sorted, distinct spin indices into the realized environment."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if not idx:
            raise ConfigError("fragment must contain at least one spin")
        if len(set(idx)) != len(idx):
            raise ConfigError(f"fragment indices repeat: {idx}")
        if idx[0] < 0:
            raise ConfigError(f"negative fragment index {idx[0]}")
        object.__setattr__(self, "indices", idx)

    def check(self, n_env: int) -> "FragmentSelection":
        if self.indices[-1] >= n_env:
            raise ConfigError(f"fragment index {self.indices[-1]} out of range for #E={n_env}")
        return self

    def complement(self, n_env: int) -> Tuple[int, ...]:
        chosen = set(self.indices)
        return tuple(k for k in range(n_env) if k not in chosen)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class HolevoEstimate:
    mean_chi: float
    stderr: float
    n_samples: int
    mode: str
    evaluator: str = "closed_pure"
    frag_size: int = 0
    # mean of H_S - chi, accurate where chi rounds to H_S
    mean_deficit: float = 0.0


@dataclass(frozen=True)
class MutualInformation:
    """I(S:F) = H_SdF + [H_SdE - H_SdEF]; the bracket is the discord."""

    total: float
    holevo_part: float
    discord_part: float


@dataclass(frozen=True)
class FragmentSize:
    f_delta: int
    chi_at_f: float
    stderr: float = 0.0
    mode: str = "enumerated"
    reached: bool = True


@dataclass(frozen=True)
class NotReached:
    """Even the largest searchable fragment falls short of (1 - delta) H_S."""

    max_f: int
    chi_at_max: float
    stderr: float = 0.0
    mode: str = "enumerated"
    reached: bool = False


SearchResult = Union[FragmentSize, NotReached]


# ===== single fragment =====

def system_entropy(system: SystemSpec) -> float:
    """H_S in bits."""
    return binary_entropy(system.p_up)


def _require_pure_system(system: SystemSpec):
    if not system.is_pure:
        raise MixedSystem(
            f"system coherence {system.coherence} below its pure value; use holevo_dense"
        )


def _require_pure_env(spins: Sequence[SpinSpec]):
    mixed = [k for k, s in enumerate(spins) if s.init.a < 1.0 - 1e-12]
    if mixed:
        raise MixedEnvironment(f"{len(mixed)} fragment spins are mixed (first index {mixed[0]}); use holevo_dense")


def _chi_from_gamma2(p_up: float, gamma2):
    """H(mu+-) with mu+- = 1/2 +- sqrt((p_up - p_down)^2/4 + p_up p_down |gamma|^2)."""
    q = 1.0 - p_up
    g2 = np.clip(np.asarray(gamma2, dtype=float), 0.0, 1.0)
    mu = 0.5 + np.sqrt((p_up - q) ** 2 / 4.0 + p_up * q * g2)
    return binary_entropy(np.clip(mu, 0.0, 1.0))


def _log1p_excess(x: np.ndarray) -> np.ndarray:
    """(1 + x) ln(1 + x) - x for x >= -1; nonnegative, series below |x| = 1e-2."""
    small = np.abs(x) < 1e-2
    xs = np.where(small, x, 0.0)
    series = np.zeros_like(xs)
    power = xs * xs
    for k in range(2, DEFICIT_SERIES_TERMS + 2):
        series += power / (k * (k - 1))
        power = -power * xs
    xl = np.where(small, 0.0, x)
    return np.where(small, series, xlogy(1.0 + xl, 1.0 + xl) - xl)


def _deficit_from_gamma2(p_up: float, gamma2):
    """H_S - chi in bits, summed from nonnegative terms so it keeps full relative precision.

    With u = 2 mu+ - 1, u0 = |p_up - p_down| and du = u - u0 = 4 p_up p_down |gamma|^2 / (u + u0),
    H_S - chi = [(1 + u0) e(du / (1 + u0)) + (1 - u0) e(-du / (1 - u0))] / 2 + du atanh(u0)
    in nats, e(x) = (1 + x) ln(1 + x) - x.
    """
    q = 1.0 - p_up
    g2 = np.clip(np.asarray(gamma2, dtype=float), 0.0, 1.0)
    u0 = abs(p_up - q)
    eps = 4.0 * p_up * q * g2
    u = np.sqrt(u0 * u0 + eps)
    du = np.divide(eps, u + u0, out=np.zeros_like(u), where=(u + u0) > 0)
    up_part = (1.0 + u0) * _log1p_excess(du / (1.0 + u0))
    down_part = (1.0 - u0) * _log1p_excess(np.maximum(-du / (1.0 - u0), -1.0))
    nats = 0.5 * (up_part + down_part) + du * math.atanh(u0)
    return nats / math.log(2.0)


def holevo_pure_closed(system: SystemSpec, gamma_frag: complex, spins: Optional[Sequence[SpinSpec]] = None) -> float:
    """chi = H_SdF for a pure environment, from the fragment's decoherence factor."""
    _require_pure_system(system)
    if spins is not None:
        _require_pure_env(spins)
    chi = float(_chi_from_gamma2(system.p_up, abs(gamma_frag) ** 2))
    return min(chi, system_entropy(system))


class _DenseFragments:
    """Per-spin conditional states at one time, ready to be tensored into fragments."""

    def __init__(self, system: SystemSpec, env: Sequence[SpinSpec], t: float, cap: Optional[int] = None):
        self.p_up = system.p_up
        self.h_s = system_entropy(system)
        self.cap = DENSE_CAP if cap is None else cap
        pairs = [conditional_states(s, t) for s in env]
        self.up = [p.rho_up for p in pairs]
        self.down = [p.rho_down for p in pairs]
        # Unitary evolution keeps the spectrum, so H(rho_k|s) = H((1 + a_k)/2)
        self.cond_entropy = np.array([binary_entropy(0.5 * (1.0 + s.init.a)) for s in env])

    def chi(self, indices: Sequence[int]) -> float:
        if len(indices) > self.cap:
            raise TooLarge(
                f"fragment of {len(indices)} spins exceeds the dense cap of {self.cap}; "
                "use the QCB estimate (qdarwin qcb) for larger fragments"
            )
        rho_up = kron([self.up[k] for k in indices], cap=self.cap)
        rho_down = kron([self.down[k] for k in indices], cap=self.cap)
        mixture = self.p_up * rho_up.matrix + (1.0 - self.p_up) * rho_down.matrix
        conditional = float(np.sum(self.cond_entropy[list(indices)]))
        chi = von_neumann_entropy(DenseState(mixture, check=False)) - conditional
        return min(max(chi, 0.0), self.h_s)


def holevo_dense(system: SystemSpec, env: Sequence[SpinSpec], frag: FragmentSelection, t: float,
                 cap: Optional[int] = None) -> float:
    """chi = H(p_up rho_F|up + p_down rho_F|down) - sum_s p_s H(rho_F|s), by brute force."""
    frag.check(len(env))
    spins = [env[k] for k in frag.indices]
    return _DenseFragments(system, spins, t, cap).chi(range(len(spins)))


def mutual_information_pure(system: SystemSpec, env: Sequence[SpinSpec], frag: FragmentSelection,
                            t: float) -> MutualInformation:
    _require_pure_system(system)
    _require_pure_env(env)
    frag.check(len(env))
    rest = frag.complement(len(env))

    def decohered_entropy(indices) -> float:
        gamma = decoherence_factor_fragment([env[k] for k in indices], t)
        return float(_chi_from_gamma2(system.p_up, abs(gamma) ** 2))

    h_sdf = decohered_entropy(frag.indices)
    h_sde = decohered_entropy(range(len(env)))
    h_sdef = decohered_entropy(rest)
    discord = h_sde - h_sdef
    return MutualInformation(total=h_sdf + discord, holevo_part=h_sdf, discord_part=discord)


# ===== fragment averages =====

class _Evaluator:
    """Picks closed_pure or dense for one (system, env, t) and evaluates fragment batches.

    Batches come back as (chi, deficit) with deficit = H_S - chi. The closed form computes
    the deficit on its own, so it stays accurate where chi rounds to H_S.
    """

    def __init__(self, system: SystemSpec, env: Sequence[SpinSpec], t: float, dense_cap: Optional[int] = None):
        if len(env) == 0:
            raise EmptyEnvironment("environment has no spins")
        self.n = len(env)
        self.p_up = system.p_up
        self.h_s = system_entropy(system)
        self.symmetric = all(s == env[0] for s in env)
        arrs = SpinArrays.from_spins(env)
        if system.is_pure and arrs.is_pure:
            self.kind = "closed_pure"
            with np.errstate(divide="ignore"):
                self.log_gamma2 = np.log(gamma_abs2_arrays(arrs, t))
            self.dense = None
        else:
            self.kind = "dense"
            self.log_gamma2 = None
            self.dense = _DenseFragments(system, env, t, dense_cap)

    @property
    def size_limit(self) -> int:
        return self.n if self.kind == "closed_pure" else min(self.n, self.dense.cap)

    def from_log(self, log_g2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g2 = np.exp(log_g2)
        chi = np.minimum(_chi_from_gamma2(self.p_up, g2), self.h_s)
        return np.atleast_1d(chi), np.atleast_1d(_deficit_from_gamma2(self.p_up, g2))

    def _dense_batch(self, frags) -> Tuple[np.ndarray, np.ndarray]:
        chi = np.array([self.dense.chi(row) for row in frags])
        return chi, self.h_s - chi

    def fragments(self, frags: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(chi, deficit) for each row of an (m, F) index array."""
        if self.kind == "closed_pure":
            return self.from_log(self.log_gamma2[frags].sum(axis=1))
        return self._dense_batch(frags)

    def prefixes(self, perm: np.ndarray, sizes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(chi, deficit) of the nested fragments perm[:F] for every F in sizes."""
        if self.kind == "closed_pure":
            cum = np.cumsum(self.log_gamma2[perm[: sizes[-1]]])
            return self.from_log(cum[sizes - 1])
        return self._dense_batch([perm[:f] for f in sizes])


def _check_sizes(sizes: Sequence[int], limit: int, n: int) -> np.ndarray:
    arr = np.array(sorted(set(int(f) for f in sizes)), dtype=int)
    if arr.size == 0 or arr[0] < 1 or arr[-1] > n:
        raise ConfigError(f"fragment sizes must lie in [1, {n}], got {list(sizes)}")
    if arr[-1] > limit:
        raise TooLarge(
            f"fragment size {arr[-1]} exceeds the dense cap of {limit} for a mixed scenario; "
            "use the QCB estimate (qdarwin qcb) instead"
        )
    return arr


def _estimate(totals: np.ndarray, count: int, mode: str, evaluator: str, size: int, exact: bool) -> HolevoEstimate:
    """totals = (sum chi, sum chi^2, sum deficit)."""
    total, total_sq, total_deficit = (float(v) for v in totals)
    if exact or count < 2:
        stderr = 0.0
    else:
        var = max(0.0, (total_sq - total * total / count) / (count - 1))
        stderr = math.sqrt(var / count)
    return HolevoEstimate(mean_chi=total / count, stderr=stderr, n_samples=count, mode=mode,
                          evaluator=evaluator, frag_size=size, mean_deficit=max(total_deficit / count, 0.0))


def _accumulate(chi: np.ndarray, deficit: np.ndarray) -> np.ndarray:
    return np.array([chi, chi * chi, deficit])


def _monte_carlo(ev: _Evaluator, sizes: np.ndarray, samples: int, seed: int, threads: Optional[int]) -> List[HolevoEstimate]:
    def run_chunk(bounds: Tuple[int, int]) -> np.ndarray:
        start, stop = bounds
        acc = np.zeros((3, sizes.size))
        for d in range(start, stop):
            perm = stream(seed, DRAW_STREAM, d).permutation(ev.n)
            acc += _accumulate(*ev.prefixes(perm, sizes))
        return acc

    chunks = [(s, min(s + MC_CHUNK, samples)) for s in range(0, samples, MC_CHUNK)]
    totals = ordered_sum(ordered_map(run_chunk, chunks, threads))
    logger.debug("monte carlo: %d draws in %d chunks, sizes %s", samples, len(chunks), sizes.tolist())
    return [
        _estimate(totals[:, i], samples, "monte_carlo", ev.kind, int(f), exact=(f == ev.n))
        for i, f in enumerate(sizes)
    ]


def _combination_chunks(n: int, f: int) -> Iterator[np.ndarray]:
    combos = combinations(range(n), f)
    while True:
        block = list(islice(combos, ENUM_CHUNK))
        if not block:
            return
        yield np.array(block, dtype=int)


def _enumerate(ev: _Evaluator, size: int, threads: Optional[int]) -> HolevoEstimate:
    count = math.comb(ev.n, size)
    if count > ENUM_LIMIT:
        raise TooManySubsets(
            f"C({ev.n}, {size}) = {count} subsets exceed the enumeration limit of {ENUM_LIMIT}; use monte_carlo"
        )

    def run_chunk(frags: np.ndarray) -> np.ndarray:
        return _accumulate(*ev.fragments(frags)).sum(axis=1)

    totals = ordered_sum(ordered_map(run_chunk, _combination_chunks(ev.n, size), threads))
    return _estimate(totals, count, "enumerated", ev.kind, size, exact=True)


def _curve(ev: _Evaluator, sizes: Sequence[int], mode: str, samples: int, seed: int,
           threads: Optional[int]) -> List[HolevoEstimate]:
    if mode not in MODES:
        raise ConfigError(f"unknown averaging mode '{mode}', expected one of {MODES}")
    sizes = _check_sizes(sizes, ev.size_limit, ev.n)
    if ev.symmetric:
        # Every fragment of a given size is the same fragment
        estimates = []
        for f in sizes:
            totals = _accumulate(*ev.fragments(np.arange(f)[None, :]))[:, 0]
            estimates.append(_estimate(totals, 1, "enumerated", ev.kind, int(f), exact=True))
        return estimates
    if mode == "enumerate":
        return [_enumerate(ev, int(f), threads) for f in sizes]
    if samples < 1:
        raise ConfigError(f"monte_carlo needs samples >= 1, got {samples}")
    return _monte_carlo(ev, sizes, samples, seed, threads)


def holevo_curve(system: SystemSpec, env: Sequence[SpinSpec], t: float, sizes: Sequence[int],
                 mode: str = "monte_carlo", samples: int = 10000, seed: int = 0,
                 threads: Optional[int] = None, dense_cap: Optional[int] = None) -> List[HolevoEstimate]:
    """chi-bar at several fragment sizes from one set of draws; sorted by size."""
    ev = _Evaluator(system, env, t, dense_cap)
    return _curve(ev, sizes, mode, samples, seed, threads)


def average_holevo(system: SystemSpec, env: Sequence[SpinSpec], frag_size: int, t: float,
                   mode: str = "monte_carlo", samples: int = 10000, seed: int = 0,
                   threads: Optional[int] = None, dense_cap: Optional[int] = None) -> HolevoEstimate:
    """<chi(Pi_S : F)> over fragments of size frag_size."""
    return holevo_curve(system, env, t, [frag_size], mode, samples, seed, threads, dense_cap)[0]


# ===== F_delta search =====
# A fragment size qualifies when its mean deficit H_S - chi-bar is at most delta H_S.
# Comparing chi-bar against (1 - delta) H_S instead fails once delta H_S drops below
# one ulp of H_S.

def _check_monotone(estimates: Sequence[HolevoEstimate]):
    for prev, cur in zip(estimates, estimates[1:]):
        if cur.mean_chi < prev.mean_chi - MONOTONE_TOL:
            raise NumericalError(
                f"chi-bar decreased from F={prev.frag_size} to F={cur.frag_size}",
                {"sizes": (prev.frag_size, cur.frag_size), "chi": (prev.mean_chi, cur.mean_chi)},
            )


def _doubling_sizes(n: int) -> List[int]:
    sizes, f = [], 1
    while f < n:
        sizes.append(f)
        f *= 2
    sizes.append(n)
    return sizes


def _search_symmetric_pure(ev: _Evaluator, allowed: float) -> SearchResult:
    chi, deficit = ev.from_log(np.cumsum(ev.log_gamma2))
    curve = [HolevoEstimate(float(c), 0.0, 1, "enumerated", ev.kind, f + 1) for f, c in enumerate(chi)]
    _check_monotone(curve)
    hits = np.flatnonzero(deficit <= allowed)
    if hits.size == 0:
        return NotReached(ev.n, float(chi[-1]))
    f = int(hits[0]) + 1
    return FragmentSize(f, float(chi[f - 1]))


def _search_linear(ev: _Evaluator, allowed: float, mode: str, samples: int, seed: int,
                   threads: Optional[int]) -> SearchResult:
    if ev.kind == "closed_pure":
        # chi(E) bounds every fragment average from above
        chi, deficit = ev.fragments(np.arange(ev.n)[None, :])
        if deficit[0] > allowed:
            return NotReached(ev.n, float(chi[0]), 0.0, "enumerated")
    history: List[HolevoEstimate] = []
    for f in range(1, ev.size_limit + 1):
        est = _curve(ev, [f], mode, samples, seed, threads)[0]
        history.append(est)
        _check_monotone(history[-2:])
        if est.mean_deficit <= allowed:
            return FragmentSize(f, est.mean_chi, est.stderr, est.mode)
    last = history[-1]
    if ev.size_limit < ev.n:
        raise TooLarge(
            f"(1 - delta) H_S not reached by fragments of up to {ev.size_limit} spins (dense cap); "
            "use the QCB estimate (qdarwin qcb) for this scenario"
        )
    return NotReached(ev.n, last.mean_chi, last.stderr, last.mode)


def _search_bracketed(ev: _Evaluator, allowed: float, samples: int, seed: int,
                      threads: Optional[int]) -> SearchResult:
    known = {}

    def evaluate(sizes):
        for est in _curve(ev, sizes, "monte_carlo", samples, seed, threads):
            known[est.frag_size] = est
        _check_monotone([known[f] for f in sorted(known)])

    evaluate(_doubling_sizes(ev.n))
    if known[ev.n].mean_deficit > allowed:
        top = known[ev.n]
        return NotReached(ev.n, top.mean_chi, top.stderr, top.mode)

    while True:
        hi = min(f for f, e in known.items() if e.mean_deficit <= allowed)
        lo = max((f for f in known if f < hi), default=0)
        logger.debug("F_delta bracket (%d, %d]", lo, hi)
        if hi - lo <= 1:
            best = known[hi]
            return FragmentSize(hi, best.mean_chi, best.stderr, best.mode)
        inner = np.unique(np.linspace(lo + 1, hi - 1, min(REFINE_POINTS, hi - lo - 1)).round().astype(int))
        evaluate(inner.tolist())


def find_fragment_size(system: SystemSpec, env: Sequence[SpinSpec], t: float, delta: float,
                       mode: str = "monte_carlo", samples: int = 10000, seed: int = 0,
                       threads: Optional[int] = None, dense_cap: Optional[int] = None) -> SearchResult:
    """Smallest #F whose average chi reaches (1 - delta) H_S."""
    if not (0.0 < delta < 1.0):
        raise BadDelta(f"delta={delta} outside (0, 1)")
    if mode not in MODES:
        raise ConfigError(f"unknown averaging mode '{mode}', expected one of {MODES}")
    ev = _Evaluator(system, env, t, dense_cap)
    allowed = delta * ev.h_s

    if ev.kind == "closed_pure" and ev.symmetric:
        result = _search_symmetric_pure(ev, allowed)
    elif ev.kind == "closed_pure" and mode == "monte_carlo":
        result = _search_bracketed(ev, allowed, samples, seed, threads)
    else:
        result = _search_linear(ev, allowed, mode, samples, seed, threads)

    if not result.reached:
        logger.warning("(1 - delta) H_S not reached at t=%g: chi-bar(%d) = %.6g bits", t, result.max_f, result.chi_at_max)
    return result


def redundancy_exact(system: SystemSpec, env: Sequence[SpinSpec], t: float, delta: float,
                     mode: str = "monte_carlo", samples: int = 10000, seed: int = 0,
                     threads: Optional[int] = None, dense_cap: Optional[int] = None) -> RedundancyResult:
    """R = #E / F_delta; R = 0 when the threshold is never reached."""
    found = find_fragment_size(system, env, t, delta, mode, samples, seed, threads, dense_cap)
    xi = xi_bar_typical(env, t)
    if not found.reached:
        return RedundancyResult(
            xi_bar=xi, f_delta=math.inf, r_delta=0.0, method="exact",
            diagnostics={"reached": False, "chi_at_f": found.chi_at_max, "stderr": found.stderr, "mode": found.mode},
        )
    return RedundancyResult(
        xi_bar=xi, f_delta=float(found.f_delta), r_delta=len(env) / found.f_delta, method="exact",
        diagnostics={"reached": True, "chi_at_f": found.chi_at_f, "stderr": found.stderr, "mode": found.mode},
    )


def fit_deficit_decay(sizes: Sequence[int], chi: Sequence[float], h_s: float) -> float:
    """Exponent (nats per spin) of H_S - chi-bar(F) ~ exp(-xi F), least squares on the log deficit."""
    f = np.asarray(sizes, dtype=float)
    deficit = h_s - np.asarray(chi, dtype=float)
    usable = deficit > 1e-300
    if np.count_nonzero(usable) < 2:
        raise ZeroInformation("need at least two fragment sizes with a positive information deficit")
    slope, _ = np.polyfit(f[usable], np.log(deficit[usable]), 1)
    return float(-slope)
