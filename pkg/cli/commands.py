"""
Command bodies - a resolved RunConfig in, an OutputTable out.

Nothing here touches argv or files; main.py does the I/O and exit codes.
"""
import logging
import math
from typing import Any, Dict

import numpy as np
from tqdm import tqdm

from cli.run_config import RunConfig
from config.config import DENSE_CAP_MAX
from engine.chernoff import (
    bloch_mesh,
    decoherence_time,
    gaussian_decoherence,
    mean_overlap,
    onset_time,
    receptivity,
    recurrence_time,
    redundancy_corrected,
    redundancy_discretized,
    redundancy_gaussian,
    redundancy_qcb,
)
from engine.dynamics import SpinArrays, gamma_abs2_arrays, insensitive_axis
from engine.ensembles import (
    BandSpec,
    band_asymptote,
    band_decoherence_time,
    band_mean_overlap,
    band_redundancy,
    make_fig2_spin,
)
from engine.holevo import redundancy_exact
from engine.model import SpinSpec, realize_environment
from utils.errors import TooLarge, TooManySubsets, ZeroInformation
from utils.output_table import OutputTable
from utils.qmath import QubitState

logger = logging.getLogger(__name__)


def _dense_cap(cfg: RunConfig) -> int:
    if cfg.dense_cap > DENSE_CAP_MAX:
        raise TooLarge(f"dense cap {cfg.dense_cap} above the hard ceiling of {DENSE_CAP_MAX} spins")
    return cfg.dense_cap


def _progress(times, quiet: bool, label: str):
    return tqdm(times, desc=label, unit="t", disable=quiet, leave=False)


def _new_table(command: str, cfg: RunConfig) -> OutputTable:
    table = OutputTable(command)
    table.stamp(cfg.resolved(), cfg.effective_seed)
    return table


def _exact(cfg: RunConfig, knobs, spins, t: float, delta: float, cap: int):
    """redundancy_exact for one row; a row with too many subsets to enumerate is sampled instead."""
    sc = cfg.scenario
    try:
        return redundancy_exact(sc.system, spins, t, delta, knobs.mode, knobs.samples,
                                cfg.effective_seed, cfg.threads, cap)
    except TooManySubsets as e:
        logger.warning("⚠️ t=%g, delta=%g: %s; sampling this row with %d draws", t, delta, e, knobs.samples)
        return redundancy_exact(sc.system, spins, t, delta, "monte_carlo", knobs.samples,
                                cfg.effective_seed, cfg.threads, cap)


# ===== qcb =====

def cmd_qcb(cfg: RunConfig, quiet: bool = True) -> OutputTable:
    sc = cfg.require_scenario("qcb")
    env = SpinArrays.from_spins(realize_environment(sc.environment))
    n, delta = len(env), sc.delta
    table = _new_table("qcb", cfg)
    table.add_metadata(n_env=n, delta=delta)

    for t in _progress(sc.times, quiet, "qcb"):
        overlap = mean_overlap(env, t)
        qcb = redundancy_qcb(max(0.0, -math.log(max(overlap, 1e-300))), n, delta)
        row = {"t": t, "xi_bar_nats": qcb.xi_bar, "r_qcb": qcb.r_delta}
        if env.is_pure:
            row["r_corrected"] = redundancy_corrected(overlap, n, delta, sc.system).r_delta
        try:
            disc = redundancy_discretized(env, t, delta)
            row["r_discretized"] = disc.r_delta
            row["f_delta_continuous"] = disc.diagnostics["f_continuous"]
        except ZeroInformation:
            row["r_discretized"] = 0.0
            row["f_delta_continuous"] = math.inf
        table.append_row(row)
    return table


# ===== holevo =====

def cmd_holevo(cfg: RunConfig, quiet: bool = True) -> OutputTable:
    sc = cfg.require_scenario("holevo")
    env = realize_environment(sc.environment)
    knobs = cfg.holevo
    deltas = knobs.deltas or [sc.delta]
    cap = _dense_cap(cfg)
    table = _new_table("holevo", cfg)
    table.add_metadata(n_env=len(env), samples=knobs.samples)
    logger.info("🔬 exact Holevo search: #E=%d, %d times x %d deltas, mode=%s", len(env), len(sc.times), len(deltas), knobs.mode)

    for t in _progress(sc.times, quiet, "holevo"):
        for delta in deltas:
            res = _exact(cfg, knobs, env, t, delta, cap)
            reached = res.diagnostics["reached"]
            table.append_row({
                "t": t,
                "delta": delta,
                "f_delta": res.f_delta if reached else np.nan,
                "r_exact": res.r_delta,
                "chi_at_f": res.diagnostics["chi_at_f"],
                "stderr": res.diagnostics["stderr"],
                "mode": res.diagnostics["mode"],
                "reached": reached,
            })
    return table


# ===== gaussian =====

def cmd_gaussian(cfg: RunConfig, quiet: bool = True) -> OutputTable:
    sc = cfg.require_scenario("gaussian")
    spins = realize_environment(sc.environment)
    env = SpinArrays.from_spins(spins)
    if not sc.environment.variant.gaussian_scaling:
        logger.warning("⚠️ environment is not gaussian-scaled; tau_D reads g_k as G_k/sqrt(#E) anyway")
    n, delta = len(env), sc.delta
    tau_d = decoherence_time(env)
    alpha = receptivity(env)
    t_star = onset_time(tau_d, delta)
    knobs = cfg.gaussian
    cap = _dense_cap(cfg) if knobs.exact else None

    table = _new_table("gaussian", cfg)
    table.add_metadata(n_env=n, delta=delta, tau_d=tau_d, alpha=alpha, onset_time=t_star,
                       recurrence_time=recurrence_time(env))

    def row_at(t: float, onset: int) -> Dict[str, Any]:
        overlap = mean_overlap(env, t)
        xi = max(0.0, -math.log(max(overlap, 1e-300)))
        with np.errstate(divide="ignore"):
            log_gamma2 = float(np.sum(np.log(gamma_abs2_arrays(env, t))))
        row = {
            "t": t,
            "r_qcb": redundancy_qcb(xi, n, delta).r_delta,
            "r_quadratic": redundancy_gaussian(alpha, tau_d, t, delta),
            "decoherence_factor": math.exp(log_gamma2),
            "gaussian_decoherence": gaussian_decoherence(t, tau_d),
            "onset": onset,
        }
        if knobs.exact:
            row["r_exact"] = _exact(cfg, knobs, spins, t, delta, cap).r_delta
        return row

    times = [(t, 0) for t in sc.times]
    if math.isfinite(t_star):
        times.append((t_star, 1))
    times.sort(key=lambda item: (item[0], item[1]))
    for t, onset in _progress(times, quiet, "gaussian"):
        table.append_row(row_at(t, onset))
    return table


# ===== band =====

def cmd_band(cfg: RunConfig, quiet: bool = True) -> OutputTable:
    sc = cfg.require_scenario("band")
    knobs = cfg.band
    band = BandSpec(width=knobs.width, lam=knobs.lam, theta=knobs.theta)
    spins = realize_environment(sc.environment)
    env = SpinArrays.from_spins(spins)
    n, delta = len(env), sc.delta
    tau_d = band_decoherence_time(band, n)
    asymptote = band_asymptote(band, n, delta)
    cap = _dense_cap(cfg) if knobs.exact else None

    table = _new_table("band", cfg)
    table.add_metadata(n_env=n, delta=delta, width=band.width, lam=band.lam, theta=band.theta, tau_d=tau_d)

    for t in _progress(sc.times, quiet, "band"):
        row = {
            "t": t,
            "r_band_analytic": band_redundancy(band, n, t, delta).r_delta,
            "r_gaussian_smalltime": redundancy_gaussian(band.lam, tau_d, t, delta),
            "r_asymptote": asymptote,
        }
        # the finite-delta constant holds for pure spins only
        row["r_corrected"] = (redundancy_corrected(band_mean_overlap(band, t), n, delta, sc.system).r_delta
                              if band.lam == 1.0 else np.nan)
        try:
            row["r_discretized"] = redundancy_discretized(env, t, delta).r_delta
        except ZeroInformation:
            row["r_discretized"] = 0.0
        if knobs.exact:
            row["r_exact"] = _exact(cfg, knobs, spins, t, delta, cap).r_delta
        table.append_row(row)
    return table


# ===== bloch-mesh =====

def cmd_bloch_mesh(cfg: RunConfig, quiet: bool = True) -> OutputTable:
    knobs = cfg.mesh
    if knobs.panel is not None:
        spin, t = make_fig2_spin(knobs.panel)
        a = spin.init.a
    else:
        spin = SpinSpec(g=knobs.g, omega=knobs.omega, init=QubitState(a=knobs.a, theta=math.pi / 2))
        t, a = knobs.t, knobs.a
    axis = insensitive_axis(spin, t)
    frame = bloch_mesh(spin, t, a, knobs.grid)

    table = _new_table("bloch-mesh", cfg)
    table.add_metadata(g=spin.g, omega=spin.omega, a=a, t=t,
                       insensitive_theta=axis.theta_star, insensitive_phi=axis.phi_star)
    for record in frame.to_dict("records"):
        table.append_row(record)
    logger.info("🌐 mesh %dx%d, max xi = %.6g", knobs.grid[0], knobs.grid[1], float(frame["xi"].max()))
    return table


# ===== validate =====

def cmd_validate(cfg: RunConfig) -> Dict[str, Any]:
    """Resolved scenario plus summary statistics of the realized environment."""
    sc = cfg.require_scenario("validate")
    env = SpinArrays.from_spins(realize_environment(sc.environment))
    report: Dict[str, Any] = {
        "scenario": sc.model_dump(mode="json"),
        "n_env": len(env),
        "mean_g2": float(np.mean(env.g ** 2)),
        "mean_lambda": receptivity(env),
        "pure_environment": env.is_pure,
    }
    if sc.environment.variant.gaussian_scaling and not np.any(env.omega != 0.0):
        report["tau_d"] = decoherence_time(env)
        report["onset_time"] = onset_time(report["tau_d"], sc.delta)
    return report


COMMANDS = {
    "qcb": cmd_qcb,
    "holevo": cmd_holevo,
    "gaussian": cmd_gaussian,
    "band": cmd_band,
    "bloch-mesh": cmd_bloch_mesh,
}
