"""
qdarwin - redundancy of records in a spin environment, from the command line.

    qdarwin validate   --config configs/fig3.yaml
    qdarwin qcb        --config configs/fig5.yaml --out out/fig5_qcb.csv
    qdarwin holevo     --config configs/fig3.yaml --samples 10000 --threads 8
    qdarwin gaussian   --config configs/fig3.yaml
    qdarwin band       --config configs/band.yaml
    qdarwin bloch-mesh --config configs/mesh.yaml

Exit codes: 0 ok, 2 config/validation, 3 capability (dense cap, subset count), 4 numerical.
"""
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent))

import logging

import click
import yaml

from cli.commands import COMMANDS, cmd_validate
from cli.run_config import load_run_config
from config.config import LOG_LEVEL, TOOL_VERSION
from utils.errors import QDarwinError

logger = logging.getLogger("qdarwin")


def _setup_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def _fail(e: Exception) -> int:
    if isinstance(e, QDarwinError):
        logger.error("❌ %s: %s", type(e).__name__, e)
        return e.exit_code
    logger.exception("❌ unexpected failure")
    return 4


def run_options(fn):
    options = [
        click.option("--config", "config_path", required=True, help="YAML run config."),
        click.option("--seed", type=int, default=None, help="Override the scenario and Monte Carlo seed."),
        click.option("--out", default=None, help="Output CSV path (default stdout)."),
        click.option("--samples", type=int, default=None, help="Monte Carlo draws per fragment size."),
        click.option("--threads", type=int, default=None, help="Worker cap; never changes results."),
        click.option("--delta", type=float, default=None, help="Information deficit."),
        click.option("--dense-cap", type=int, default=None, help="Largest dense fragment, in spins."),
        click.option("--quiet", is_flag=True, help="No progress bar."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(TOOL_VERSION, prog_name="qdarwin", message="%(version)s")
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="DEBUG, INFO, WARNING or ERROR.")
def cli(log_level):
    """Quantum Darwinism redundancy estimates: QCB, exact Holevo, Gaussian and band regimes."""
    _setup_logging(log_level)


def _run_table(name: str, config_path, seed, out, samples, threads, delta, dense_cap, quiet):
    try:
        cfg = load_run_config(config_path, seed=seed, samples=samples, threads=threads,
                              delta=delta, dense_cap=dense_cap, out=out)
        logger.info("🚀 %s: %s", name, config_path)
        table = COMMANDS[name](cfg, quiet=quiet)
        table.write(cfg.out)
    except Exception as e:
        sys.exit(_fail(e))
    logger.info("✅ %s done (%d rows)", name, len(table))


@cli.command()
@run_options
def validate(config_path, seed, out, samples, threads, delta, dense_cap, quiet):
    """Resolve a config and summarize the realized environment."""
    try:
        cfg = load_run_config(config_path, seed=seed, samples=samples, threads=threads,
                              delta=delta, dense_cap=dense_cap, out=out)
        report = cmd_validate(cfg)
    except Exception as e:
        sys.exit(_fail(e))
    click.echo(yaml.safe_dump(report, sort_keys=False), nl=False)
    logger.info("✅ config valid")


@cli.command()
@run_options
def qcb(**kwargs):
    """Chernoff-information redundancy estimates per time point."""
    _run_table("qcb", **kwargs)


@cli.command()
@run_options
def holevo(**kwargs):
    """Exact Holevo fragment search: F_delta and R_delta per (t, delta)."""
    _run_table("holevo", **kwargs)


@cli.command()
@run_options
def gaussian(**kwargs):
    """Quadratic-growth regime: QCB vs t^2/tau_D^2, with the onset row."""
    _run_table("gaussian", **kwargs)


@cli.command()
@run_options
def band(**kwargs):
    """Uniform coupling band: analytic average, small-t law, t -> infinity centre."""
    _run_table("band", **kwargs)


@cli.command("bloch-mesh")
@run_options
def bloch_mesh(**kwargs):
    """xi over initial Bloch directions, long format."""
    _run_table("bloch-mesh", **kwargs)


if __name__ == "__main__":
    cli()
