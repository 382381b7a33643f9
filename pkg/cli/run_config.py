"""
RunConfig - one YAML file resolved into a validated Scenario plus per-command knobs.

Key schema (YAML):

    scenario:            # engine.model.Scenario, same field names
      system: {p_up: 0.5}
      environment:
        seed: 7
        variant: {kind: random, count: 1000, gaussian_scaling: true,
                  g: {kind: uniform, lo: -2, hi: 2}, theta: 1.5707963267948966}
      times: {start: 0, stop: 20, num: 41}   # or an explicit ascending list
      delta: 1.0e-16
    seed: 11             # Monte Carlo draws; defaults to scenario.environment.seed
    threads: 4
    dense_cap: 12
    holevo:   {mode: monte_carlo, samples: 10000, deltas: [0.1, 0.01]}
    gaussian: {exact: false, mode: monte_carlo, samples: 10000}
    band:     {width: 1.0, lam: 1.0, theta: 1.5707963267948966, exact: false, mode: enumerate}
    mesh:     {panel: a}  # or {g: 0.5, omega: 0, a: 1, t: 0.736}; grid: [33, 64]

CLI flags override the file before validation, so every error carries its field path.
"""
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config.config import DEFAULT_SEED, DENSE_CAP
from engine.model import Scenario
from utils.errors import ConfigError, ConfigFileError, ScenarioValidationError

logger = logging.getLogger(__name__)


class _Knobs(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


class HolevoKnobs(_Knobs):
    mode: Literal["enumerate", "monte_carlo"] = "monte_carlo"
    samples: int = Field(10000, ge=1)
    deltas: Optional[List[float]] = None


class GaussianKnobs(_Knobs):
    exact: bool = False
    mode: Literal["enumerate", "monte_carlo"] = "monte_carlo"
    samples: int = Field(10000, ge=1)


class BandKnobs(_Knobs):
    width: float = Field(1.0, gt=0.0)
    lam: float = Field(1.0, ge=0.0, le=1.0)
    theta: float = Field(math.pi / 2, ge=0.0, le=math.pi)
    exact: bool = False
    mode: Literal["enumerate", "monte_carlo"] = "enumerate"
    samples: int = Field(10000, ge=1)


class MeshKnobs(_Knobs):
    panel: Optional[Literal["a", "b", "c"]] = None
    g: float = 0.5
    omega: float = 0.0
    a: float = Field(1.0, ge=0.0, le=1.0)
    t: float = Field(15 * math.pi / 64, ge=0.0)
    grid: Tuple[int, int] = (33, 64)


class RunConfig(_Knobs):
    scenario: Optional[Scenario] = None
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    threads: Optional[int] = Field(None, ge=1)
    dense_cap: int = Field(DENSE_CAP, ge=1)
    out: Optional[str] = None
    holevo: HolevoKnobs = HolevoKnobs()
    gaussian: GaussianKnobs = GaussianKnobs()
    band: BandKnobs = BandKnobs()
    mesh: MeshKnobs = MeshKnobs()

    @property
    def effective_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        if self.scenario is not None:
            return self.scenario.environment.seed
        return DEFAULT_SEED

    def require_scenario(self, command: str) -> Scenario:
        if self.scenario is None:
            raise ConfigError(f"'{command}' needs a scenario block in the config")
        return self.scenario

    def resolved(self) -> Dict[str, Any]:
        """Everything that determines the output, as plain JSON-able data."""
        return self.model_dump(mode="json", exclude={"threads", "out"})


def read_yaml(path: str) -> Dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise ConfigFileError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigFileError(f"cannot parse {path}: {e}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: top level must be a mapping, got {type(data).__name__}")
    return data


def apply_overrides(raw: Dict[str, Any], seed: Optional[int] = None, samples: Optional[int] = None,
                    threads: Optional[int] = None, delta: Optional[float] = None,
                    dense_cap: Optional[int] = None, out: Optional[str] = None) -> Dict[str, Any]:
    data = dict(raw)
    scenario = data.get("scenario")
    if seed is not None:
        data["seed"] = seed
        if isinstance(scenario, dict):
            env = dict(scenario.get("environment") or {})
            env["seed"] = seed
            scenario = {**scenario, "environment": env}
    if delta is not None:
        if isinstance(scenario, dict):
            scenario = {**scenario, "delta": delta}
        holevo = dict(data.get("holevo") or {})
        holevo.pop("deltas", None)
        data["holevo"] = holevo
    if samples is not None:
        for section in ("holevo", "gaussian", "band"):
            data[section] = {**(data.get(section) or {}), "samples": samples}
    if threads is not None:
        data["threads"] = threads
    if dense_cap is not None:
        data["dense_cap"] = dense_cap
    if out is not None:
        data["out"] = out
    if scenario is not None:
        data["scenario"] = scenario
    return data


def resolve(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            path = ".".join(str(p) for p in err["loc"]) or "config"
            problems.append(f"{path}: {err['msg']}")
        raise ScenarioValidationError(problems) from None


def load_run_config(path: str, **overrides) -> RunConfig:
    cfg = resolve(apply_overrides(read_yaml(path), **overrides))
    logger.debug("resolved config %s", cfg.resolved())
    return cfg
