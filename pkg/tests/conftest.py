import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))  # Root

import math

import numpy as np
import pytest

from engine.model import SpinSpec
from utils.qmath import QubitState

FIG2_T = 15 * math.pi / 64


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale runs, deselect with -m 'not slow'")


def spin(g=0.5, omega=0.0, a=1.0, theta=math.pi / 2, phi=0.0) -> SpinSpec:
    return SpinSpec(g=g, omega=omega, init=QubitState(a=a, theta=theta, phi=phi))


def random_spins(rng: np.random.Generator, n: int, pure: bool = False, field: bool = True):
    return [
        spin(
            g=rng.uniform(-1.5, 1.5),
            omega=rng.uniform(-1.5, 1.5) if field else 0.0,
            a=1.0 if pure else rng.uniform(0.05, 0.999),
            theta=rng.uniform(0, math.pi),
            phi=rng.uniform(0, 2 * math.pi),
        )
        for _ in range(n)
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fig2a_spin():
    return spin(g=0.5, omega=0.0, a=1.0)
