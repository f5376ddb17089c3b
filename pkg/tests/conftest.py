# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Shared fixtures for the lupe test suite"""

import math
from collections.abc import Callable
from pathlib import Path

import dotenv
import numpy as np
import pytest

from lupe.fields import Grid, PhysParams, State, make_grid
from lupe.runconfig import SimConfig, config_from_dict

DATA_DIR = Path(__file__).parent / "data"
SHIPPED_CONFIGS = Path(__file__).parents[1] / "eval" / "data"

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session", autouse=True)
def load_env():
    dotenv.load_dotenv()


@pytest.fixture
def grid() -> Grid:
    return make_grid(16, 16, 8, TWO_PI, TWO_PI, 1.0)


@pytest.fixture
def small_grid() -> Grid:
    return make_grid(8, 8, 4, TWO_PI, TWO_PI, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def params() -> PhysParams:
    return PhysParams(f=1.0, g=1.0, rho0=1.0, beta_T=-0.1, beta_S=0.0, T_r=0.0, alpha_T=0.05)


@pytest.fixture
def random_state(rng: np.random.Generator) -> Callable[[Grid], State]:
    """Factory for states filled with standard normal samples."""

    def make(grid: Grid) -> State:
        return State(
            grid,
            rng.standard_normal((2, *grid.shape)),
            rng.standard_normal(grid.shape),
            rng.standard_normal(grid.shape),
        )

    return make


def base_config(**sections: dict) -> dict:
    """A small nondimensional run configuration as a plain dict."""
    data: dict = {
        "grid": {"nx": 16, "ny": 16, "nz": 8, "Lx": TWO_PI, "Ly": TWO_PI, "h": 1.0},
        "physics": {
            "f": 1.0,
            "g": 1.0,
            "rho0": 1.0,
            "beta_T": -0.1,
            "beta_S": 0.0,
            "T_r": 0.0,
            "alpha_T": 0.01,
        },
        "closure": {"variant": "weak-filtered", "kernel": "gaussian", "length_scale": 0.3},
        "time": {"dt": 0.01, "t_end": 0.1, "output_every": 5},
        "init": {"preset": "baroclinic-mode", "params": {"u0": 0.1, "t_top": 1.0, "t_bottom": 0.0}},
        "seed": {"value": 11},
    }
    for name, values in sections.items():
        data[name] = {**data.get(name, {}), **values}
    return data


BHN_MODES = [
    {"name": "zonal", "kind": "bhn-streamfunction", "kx": 1, "amplitude": 0.05},
    {"name": "oblique", "kind": "bhn-streamfunction", "kx": 1, "ky": 1, "amplitude": 0.03, "phase": 0.4},
    {"name": "depth-uniform", "kind": "potential", "component": "z", "kx": 2, "ky": 1, "amplitude": 0.02},
]

BAROCLINIC_MODES = [
    {"name": "px", "kind": "potential", "component": "x", "kx": 1, "ky": 1, "m": 1, "amplitude": 0.02},
    {"name": "py", "kind": "potential", "component": "y", "kx": 2, "m": 2, "amplitude": 0.01},
    {"name": "pz", "kind": "potential", "component": "z", "kx": 1, "ky": 2, "m": 1, "amplitude": 0.02},
]


@pytest.fixture
def make_config() -> Callable[..., SimConfig]:
    def make(**sections: dict) -> SimConfig:
        return config_from_dict(base_config(**sections))

    return make


@pytest.fixture
def bhn_modes() -> list[dict]:
    return [dict(mode) for mode in BHN_MODES]


@pytest.fixture
def baroclinic_modes() -> list[dict]:
    return [dict(mode) for mode in BAROCLINIC_MODES]
