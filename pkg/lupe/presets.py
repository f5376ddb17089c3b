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

"""Named initial conditions.

Each preset owns a pydantic parameter model that rejects unknown keys, and a
builder producing a ``State`` at t = 0. Builders return unprojected
velocities; the run loop applies the Leray projector before the first step.
"""

import logging
import math
from collections.abc import Callable, Mapping
from typing import Any, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from lupe.errors import ConfigError
from lupe.fields import Array, Grid, PhysParams, State
from lupe.operators import temperature_diffusion, vertical_laplacian_matrix

logger = logging.getLogger(__name__)


class _PresetParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class StratifiedParams(_PresetParams):
    t_top: float = Field(15.0, description="Surface temperature (degC)")
    t_bottom: float = Field(5.0, description="Bottom temperature (degC)")
    salinity: float = Field(35.0, description="Uniform salinity (psu)")


class JetParams(StratifiedParams):
    u0: float = Field(0.1, description="Jet speed (m/s)")
    wavenumber: int = Field(1, ge=1, description="Meridional wavenumber of the jet")


class BaroclinicParams(StratifiedParams):
    u0: float = Field(0.1, description="Velocity amplitude (m/s)")
    wavenumber: int = Field(1, ge=1, description="Zonal wavenumber")
    vertical_mode: int = Field(1, ge=1, description="Vertical cosine index")


class RobinModeParams(_PresetParams):
    amplitude: float = Field(1.0, description="Temperature amplitude (degC)")
    mode: int = Field(0, ge=0, description="Eigenmode index, 0 decays slowest")
    salinity: float = Field(35.0, description="Uniform salinity (psu)")


def _linear_profile(grid: Grid, top: float, bottom: float) -> Array:
    _, _, z = grid.mesh()
    return bottom + (top - bottom) * (z + grid.h) / grid.h


def rest_stratified(grid: Grid, params: StratifiedParams, phys: PhysParams) -> State:
    del phys
    T = _linear_profile(grid, params.t_top, params.t_bottom)
    return State(grid, grid.zeros((2,)), T, np.full(grid.shape, params.salinity))


def barotropic_jet(grid: Grid, params: JetParams, phys: PhysParams) -> State:
    state = rest_stratified(grid, params, phys)
    _, y, _ = grid.mesh()
    v = grid.zeros((2,))
    v[0] = params.u0 * np.sin(2.0 * np.pi * params.wavenumber * y / grid.Ly)
    return state.replace(v_star=v)


def baroclinic_mode(grid: Grid, params: BaroclinicParams, phys: PhysParams) -> State:
    state = rest_stratified(grid, params, phys)
    x, _, z = grid.mesh()
    v = grid.zeros((2,))
    v[0] = (
        params.u0
        * np.cos(params.vertical_mode * np.pi * z / grid.h)
        * np.sin(2.0 * np.pi * params.wavenumber * x / grid.Lx)
    )
    return state.replace(v_star=v)


def robin_eigenpair(grid: Grid, phys: PhysParams, mode: int = 0) -> tuple[float, Array]:
    """Decay rate λ >= 0 and unit column vector of the discrete Robin heat operator."""
    if mode >= grid.nz:
        raise ConfigError(f"robin mode {mode} exceeds the {grid.nz} available eigenmodes")
    matrix = vertical_laplacian_matrix(grid, temperature_diffusion(phys))
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    order = np.argsort(-eigenvalues)
    rate = float(-eigenvalues[order[mode]])
    vector = eigenvectors[:, order[mode]]
    if vector[-1] < 0:
        vector = -vector
    return rate, vector


def robin_decay_rate(grid: Grid, phys: PhysParams, mode: int = 0) -> float:
    """Continuous decay rate ν_T k² of the Robin column mode cos(k(z + h)).

    k is the root of k tan(kh) = α_T/ν_T in [mode π/h, (mode + ½) π/h).
    """
    h, ratio = grid.h, phys.alpha_T / phys.nu_T
    low = mode * math.pi / h
    if ratio == 0.0:
        return phys.nu_T * low**2
    high = (mode + 0.5) * math.pi / h
    k = brentq(lambda k: k * math.sin(k * h) - ratio * math.cos(k * h), low, high, xtol=1e-15)
    return phys.nu_T * k**2


def robin_heat_mode(grid: Grid, params: RobinModeParams, phys: PhysParams) -> State:
    rate, profile = robin_eigenpair(grid, phys, params.mode)
    logger.debug(
        f"Robin mode {params.mode}: discrete rate {rate:.6g}, "
        f"continuous rate {robin_decay_rate(grid, phys, params.mode):.6g}"
    )
    T = np.broadcast_to(params.amplitude * profile, grid.shape).copy()
    return State(grid, grid.zeros((2,)), T, np.full(grid.shape, params.salinity))


class Preset(NamedTuple):
    params_model: type[_PresetParams]
    builder: Callable[[Grid, Any, PhysParams], State]


PRESETS: dict[str, Preset] = {
    "rest-stratified": Preset(StratifiedParams, rest_stratified),
    "barotropic-jet": Preset(JetParams, barotropic_jet),
    "baroclinic-mode": Preset(BaroclinicParams, baroclinic_mode),
    "robin-heat-mode": Preset(RobinModeParams, robin_heat_mode),
}


def validate_preset(name: str, params: Mapping[str, Any]) -> _PresetParams:
    """Raises ValueError on unknown presets or parameters."""
    if name not in PRESETS:
        raise ValueError(f"unknown init preset '{name}'; choose from {sorted(PRESETS)}")
    return PRESETS[name].params_model.model_validate(dict(params))


def initial_state(
    grid: Grid, name: str, params: Mapping[str, Any], phys: PhysParams
) -> State:
    preset = PRESETS[name]
    logger.debug(f"Building initial state from preset {name}")
    return preset.builder(grid, validate_preset(name, params), phys)
