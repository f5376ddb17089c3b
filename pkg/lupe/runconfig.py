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

"""Run configuration schema and TOML loading.

A run file has the sections [grid], [physics], [noise] with [[noise.modes]],
[closure], [time], [init] and [seed]. Every section rejects unknown keys and
all quantities are SI.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Literal

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from lupe.errors import ConfigError
from lupe.fields import Grid, PhysParams, make_grid
from lupe.filtering import FilterKernel, KernelKind
from lupe.noise import ModeSpec, check_mode_spec
from lupe.presets import validate_preset

logger = logging.getLogger(__name__)

ClosureVariant = Literal["deterministic", "strong", "weak-filtered"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSection(_Section):
    nx: int = Field(..., gt=0, description="Cells along x (power of two)")
    ny: int = Field(..., gt=0, description="Cells along y (power of two)")
    nz: int = Field(..., gt=0, description="Vertical layers")
    Lx: float = Field(..., gt=0, description="Zonal extent (m)")
    Ly: float = Field(..., gt=0, description="Meridional extent (m)")
    h: float = Field(..., gt=0, description="Depth (m)")

    @model_validator(mode="after")
    def _valid_geometry(self) -> "GridSection":
        self.to_grid()
        return self

    def to_grid(self) -> Grid:
        return make_grid(self.nx, self.ny, self.nz, self.Lx, self.Ly, self.h)


class NoiseSection(_Section):
    upsilon: float = Field(0.0, ge=0, description="Noise scaling Υ (dimensionless)")
    bhn: bool = Field(False, description="Require barotropic horizontal noise")
    modes: list[ModeSpec] = Field(default_factory=list, description="Noise eigenmodes")


class ClosureSection(_Section):
    variant: ClosureVariant = Field("weak-filtered", description="Hydrostatic closure")
    kernel: KernelKind = Field("gaussian", description="Regularizing kernel K")
    length_scale: float = Field(0.0, ge=0, description="Gaussian kernel width (m)")
    cutoff: float = Field(0.0, ge=0, description="Sharp cutoff wavenumber (rad/m)")
    horizontal_only: bool = Field(False, description="Filter horizontally only")

    @model_validator(mode="after")
    def _valid_kernel(self) -> "ClosureSection":
        self.to_kernel()
        return self

    def to_kernel(self) -> FilterKernel:
        return FilterKernel(
            kind=self.kernel,
            length_scale=self.length_scale,
            cutoff=self.cutoff,
            horizontal_only=self.horizontal_only,
        )


class TimeSection(_Section):
    dt: float = Field(..., gt=0, description="Time step (s)")
    t_end: float = Field(..., ge=0, description="Final time (s)")
    output_every: int = Field(1, ge=1, description="Steps between diagnostics rows")
    vertical_diffusion: Literal["explicit", "implicit"] = Field(
        "implicit", description="Vertical diffusion treatment"
    )
    tol_div: float = Field(1e-9, gt=0, description="Barotropic divergence tolerance (1/s)")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


class InitSection(_Section):
    preset: str = Field("rest-stratified", description="Initial-condition preset")
    params: dict[str, Any] = Field(default_factory=dict, description="Preset parameters")

    @model_validator(mode="after")
    def _valid_preset(self) -> "InitSection":
        validate_preset(self.preset, self.params)
        return self


class SeedSection(_Section):
    value: int = Field(0, ge=0, description="Base seed of the noise streams")


class SimConfig(_Section):
    """Validated run configuration."""

    grid: GridSection
    physics: PhysParams = Field(default_factory=PhysParams)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    closure: ClosureSection = Field(default_factory=ClosureSection)
    time: TimeSection
    init: InitSection = Field(default_factory=InitSection)
    seed: SeedSection = Field(default_factory=SeedSection)

    @model_validator(mode="after")
    def _consistent(self) -> "SimConfig":
        grid = self.grid.to_grid()
        for index, spec in enumerate(self.noise.modes):
            check_mode_spec(spec, index, grid, self.noise.bhn)

        phys = self.physics
        mu_max = max(phys.mu_v, phys.mu_T, phys.mu_S)
        horizontal_bound = min(grid.dx, grid.dy) ** 2 / (4.0 * mu_max)
        if self.time.dt > horizontal_bound:
            raise ValueError(
                f"dt={self.time.dt:g} exceeds the horizontal diffusion bound {horizontal_bound:.4g}"
            )
        if self.time.vertical_diffusion == "explicit":
            nu_max = max(phys.nu_v, phys.nu_T, phys.nu_S)
            vertical_bound = grid.dz**2 / (2.0 * nu_max)
            if self.time.dt > vertical_bound:
                raise ValueError(
                    f"dt={self.time.dt:g} exceeds the explicit vertical diffusion bound "
                    f"{vertical_bound:.4g}"
                )
        return self

    def to_grid(self) -> Grid:
        return self.grid.to_grid()

    @property
    def effective_upsilon(self) -> float:
        return 0.0 if self.closure.variant == "deterministic" else self.noise.upsilon

    def with_upsilon(self, upsilon: float) -> "SimConfig":
        return self.model_copy(update={"noise": self.noise.model_copy(update={"upsilon": upsilon})})

    def with_steps(self, n_steps: int) -> "SimConfig":
        return self.model_copy(
            update={"time": self.time.model_copy(update={"t_end": n_steps * self.time.dt})}
        )

    def with_closure(self, variant: ClosureVariant) -> "SimConfig":
        return self.model_copy(
            update={"closure": self.closure.model_copy(update={"variant": variant})}
        )


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    try:
        return SimConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e


def parse_config(path: str | Path) -> SimConfig:
    """Loads and validates a TOML run file."""
    path = Path(path)
    with path.open("rb") as handle:
        try:
            data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: malformed TOML: {e}") from e
    config = config_from_dict(data)
    logger.info(
        f"Loaded {path}: closure={config.closure.variant}, "
        f"{len(config.noise.modes)} modes, {config.time.n_steps} steps"
    )
    return config
