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

"""Per-output diagnostics: estimate quantities, constraint residuals, energy ledger."""

import csv
import logging
from collections.abc import Iterable
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from lupe.diagnostics.balance import fd_balance
from lupe.diagnostics.regime import regime_indicator
from lupe.fields import (
    PhysParams,
    State,
    ddz,
    face_differences,
    field_inner,
    field_norm,
    gradient3,
    gradient_inner,
    horizontal_gradient,
    norm_H,
    norm_V,
)
from lupe.filtering import FilterKernel
from lupe.noise import NoiseModel, empty_model, noise_energy_rate
from lupe.operators import bottom_residual
from lupe.projectors import barotropic, baroclinic, barotropic_divergence

logger = logging.getLogger(__name__)


class DiagnosticsRecord(BaseModel):
    """One diagnostics row; every value is finite while the run is alive."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    t: float = Field(..., description="Model time (s)")
    step_index: int = Field(..., description="Steps taken")
    norm_h: float = Field(..., description="‖U‖_H")
    norm_v: float = Field(..., description="‖U‖_V")
    barotropic_norm_v: float = Field(..., description="‖v̄‖_V")
    dz_v_norm_h: float = Field(..., description="‖∂z v‖_H")
    dz_v_norm_v: float = Field(..., description="‖∂z v‖_V")
    baroclinic_l4: float = Field(..., description="‖ṽ‖_L4")
    baroclinic_cross_term: float = Field(..., description="∫|ṽ|²|∇ṽ|²")
    barotropic_divergence: float = Field(..., description="max |∇_H·Av| (1/s)")
    w_bottom_residual: float = Field(..., description="max |w(-h)| (m/s)")
    fd_balance_residual: float = Field(..., description="Relative fluctuation-dissipation residual on T")
    alpha2_over_ri: float = Field(..., description="α²/Ri, -1 when undefined")
    noise_shear_ratio: float = Field(..., description="α² Υ(∂zφ^H)²/N², -1 when undefined")
    kinetic_energy: float = Field(..., description="½‖v‖²_H (m^5/s^2)")
    dissipation_rate: float = Field(..., description="μ_v‖∇_H v‖² + ν_v‖∂z v‖²")
    noise_energy_rate: float = Field(..., description="½∫tr(a_HH)")


CSV_COLUMNS: tuple[str, ...] = tuple(DiagnosticsRecord.model_fields)


def estimate_quantities(
    state: State,
    params: PhysParams,
    model: NoiseModel | None = None,
    kernel: FilterKernel | None = None,
) -> DiagnosticsRecord:
    """Evaluates the energy-estimate quantities on ``state``."""
    grid = state.grid
    model = model if model is not None else empty_model(grid)
    v = state.v_star
    v_bar = barotropic(v)
    v_tilde = baroclinic(v)
    dz_v = ddz(grid, v, bottom="dirichlet")

    speed2 = np.sum(v_tilde**2, axis=0)
    l4 = float((np.sum(speed2**2) * grid.cell_volume) ** 0.25)
    grad2 = sum(np.sum(gradient3(grid, component) ** 2, axis=0) for component in v_tilde)
    cross = float(np.sum(speed2 * grad2) * grid.cell_volume)

    horizontal = field_inner(grid, horizontal_gradient(grid, v[0]), horizontal_gradient(grid, v[0]))
    horizontal += field_inner(grid, horizontal_gradient(grid, v[1]), horizontal_gradient(grid, v[1]))
    vertical = float(np.sum(face_differences(grid, v) ** 2) * grid.cell_volume)
    ratio, noise_ratio = regime_indicator(state, model, params).row_values()

    return DiagnosticsRecord(
        t=state.t,
        step_index=state.step_index,
        norm_h=norm_H(state),
        norm_v=norm_V(state, params),
        barotropic_norm_v=float(np.sqrt(gradient_inner(grid, v_bar, v_bar))),
        dz_v_norm_h=field_norm(grid, dz_v),
        dz_v_norm_v=float(np.sqrt(gradient_inner(grid, dz_v, dz_v))),
        baroclinic_l4=l4,
        baroclinic_cross_term=cross,
        barotropic_divergence=barotropic_divergence(grid, v),
        w_bottom_residual=bottom_residual(grid, v),
        fd_balance_residual=fd_balance(grid, state.T, model, kernel),
        alpha2_over_ri=ratio,
        noise_shear_ratio=noise_ratio,
        kinetic_energy=0.5 * field_inner(grid, v, v),
        dissipation_rate=params.mu_v * horizontal + params.nu_v * vertical,
        noise_energy_rate=noise_energy_rate(model),
    )


def _format(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def write_diagnostics_csv(path: str | Path, records: Iterable[DiagnosticsRecord]) -> Path:
    """Writes one row per record with a fixed header; output is byte-stable."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({key: _format(value) for key, value in record.model_dump().items()})
    return path


def read_diagnostics_csv(path: str | Path) -> list[DiagnosticsRecord]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return [DiagnosticsRecord.model_validate(row) for row in csv.DictReader(handle)]
