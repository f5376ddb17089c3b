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

"""Richardson-regime indicators of the hydrostatic approximation."""

import dataclasses
import logging
import math

import numpy as np

from lupe.fields import PhysParams, State, face_differences
from lupe.noise import NoiseModel
from lupe.pressure import density

logger = logging.getLogger(__name__)

# Stored in diagnostics rows when a ratio is undefined.
UNDEFINED_RATIO = -1.0


@dataclasses.dataclass(frozen=True)
class RegimeIndicator:
    n2_median: float
    shear2_median: float
    richardson: float
    alpha2: float
    alpha2_over_ri: float
    stochastic_shear: float
    noise_shear_ratio: float
    flagged: bool
    reason: str = ""

    def row_values(self) -> tuple[float, float]:
        """(α²/Ri, noise ratio) with undefined values replaced by a sentinel."""
        def clean(value: float) -> float:
            return value if math.isfinite(value) else UNDEFINED_RATIO

        return clean(self.alpha2_over_ri), clean(self.noise_shear_ratio)


def stochastic_shear(model: NoiseModel) -> float:
    """Υ max_x Σ_k |∂z φ_k^H|²; exactly zero for barotropic noise."""
    if model.n_modes == 0 or model.grid.nz < 2:
        return 0.0
    shear = np.sum(face_differences(model.grid, model.modes_h) ** 2, axis=(0, 1))
    return float(model.upsilon * np.max(shear))


def regime_indicator(state: State, model: NoiseModel, params: PhysParams) -> RegimeIndicator:
    """N², Ri and the two validity ratios, all from domain medians."""
    grid = state.grid
    alpha2 = grid.h**2 / (grid.Lx * grid.Ly)
    noise_shear = stochastic_shear(model)
    if grid.nz < 2:
        return RegimeIndicator(
            math.nan, math.nan, math.nan, alpha2, math.nan, noise_shear, math.nan, True,
            "single layer: no vertical structure",
        )

    rho = density(state.T, state.S, params)
    n2 = -(params.g / params.rho0) * face_differences(grid, rho)
    shear2 = np.sum(face_differences(grid, state.v_star) ** 2, axis=0)
    n2_median = float(np.median(n2))
    shear2_median = float(np.median(shear2))

    if n2_median <= 0.0:
        logger.debug(f"Regime indicator undefined: median N^2 = {n2_median:.3e}")
        return RegimeIndicator(
            n2_median, shear2_median, math.nan, alpha2, math.nan, noise_shear, math.nan,
            True, "unstratified",
        )
    noise_ratio = alpha2 * noise_shear / n2_median
    if shear2_median == 0.0:
        return RegimeIndicator(
            n2_median, 0.0, math.inf, alpha2, 0.0, noise_shear, noise_ratio, True,
            "no resolved shear",
        )
    richardson = n2_median / shear2_median
    return RegimeIndicator(
        n2_median,
        shear2_median,
        richardson,
        alpha2,
        alpha2 / richardson,
        noise_shear,
        noise_ratio,
        False,
    )
