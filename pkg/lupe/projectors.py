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

"""Barotropic/baroclinic splitting and the Leray-type projectors."""

import logging

import numpy as np

from lupe.errors import ProjectionError
from lupe.fields import Grid, HVecField, ScalarField, State, hfft, horizontal_divergence, horizontal_gradient, ihfft

logger = logging.getLogger(__name__)

BAROTROPIC_TOLERANCE = 1e-12


def barotropic(v: HVecField) -> HVecField:
    """Depth average broadcast back over z."""
    return np.broadcast_to(v.mean(axis=-1, keepdims=True), v.shape).copy()


def baroclinic(v: HVecField) -> HVecField:
    return v - barotropic(v)


def _check_z_independent(vbar: HVecField) -> None:
    scale = float(np.max(np.abs(vbar))) if vbar.size else 0.0
    spread = float(np.max(np.abs(vbar - vbar[..., :1]))) if vbar.size else 0.0
    if spread > BAROTROPIC_TOLERANCE * max(scale, 1.0):
        raise ProjectionError(
            f"2D Leray projector needs a z-independent field (layer spread {spread:.3e})"
        )


def leray2d(grid: Grid, vbar: HVecField) -> HVecField:
    """Spectral (I - k k^T / |k|^2) on a barotropic field.

    The projection is computed on the top layer and broadcast, so the
    output layers are identical.
    """
    _check_z_independent(vbar)
    layer = vbar[..., -1:]
    vh = hfft(layer)
    kx, ky = grid.kx_deriv, grid.ky_deriv
    k2 = grid.k2_deriv
    safe = np.where(k2 > 0.0, k2, 1.0)
    k_dot_v = (kx * vh[0] + ky * vh[1]) / safe
    k_dot_v = np.where(k2 > 0.0, k_dot_v, 0.0)
    projected = ihfft(np.stack([vh[0] - kx * k_dot_v, vh[1] - ky * k_dot_v]))
    return np.broadcast_to(projected, vbar.shape).copy()


def project(grid: Grid, v: HVecField) -> HVecField:
    """P^v(v) = P_2D A(v) + R(v)."""
    mean = barotropic(v)
    return leray2d(grid, mean) + (v - mean)


def project_state(grid: Grid, state: State) -> State:
    """P(U) = (P^v v, T, S)."""
    return state.replace(v_star=project(grid, state.v_star))


def project_gradient(grid: Grid, p: ScalarField) -> HVecField:
    """P^v ∇_H p."""
    return project(grid, horizontal_gradient(grid, p))


def barotropic_divergence(grid: Grid, v: HVecField) -> float:
    """max |∇_H·A v|."""
    return float(np.max(np.abs(horizontal_divergence(grid, v.mean(axis=-1, keepdims=True)))))
