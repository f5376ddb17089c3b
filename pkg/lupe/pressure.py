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

"""Pressure terms of the hydrostatic closures.

All functions return forcings on the horizontal momentum, i.e. the quantity
added to dv*/dt, except ``weak_pressure_gradient`` which is the bounded
variation correction the stepper subtracts. Vertical integrals use the same
surface-anchored quadrature as the diagnostic vertical velocity.
"""

import logging

import numpy as np

from lupe.fields import (
    Grid,
    HVecField,
    PhysParams,
    ScalarField,
    divergence3,
    gradient3,
    horizontal_gradient,
)
from lupe.filtering import FilterKernel, apply_filter, filtered_variance_apply
from lupe.noise import NoiseIncrement, NoiseModel
from lupe.operators import (
    diffuse,
    integrate_from_surface,
    transport,
    vertical_noise_diffusion,
    vertical_velocity,
)
from lupe.projectors import project_gradient

logger = logging.getLogger(__name__)


def density(T: ScalarField, S: ScalarField, params: PhysParams) -> ScalarField:
    """Linear law of state."""
    return params.rho0 * (
        1.0 + params.beta_T * (T - params.T_r) + params.beta_S * (S - params.S_r)
    )


def hydrostatic_gradient(
    grid: Grid, T: ScalarField, S: ScalarField, params: PhysParams
) -> HVecField:
    """-g ∇_H ∫_z^0 (β_T (T - T_r) + β_S (S - S_r)) dz'."""
    buoyancy = params.beta_T * (T - params.T_r) + params.beta_S * (S - params.S_r)
    _, column = integrate_from_surface(grid, buoyancy)
    return -params.g * horizontal_gradient(grid, column)


def _total_vertical_velocity(grid: Grid, v_star: HVecField, model: NoiseModel) -> ScalarField:
    return vertical_velocity(grid, v_star) + model.w_s


def pressure_integrand_weak(
    grid: Grid, v_star: HVecField, model: NoiseModel, kernel: FilterKernel
) -> ScalarField:
    """K*[u_S·∇W] - ½∇·(a^K ∇W) with W = w(v*) + w_s."""
    grad_w = gradient3(grid, _total_vertical_velocity(grid, v_star, model))
    drift = apply_filter(kernel, grid, np.sum(model.u_s * grad_w, axis=0))
    return drift - 0.5 * divergence3(grid, filtered_variance_apply(model, kernel, grad_w))


def weak_pressure_gradient(
    grid: Grid, v_star: HVecField, model: NoiseModel, kernel: FilterKernel
) -> HVecField:
    """P^v ∇_H ∫_z^0 of the weak integrand; zero without active noise."""
    if not model.is_active:
        return grid.zeros((2,))
    _, column = integrate_from_surface(
        grid, pressure_integrand_weak(grid, v_star, model, kernel)
    )
    return project_gradient(grid, column)


def pressure_integrand_martingale(
    grid: Grid,
    v_star: HVecField,
    model: NoiseModel,
    kernel: FilterKernel,
    increment: NoiseIncrement,
    params: PhysParams,
) -> ScalarField:
    """K*[σdW·∇W] + A^v(σ^w dW)."""
    w_total = _total_vertical_velocity(grid, v_star, model)
    carried = apply_filter(kernel, grid, transport(grid, increment.sigma_dw, w_total))
    return carried + diffuse(grid, vertical_noise_diffusion(params), increment.sigma_dw[2])


def martingale_pressure_forcing(
    grid: Grid,
    v_star: HVecField,
    model: NoiseModel,
    kernel: FilterKernel,
    increment: NoiseIncrement,
    params: PhysParams,
) -> HVecField:
    """-(1/ρ0) P ∇_H dp^σ for one increment."""
    if not model.is_active:
        return grid.zeros((2,))
    _, column = integrate_from_surface(
        grid,
        pressure_integrand_martingale(grid, v_star, model, kernel, increment, params),
    )
    return project_gradient(grid, column)
