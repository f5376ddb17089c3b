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

"""Fluctuation-dissipation balance of the transport noise."""

import numpy as np

from lupe.fields import Grid, ScalarField, divergence3, field_inner, gradient3
from lupe.filtering import FilterKernel, apply_filter, filtered_variance_apply
from lupe.noise import NoiseModel


def backscatter(grid: Grid, q: ScalarField, model: NoiseModel, kernel: FilterKernel | None = None) -> float:
    """Σ_k Υ ‖(K*)(φ_k·∇q)‖²_H: energy the noise injects into q."""
    grad_q = gradient3(grid, q)
    total = 0.0
    for phi in model.modes:
        carried = np.sum(phi * grad_q, axis=0)
        if kernel is not None:
            carried = apply_filter(kernel, grid, carried)
        total += field_inner(grid, carried, carried)
    return model.upsilon * total


def dissipation(grid: Grid, q: ScalarField, model: NoiseModel, kernel: FilterKernel | None = None) -> float:
    """2 (½∇·(a^(K)∇q), q)_H."""
    grad_q = gradient3(grid, q)
    if kernel is None:
        flux = np.einsum("ij...,j...->i...", model.a, grad_q)
    else:
        flux = filtered_variance_apply(model, kernel, grad_q)
    return 2.0 * field_inner(grid, 0.5 * divergence3(grid, flux), q)


def fd_balance(
    grid: Grid, q: ScalarField, model: NoiseModel, kernel: FilterKernel | None = None
) -> float:
    """Relative residual of the backscatter/stochastic-diffusion cancellation.

    Returns 0 when the noise injects nothing into ``q``.
    """
    if not model.is_active:
        return 0.0
    injected = backscatter(grid, q, model, kernel)
    if injected <= 0.0:
        return 0.0
    return (injected + dissipation(grid, q, model, kernel)) / injected
