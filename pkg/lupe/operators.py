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

"""Discrete operators of the primitive system.

Covers the diagnostic vertical velocity, advection, the anisotropic diffusion
operators with their boundary closures, Coriolis and the stochastic diffusion
term. Vertical closures are realized with one ghost value per side: the ghost
equals ``ratio * q`` at the adjacent cell, with ratio 1 for Neumann, -1 for
Dirichlet and ``(1 - alpha*dz/2nu) / (1 + alpha*dz/2nu)`` for the Robin surface
condition ``nu dq/dz + alpha q = 0`` imposed on the face between the top cell
and its ghost.
"""

import dataclasses
import logging
from typing import Literal

import numpy as np
from scipy.linalg import solve_banded

from lupe.fields import (
    Array,
    Grid,
    HVecField,
    PhysParams,
    ScalarField,
    TensorField,
    Vec3Field,
    VerticalClosure,
    ddx,
    ddy,
    ddz,
    divergence3,
    gradient3,
    horizontal_divergence,
    horizontal_laplacian,
)

logger = logging.getLogger(__name__)

TopClosure = Literal["neumann", "robin", "dirichlet"]


@dataclasses.dataclass(frozen=True)
class DiffusionParams:
    """Coefficients and closures of A = -mu Δ_H - nu ∂zz."""

    mu: float
    nu: float
    top: TopClosure = "neumann"
    bottom: VerticalClosure = "neumann"
    robin_alpha: float = 0.0

    def __post_init__(self) -> None:
        if not (self.mu > 0 and self.nu > 0):
            raise ValueError(f"diffusion coefficients must be positive: mu={self.mu}, nu={self.nu}")
        if self.robin_alpha < 0:
            raise ValueError(f"robin_alpha must be non-negative, got {self.robin_alpha}")

    def ghost_ratios(self, dz: float) -> tuple[float, float]:
        """(bottom, top) ghost ratios."""
        bottom = 1.0 if self.bottom == "neumann" else -1.0
        if self.top == "neumann":
            top = 1.0
        elif self.top == "dirichlet":
            top = -1.0
        else:
            half = 0.5 * self.robin_alpha * dz / self.nu
            top = (1.0 - half) / (1.0 + half)
        return bottom, top


def velocity_diffusion(params: PhysParams) -> DiffusionParams:
    return DiffusionParams(params.mu_v, params.nu_v, top="neumann", bottom="dirichlet")


def temperature_diffusion(params: PhysParams) -> DiffusionParams:
    return DiffusionParams(
        params.mu_T, params.nu_T, top="robin", bottom="neumann", robin_alpha=params.alpha_T
    )


def salinity_diffusion(params: PhysParams) -> DiffusionParams:
    return DiffusionParams(params.mu_S, params.nu_S, top="neumann", bottom="neumann")


def vertical_noise_diffusion(params: PhysParams) -> DiffusionParams:
    """A^v with homogeneous Dirichlet closures, for the vertical noise component."""
    return DiffusionParams(params.mu_v, params.nu_v, top="dirichlet", bottom="dirichlet")


# Vertical integration


def integrate_from_surface(grid: Grid, q: Array) -> tuple[Array, Array]:
    """∫_z^0 q dz' on faces and at centers.

    Faces accumulate midpoint cells from the surface, so the top face is
    exactly zero and the bottom face carries the full column integral.
    Centers average the two bounding faces.
    """
    partial = np.cumsum(q[..., ::-1], axis=-1)[..., ::-1] * grid.dz
    faces = np.concatenate([partial, np.zeros_like(q[..., :1])], axis=-1)
    centers = 0.5 * (faces[..., :-1] + faces[..., 1:])
    return faces, centers


def vertical_velocity_faces(grid: Grid, v: HVecField) -> Array:
    faces, _ = integrate_from_surface(grid, horizontal_divergence(grid, v))
    return faces


def vertical_velocity(grid: Grid, v: HVecField) -> ScalarField:
    """w(v) = ∫_z^0 ∇_H·v dz' at cell centers."""
    _, centers = integrate_from_surface(grid, horizontal_divergence(grid, v))
    return centers


def bottom_residual(grid: Grid, v: HVecField) -> float:
    """max |w(-h)|; zero when the barotropic divergence vanishes."""
    return float(np.max(np.abs(vertical_velocity_faces(grid, v)[..., 0])))


# Advection and transport


def transport(
    grid: Grid, u: Vec3Field, q: Array, bottom: VerticalClosure = "neumann"
) -> Array:
    """(u·∇)q for a scalar or each component of a vector field."""
    return u[0] * ddx(grid, q) + u[1] * ddy(grid, q) + u[2] * ddz(grid, q, bottom)


def advect(
    grid: Grid, v_star: HVecField, q: Array, bottom: VerticalClosure = "neumann"
) -> Array:
    """B(v*, q) = (v*·∇_H)q + w(v*)∂z q."""
    w = vertical_velocity(grid, v_star)
    return (
        v_star[0] * ddx(grid, q)
        + v_star[1] * ddy(grid, q)
        + w * ddz(grid, q, bottom)
    )


# Diffusion


def vertical_laplacian(grid: Grid, params: DiffusionParams, q: Array) -> Array:
    """∂zz q with the ghost closures of ``params``."""
    r_bottom, r_top = params.ghost_ratios(grid.dz)
    padded = np.concatenate([r_bottom * q[..., :1], q, r_top * q[..., -1:]], axis=-1)
    return (padded[..., 2:] - 2.0 * padded[..., 1:-1] + padded[..., :-2]) / grid.dz**2


def diffuse(grid: Grid, params: DiffusionParams, q: Array) -> Array:
    """A q = -mu Δ_H q - nu ∂zz q (non-negative operator)."""
    return -params.mu * horizontal_laplacian(grid, q) - params.nu * vertical_laplacian(
        grid, params, q
    )


def vertical_laplacian_matrix(grid: Grid, params: DiffusionParams) -> Array:
    """Dense ``nu ∂zz`` acting on one column (symmetric)."""
    n = grid.nz
    r_bottom, r_top = params.ghost_ratios(grid.dz)
    mat = (
        np.diag(np.full(n, -2.0))
        + np.diag(np.ones(n - 1), 1)
        + np.diag(np.ones(n - 1), -1)
    )
    mat[0, 0] += r_bottom
    mat[-1, -1] += r_top
    return params.nu / grid.dz**2 * mat


def _implicit_bands(grid: Grid, params: DiffusionParams, dt: float) -> Array:
    n = grid.nz
    r_bottom, r_top = params.ghost_ratios(grid.dz)
    c = dt * params.nu / grid.dz**2
    ab = np.zeros((3, n))
    ab[0, 1:] = -c
    ab[2, :-1] = -c
    ab[1, :] = 1.0 + 2.0 * c
    ab[1, 0] -= c * r_bottom
    ab[1, -1] -= c * r_top
    return ab


def solve_vertical_diffusion(
    grid: Grid, params: DiffusionParams, q: Array, dt: float
) -> Array:
    """Solves (I - dt nu ∂zz) q_new = q column by column."""
    ab = _implicit_bands(grid, params, dt)
    columns = np.moveaxis(q, -1, 0).reshape(grid.nz, -1)
    solved = solve_banded((1, 1), ab, columns, check_finite=False)
    return np.moveaxis(solved.reshape(grid.nz, *q.shape[:-1]), 0, -1)


# Rotation and stochastic diffusion


def coriolis(v: HVecField, f: float) -> HVecField:
    """Γ(a, b) = f(-b, a)."""
    return np.stack([-f * v[1], f * v[0]])


def stochastic_diffusion(grid: Grid, a: TensorField, q: Array) -> Array:
    """½∇·(a∇q), scalar or componentwise for vectors."""
    if q.ndim == 4:
        return np.stack([stochastic_diffusion(grid, a, qc) for qc in q])
    flux = np.einsum("ij...,j...->i...", a, gradient3(grid, q))
    return 0.5 * divergence3(grid, flux)
