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

"""Finite-mode transport noise σ dW = √Υ Σ_k Δβ^k φ_k.

Modes are curls of trigonometric vector potentials, so each one is
divergence free in the discrete sense used throughout: the horizontal
spectral divergence of φ_H at cell centers plus the face difference of the
vertical component stored on faces vanishes to round-off, and the vertical
component is exactly zero on the top and bottom faces.
"""

import dataclasses
import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from lupe.errors import NoiseModelError
from lupe.fields import (
    Array,
    Grid,
    HVecField,
    TensorField,
    Vec3Field,
    ddx,
    ddy,
    ddz,
    divergence3,
    horizontal_divergence,
)
from lupe.operators import vertical_velocity_faces
from lupe.projectors import project

logger = logging.getLogger(__name__)

ITO_STOKES_RESIDUAL_WARNING = 1e-8


class ModeSpec(BaseModel):
    """One noise eigenmode as declared in a run configuration."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["potential", "bhn-streamfunction", "uniform"] = Field(
        ..., description="Construction used for the mode"
    )
    kx: int = Field(0, description="Horizontal wavenumber along x (cycles per Lx)")
    ky: int = Field(0, description="Horizontal wavenumber along y (cycles per Ly)")
    m: int = Field(0, ge=0, description="Vertical index of the sin/cos profile")
    amplitude: float = Field(
        ..., description="Potential amplitude (m^2/s); velocity (m/s) for uniform modes"
    )
    component: Literal["x", "y", "z"] = Field(
        "z", description="Vector potential component, or direction of a uniform mode"
    )
    phase: float = Field(0.0, description="Horizontal phase offset (rad)")
    name: str | None = Field(None, description="Label used in error messages")

    @field_validator("amplitude")
    @classmethod
    def _finite_amplitude(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("amplitude must be finite")
        return value

    def label(self, index: int) -> str:
        return self.name or f"mode[{index}] ({self.kind}, component={self.component})"

    def is_barotropic(self) -> bool:
        """True when the horizontal components cannot depend on z."""
        if self.kind in ("bhn-streamfunction", "uniform"):
            return True
        return self.component == "z" and self.m == 0


def check_mode_spec(spec: ModeSpec, index: int, grid: Grid, bhn: bool) -> None:
    """Band-limit and BHN checks; raises NoiseModelError naming the mode."""
    label = spec.label(index)
    if abs(spec.kx) > grid.nx // 4 or abs(spec.ky) > grid.ny // 4:
        raise NoiseModelError(
            f"{label}: wavenumbers ({spec.kx}, {spec.ky}) exceed half the Nyquist "
            f"limit ({grid.nx // 4}, {grid.ny // 4})"
        )
    if spec.m > grid.nz // 2:
        raise NoiseModelError(
            f"{label}: vertical index m={spec.m} exceeds half the vertical resolution ({grid.nz // 2})"
        )
    if spec.kind == "uniform" and spec.component == "z":
        raise NoiseModelError(f"{label}: a uniform mode cannot point along z (rigid lid)")
    if spec.kind == "potential" and spec.component in ("x", "y") and spec.m < 1:
        raise NoiseModelError(f"{label}: horizontal potentials need m >= 1")
    if bhn and not spec.is_barotropic():
        raise NoiseModelError(
            f"{label}: horizontal components depend on z, which violates the BHN structure"
        )


def _horizontal_pattern(grid: Grid, spec: ModeSpec) -> Array:
    """amp * sin(2π(kx x/Lx + ky y/Ly) + phase) shaped (nx, ny, 1)."""
    x = grid.x[:, None, None]
    y = grid.y[None, :, None]
    arg = 2.0 * np.pi * (spec.kx * x / grid.Lx + spec.ky * y / grid.Ly) + spec.phase
    return spec.amplitude * np.sin(arg)


def _build_mode(grid: Grid, spec: ModeSpec) -> tuple[HVecField, Array]:
    """Returns (φ_H at centers, φ_z on faces)."""
    nz = grid.nz
    w_faces = np.zeros((grid.nx, grid.ny, nz + 1))
    if spec.kind == "uniform":
        phi_h = grid.zeros((2,))
        phi_h[0 if spec.component == "x" else 1] = spec.amplitude
        return phi_h, w_faces

    s = _horizontal_pattern(grid, spec)
    if spec.kind == "bhn-streamfunction":
        layer = np.stack([-ddy(grid, s), ddx(grid, s)])
        return np.broadcast_to(layer, (2, *grid.shape)).copy(), w_faces

    if spec.component == "z":
        profile = np.cos(spec.m * np.pi * grid.z_centers / grid.h)
        psi = s * profile
        return np.stack([ddy(grid, psi), -ddx(grid, psi)]), w_faces

    profile = np.sin(spec.m * np.pi * grid.z_faces / grid.h)
    profile[0] = 0.0
    profile[-1] = 0.0
    psi_faces = s * profile
    dz_psi = np.diff(psi_faces, axis=-1) / grid.dz
    phi_h = grid.zeros((2,))
    if spec.component == "x":
        phi_h[1] = dz_psi
        w_faces = -ddy(grid, psi_faces)
    else:
        phi_h[0] = -dz_psi
        w_faces = ddx(grid, psi_faces)
    w_faces[..., 0] = 0.0
    w_faces[..., -1] = 0.0
    return phi_h, w_faces


def faces_to_centers(w_faces: Array) -> Array:
    return 0.5 * (w_faces[..., :-1] + w_faces[..., 1:])


def mode_divergence(grid: Grid, phi_h: HVecField, w_faces: Array) -> Array:
    """Discrete divergence of a face-staggered 3-vector."""
    return horizontal_divergence(grid, phi_h) + np.diff(w_faces, axis=-1) / grid.dz


def variance_tensor_from_modes(modes: Array, upsilon: float) -> TensorField:
    """a = Υ Σ_k φ_k φ_k^T, exactly symmetric."""
    shape = modes.shape[2:]
    a = np.zeros((3, 3, *shape))
    for i in range(3):
        for j in range(i, 3):
            acc = np.zeros(shape)
            for phi in modes:
                acc += phi[i] * phi[j]
            a[i, j] = upsilon * acc
            if j != i:
                a[j, i] = a[i, j]
    return a


def ito_stokes_raw(grid: Grid, a: TensorField) -> Vec3Field:
    """½ Σ_j ∂_j a_ij before any projection."""
    return 0.5 * np.stack(
        [ddx(grid, a[i, 0]) + ddy(grid, a[i, 1]) + ddz(grid, a[i, 2]) for i in range(3)]
    )


@dataclasses.dataclass(frozen=True)
class NoiseModel:
    """Immutable noise description for one run."""

    grid: Grid
    specs: tuple[ModeSpec, ...]
    modes_h: Array
    modes_w_faces: Array
    upsilon: float
    bhn: bool
    rng_seed: int
    a: TensorField
    v_s: HVecField
    w_s_faces: Array
    u_s_residual: float

    @property
    def n_modes(self) -> int:
        return len(self.specs)

    @property
    def modes(self) -> Array:
        """(K, 3, nx, ny, nz) modes with w averaged to centers."""
        if self.n_modes == 0:
            return np.zeros((0, 3, *self.grid.shape))
        w = faces_to_centers(self.modes_w_faces)[:, None]
        return np.concatenate([self.modes_h, w], axis=1)

    @property
    def u_s(self) -> Vec3Field:
        return np.concatenate([self.v_s, faces_to_centers(self.w_s_faces)[None]], axis=0)

    @property
    def w_s(self) -> Array:
        return faces_to_centers(self.w_s_faces)

    @property
    def is_active(self) -> bool:
        return self.upsilon > 0.0 and self.n_modes > 0

    def modes_at(self, t: float) -> Array:
        """Time-dependence hook; modes are constant in time."""
        del t
        return self.modes

    def with_upsilon(self, upsilon: float) -> "NoiseModel":
        return build_modes(self.specs, self.grid, upsilon, self.bhn, self.rng_seed)


def variance_tensor(model: NoiseModel) -> TensorField:
    return variance_tensor_from_modes(model.modes, model.upsilon)


def ito_stokes(
    grid: Grid, a: TensorField
) -> tuple[HVecField, Array, float]:
    """u_S = ½∇·a projected to be divergence free.

    Returns (v_s, w_s on faces, pre-projection divergence residual).
    """
    raw = ito_stokes_raw(grid, a)
    residual = float(np.max(np.abs(divergence3(grid, raw)))) if raw.size else 0.0
    v_s = project(grid, raw[:2])
    w_s_faces = vertical_velocity_faces(grid, v_s)
    return v_s, w_s_faces, residual


def build_modes(
    specs: Sequence[ModeSpec],
    grid: Grid,
    upsilon: float = 1.0,
    bhn: bool = False,
    rng_seed: int = 0,
) -> NoiseModel:
    """Builds the modes, the variance tensor and the Itô-Stokes drift."""
    if not math.isfinite(upsilon) or upsilon < 0.0:
        raise NoiseModelError(f"upsilon must be a finite non-negative number, got {upsilon}")
    specs = tuple(specs)
    for index, spec in enumerate(specs):
        check_mode_spec(spec, index, grid, bhn)

    k = len(specs)
    modes_h = np.zeros((k, 2, *grid.shape))
    modes_w = np.zeros((k, grid.nx, grid.ny, grid.nz + 1))
    for index, spec in enumerate(specs):
        modes_h[index], modes_w[index] = _build_mode(grid, spec)

    modes3 = np.concatenate([modes_h, faces_to_centers(modes_w)[:, None]], axis=1)
    a = variance_tensor_from_modes(modes3, upsilon)
    v_s, w_s_faces, residual = ito_stokes(grid, a)

    if residual > ITO_STOKES_RESIDUAL_WARNING:
        logger.warning(f"Itô-Stokes drift divergence before projection: {residual:.3e}")
    logger.info(
        f"Noise model: {k} modes, upsilon={upsilon:g}, bhn={bhn}, "
        f"Itô-Stokes residual={residual:.3e}"
    )
    return NoiseModel(
        grid=grid,
        specs=specs,
        modes_h=modes_h,
        modes_w_faces=modes_w,
        upsilon=float(upsilon),
        bhn=bhn,
        rng_seed=int(rng_seed),
        a=a,
        v_s=v_s,
        w_s_faces=w_s_faces,
        u_s_residual=residual,
    )


def empty_model(grid: Grid, rng_seed: int = 0) -> NoiseModel:
    return build_modes((), grid, upsilon=0.0, rng_seed=rng_seed)


# Sampling


@dataclasses.dataclass(frozen=True)
class NoiseIncrement:
    sigma_dw: Vec3Field
    dt: float
    gaussians: Array


def make_generator(seed: int, step_index: int, member: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, member, step)."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(member), int(step_index)))
    return np.random.Generator(np.random.Philox(sequence))


def increment_from_gaussians(
    model: NoiseModel, dt: float, gaussians: Array
) -> NoiseIncrement:
    """σΔW for given Brownian increments Δβ^k."""
    gaussians = np.asarray(gaussians, dtype=np.float64)
    if gaussians.shape != (model.n_modes,):
        raise NoiseModelError(
            f"expected {model.n_modes} Brownian increments, got shape {gaussians.shape}"
        )
    sigma_dw = model.grid.zeros((3,))
    if model.upsilon > 0.0:
        scale = math.sqrt(model.upsilon)
        for g, phi in zip(gaussians, model.modes, strict=True):
            sigma_dw += (scale * g) * phi
    return NoiseIncrement(sigma_dw=sigma_dw, dt=dt, gaussians=gaussians)


def sample_increment(
    model: NoiseModel, dt: float, rng: np.random.Generator
) -> NoiseIncrement:
    """Draws Δβ^k ~ N(0, dt) i.i.d. and assembles σΔW."""
    if not dt > 0.0:
        raise NoiseModelError(f"dt must be positive, got {dt}")
    gaussians = rng.normal(0.0, math.sqrt(dt), size=model.n_modes)
    return increment_from_gaussians(model, dt, gaussians)


def noise_energy_rate(model: NoiseModel) -> float:
    """½∫ tr(a_HH): kinetic energy injected by the noise per unit time."""
    grid = model.grid
    return float(0.5 * np.sum(model.a[0, 0] + model.a[1, 1]) * grid.cell_volume)
