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

"""Grid geometry, prognostic state and the discrete calculus every module shares.

Scalars are float64 arrays shaped ``(nx, ny, nz)``. Horizontal vectors carry a
leading component axis ``(2, nx, ny, nz)``, 3-vectors ``(3, nx, ny, nz)`` and
tensors ``(3, 3, nx, ny, nz)``. Horizontal axes are always the last-but-two
and last-but-one, so FFTs run over ``axes=(-3, -2)`` for every rank.

Horizontal derivatives are spectral with the Nyquist mode removed, which keeps
``ddx`` and ``ddy`` exactly antisymmetric. The vertical derivative is a
centered difference with mirror ghosts; ``ddz_flux_divergence`` is its exact
negative adjoint so that the 3D divergence and gradient integrate by parts to
round-off.
"""

import dataclasses
import logging
from functools import cached_property
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy import fft as sfft

from lupe.config import fft_workers
from lupe.errors import FieldShapeError, GridError

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
ScalarField = Array
HVecField = Array
Vec3Field = Array
TensorField = Array

VerticalClosure = Literal["neumann", "dirichlet"]

_HAXES = (-3, -2)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclasses.dataclass(frozen=True)
class Grid:
    """Doubly periodic box of depth ``h`` with ``nz`` layers."""

    nx: int
    ny: int
    nz: int
    Lx: float
    Ly: float
    h: float

    def __post_init__(self) -> None:
        for name in ("nx", "ny", "nz"):
            if int(getattr(self, name)) <= 0:
                raise GridError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("nx", "ny"):
            if not _is_power_of_two(int(getattr(self, name))):
                raise GridError(
                    f"{name}={getattr(self, name)} is not a power of two"
                )
        for name in ("Lx", "Ly", "h"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise GridError(f"{name} must be a positive length, got {value}")

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def dz(self) -> float:
        return self.h / self.nz

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dz

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly * self.h

    @cached_property
    def z_faces(self) -> Array:
        faces = np.linspace(-self.h, 0.0, self.nz + 1)
        faces[0] = -self.h
        faces[-1] = 0.0
        return faces

    @cached_property
    def z_centers(self) -> Array:
        return 0.5 * (self.z_faces[:-1] + self.z_faces[1:])

    @cached_property
    def x(self) -> Array:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> Array:
        return np.arange(self.ny) * self.dy

    def mesh(self) -> tuple[Array, Array, Array]:
        """Full ``(nx, ny, nz)`` coordinate arrays at cell centers."""
        return np.meshgrid(self.x, self.y, self.z_centers, indexing="ij")

    @cached_property
    def kx(self) -> Array:
        """Full angular wavenumbers along x, shaped for broadcasting."""
        return (2.0 * np.pi * sfft.fftfreq(self.nx, d=self.dx))[:, None, None]

    @cached_property
    def ky(self) -> Array:
        return (2.0 * np.pi * sfft.fftfreq(self.ny, d=self.dy))[None, :, None]

    @cached_property
    def kx_deriv(self) -> Array:
        """Wavenumbers used by derivatives: Nyquist removed."""
        k = self.kx.copy()
        if self.nx % 2 == 0:
            k[self.nx // 2] = 0.0
        return k

    @cached_property
    def ky_deriv(self) -> Array:
        k = self.ky.copy()
        if self.ny % 2 == 0:
            k[:, self.ny // 2] = 0.0
        return k

    @cached_property
    def k2_deriv(self) -> Array:
        return self.kx_deriv**2 + self.ky_deriv**2

    def zeros(self, components: tuple[int, ...] = ()) -> Array:
        return np.zeros((*components, *self.shape), dtype=np.float64)


def make_grid(nx: int, ny: int, nz: int, Lx: float, Ly: float, h: float) -> Grid:
    """Builds a validated grid; raises GridError on bad geometry."""
    grid = Grid(int(nx), int(ny), int(nz), float(Lx), float(Ly), float(h))
    logger.debug(
        f"Grid {grid.nx}x{grid.ny}x{grid.nz} dx={grid.dx:.4g} dy={grid.dy:.4g} dz={grid.dz:.4g}"
    )
    return grid


def check_field(grid: Grid, field: Array, components: tuple[int, ...] = ()) -> Array:
    expected = (*components, *grid.shape)
    if field.shape != expected:
        raise FieldShapeError(f"field shape {field.shape} does not match {expected}")
    return field


class PhysParams(BaseModel):
    """Physical constants of the primitive equations (SI units)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    f: float = Field(1.0e-4, description="Coriolis parameter (1/s)")
    g: float = Field(9.81, gt=0, description="Gravity (m/s^2)")
    rho0: float = Field(1025.0, gt=0, description="Reference density (kg/m^3)")
    beta_T: float = Field(-2.0e-4, description="Thermal coefficient (1/degC)")
    beta_S: float = Field(7.6e-4, description="Haline coefficient (1/psu)")
    T_r: float = Field(10.0, description="Reference temperature (degC)")
    S_r: float = Field(35.0, description="Reference salinity (psu)")
    mu_v: float = Field(1.0e-2, gt=0, description="Horizontal viscosity (m^2/s)")
    nu_v: float = Field(1.0e-2, gt=0, description="Vertical viscosity (m^2/s)")
    mu_T: float = Field(1.0e-2, gt=0, description="Horizontal heat diffusivity (m^2/s)")
    nu_T: float = Field(1.0e-2, gt=0, description="Vertical heat diffusivity (m^2/s)")
    mu_S: float = Field(1.0e-2, gt=0, description="Horizontal salt diffusivity (m^2/s)")
    nu_S: float = Field(1.0e-2, gt=0, description="Vertical salt diffusivity (m^2/s)")
    alpha_T: float = Field(0.0, ge=0, description="Robin surface coefficient (m/s)")


@dataclasses.dataclass(frozen=True)
class State:
    """Prognostic fields U* = (v*, T, S) and the simulation clock."""

    grid: Grid
    v_star: HVecField
    T: ScalarField
    S: ScalarField
    t: float = 0.0
    step_index: int = 0

    def __post_init__(self) -> None:
        check_field(self.grid, self.v_star, (2,))
        check_field(self.grid, self.T)
        check_field(self.grid, self.S)

    @classmethod
    def zeros(cls, grid: Grid) -> "State":
        return cls(grid, grid.zeros((2,)), grid.zeros(), grid.zeros())

    def replace(self, **changes: object) -> "State":
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    def to_vector(self) -> Array:
        return np.concatenate([self.v_star.ravel(), self.T.ravel(), self.S.ravel()])

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.v_star).all()
            and np.isfinite(self.T).all()
            and np.isfinite(self.S).all()
        )


def _same_grid(a: State, b: State) -> Grid:
    if a.grid != b.grid:
        raise FieldShapeError("states live on different grids")
    return a.grid


# Spectral horizontal calculus


def hfft(q: Array) -> npt.NDArray[np.complex128]:
    return sfft.fft2(q, axes=_HAXES, workers=fft_workers())


def ihfft(qh: npt.NDArray[np.complex128]) -> Array:
    return np.ascontiguousarray(sfft.ifft2(qh, axes=_HAXES, workers=fft_workers()).real)


def ddx(grid: Grid, q: Array) -> Array:
    return ihfft(1j * grid.kx_deriv * hfft(q))


def ddy(grid: Grid, q: Array) -> Array:
    return ihfft(1j * grid.ky_deriv * hfft(q))


def horizontal_gradient(grid: Grid, q: ScalarField) -> HVecField:
    qh = hfft(q)
    return np.stack([ihfft(1j * grid.kx_deriv * qh), ihfft(1j * grid.ky_deriv * qh)])


def horizontal_divergence(grid: Grid, v: HVecField) -> ScalarField:
    vh = hfft(v)
    return ihfft(1j * grid.kx_deriv * vh[0] + 1j * grid.ky_deriv * vh[1])


def horizontal_laplacian(grid: Grid, q: Array) -> Array:
    return ihfft(-grid.k2_deriv * hfft(q))


# Vertical finite differences


def ddz(grid: Grid, q: Array, bottom: VerticalClosure = "neumann") -> Array:
    """Centered d/dz with a mirror ghost on top and ``bottom`` ghost below."""
    ghost_bottom = q[..., :1] if bottom == "neumann" else -q[..., :1]
    padded = np.concatenate([ghost_bottom, q, q[..., -1:]], axis=-1)
    return (padded[..., 2:] - padded[..., :-2]) / (2.0 * grid.dz)


def ddz_flux_divergence(grid: Grid, flux: Array) -> Array:
    """Negative adjoint of the Neumann ``ddz``."""
    c = 1.0 / (2.0 * grid.dz)
    zero = np.zeros_like(flux[..., :1])
    padded = np.concatenate([zero, flux, zero], axis=-1)
    out = (padded[..., 2:] - padded[..., :-2]) * c
    out[..., 0] += c * flux[..., 0]
    out[..., -1] -= c * flux[..., -1]
    return out


def gradient3(grid: Grid, q: ScalarField) -> Vec3Field:
    gh = horizontal_gradient(grid, q)
    return np.concatenate([gh, ddz(grid, q)[None]], axis=0)


def divergence3(grid: Grid, flux: Vec3Field) -> ScalarField:
    return horizontal_divergence(grid, flux[:2]) + ddz_flux_divergence(grid, flux[2])


def face_differences(grid: Grid, q: Array) -> Array:
    """(q[k+1] - q[k]) / dz on the nz-1 interior faces."""
    return np.diff(q, axis=-1) / grid.dz


# Integrals and inner products


def integrate(grid: Grid, q: Array) -> float:
    return float(np.sum(q) * grid.cell_volume)


def field_inner(grid: Grid, a: Array, b: Array) -> float:
    return float(np.sum(a * b) * grid.cell_volume)


def field_norm(grid: Grid, a: Array) -> float:
    return float(np.sqrt(max(field_inner(grid, a, a), 0.0)))


def surface_inner(grid: Grid, a: ScalarField, b: ScalarField) -> float:
    """L2 product over the top face Γ_u."""
    return float(np.sum(a[..., -1] * b[..., -1]) * grid.cell_area)


def gradient_inner(grid: Grid, a: Array, b: Array) -> float:
    """(∇a, ∇b) with spectral horizontal and interior-face vertical stencils.

    Vector arguments are handled component by component.
    """
    horizontal = (
        field_inner(grid, ddx(grid, a), ddx(grid, b))
        + field_inner(grid, ddy(grid, a), ddy(grid, b))
    )
    vertical = float(
        np.sum(face_differences(grid, a) * face_differences(grid, b)) * grid.cell_volume
    )
    return horizontal + vertical


def inner_H(U: State, V: State) -> float:
    """(U, V)_H: cell-volume weighted sum over v, T and S."""
    grid = _same_grid(U, V)
    return (
        field_inner(grid, U.v_star, V.v_star)
        + field_inner(grid, U.T, V.T)
        + field_inner(grid, U.S, V.S)
    )


def norm_H(U: State) -> float:
    return float(np.sqrt(max(inner_H(U, U), 0.0)))


def inner_V(U: State, V: State, params: PhysParams) -> float:
    """(U, V)_V including the Robin surface term on temperature."""
    grid = _same_grid(U, V)
    value = (
        gradient_inner(grid, U.v_star, V.v_star)
        + gradient_inner(grid, U.T, V.T)
        + gradient_inner(grid, U.S, V.S)
    )
    return value + params.alpha_T / params.nu_T * surface_inner(grid, U.T, V.T)


def norm_V(U: State, params: PhysParams) -> float:
    return float(np.sqrt(max(inner_V(U, U, params), 0.0)))
