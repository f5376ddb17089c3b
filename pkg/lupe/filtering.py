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

"""Regularizing kernel K and the filtered variance operator a^K.

Filtering is a real even spectral multiplier: periodic Fourier modes in the
horizontal and an even (cosine) extension in z via an orthonormal DCT-II.
The composite operator is therefore symmetric for the cell-volume inner
product, so C_K C_K* is simply the filter applied twice.
"""

import dataclasses
import functools
import logging
from typing import Literal

import numpy as np
from scipy import fft as sfft

from lupe.config import fft_workers
from lupe.fields import Array, Grid, Vec3Field, hfft, ihfft
from lupe.noise import NoiseModel

logger = logging.getLogger(__name__)

KernelKind = Literal["identity", "gaussian", "sharp-cutoff"]


@dataclasses.dataclass(frozen=True)
class FilterKernel:
    kind: KernelKind = "gaussian"
    length_scale: float = 0.0
    cutoff: float = 0.0
    horizontal_only: bool = False

    def __post_init__(self) -> None:
        if self.kind == "gaussian" and not self.length_scale >= 0.0:
            raise ValueError(f"gaussian length_scale must be >= 0, got {self.length_scale}")
        if self.kind == "sharp-cutoff" and not self.cutoff > 0.0:
            raise ValueError(f"sharp-cutoff needs a positive cutoff wavenumber, got {self.cutoff}")

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" or (self.kind == "gaussian" and self.length_scale == 0.0)


IDENTITY = FilterKernel("identity")


def vertical_wavenumbers(grid: Grid) -> Array:
    """π m / h for DCT index m, shaped for broadcasting along z."""
    return (np.pi * np.arange(grid.nz) / grid.h)[None, None, :]


@functools.lru_cache(maxsize=32)
def multiplier(kernel: FilterKernel, grid: Grid) -> Array:
    """m̂(k) in [0, 1] with m̂(0) = 1."""
    k2 = grid.kx**2 + grid.ky**2
    if not kernel.horizontal_only:
        k2 = k2 + vertical_wavenumbers(grid) ** 2
    if kernel.kind == "gaussian":
        m_hat = np.exp(-0.5 * kernel.length_scale**2 * k2)
    elif kernel.kind == "sharp-cutoff":
        m_hat = (k2 <= kernel.cutoff**2).astype(np.float64)
    else:
        m_hat = np.ones_like(k2)
    m_hat.setflags(write=False)
    return m_hat


def apply_filter(kernel: FilterKernel, grid: Grid, f: Array) -> Array:
    """K * f for a scalar or vector field."""
    if kernel.is_identity:
        return f.copy()
    m_hat = multiplier(kernel, grid)
    if kernel.horizontal_only:
        return ihfft(m_hat * hfft(f))
    coeffs = sfft.dct(f, type=2, norm="ortho", axis=-1, workers=fft_workers())
    filtered = ihfft(m_hat * hfft(coeffs))
    return sfft.idct(filtered, type=2, norm="ortho", axis=-1, workers=fft_workers())


def filtered_variance_apply(
    model: NoiseModel, kernel: FilterKernel, g: Vec3Field
) -> Vec3Field:
    """a^K g = Υ Σ_k φ_k K*(K*(φ_k · g))."""
    grid = model.grid
    out = grid.zeros((3,))
    if model.n_modes == 0 or model.upsilon == 0.0:
        return out
    for phi in model.modes:
        projected = np.sum(phi * g, axis=0)
        smoothed = apply_filter(kernel, grid, apply_filter(kernel, grid, projected))
        out += phi * smoothed
    return model.upsilon * out
