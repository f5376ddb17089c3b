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

"""Tests for grid geometry, inner products and the shared discrete calculus"""

import math

import numpy as np
import pytest

from lupe.errors import FieldShapeError, GridError
from lupe.fields import (
    PhysParams,
    State,
    ddx,
    ddz,
    ddz_flux_divergence,
    divergence3,
    field_inner,
    gradient3,
    inner_H,
    inner_V,
    make_grid,
)


class TestMakeGrid:
    """Grid construction and validation"""

    def test_spacings(self):
        grid = make_grid(8, 8, 4, 2 * math.pi, 2 * math.pi, 1.0)
        assert grid.dx == pytest.approx(math.pi / 4)
        assert grid.dy == pytest.approx(math.pi / 4)
        assert grid.dz == 0.25

    def test_faces_and_centers(self):
        grid = make_grid(8, 8, 4, 2 * math.pi, 2 * math.pi, 1.0)
        np.testing.assert_allclose(grid.z_faces, [-1.0, -0.75, -0.5, -0.25, 0.0])
        assert grid.z_faces[0] == -1.0
        assert grid.z_faces[-1] == 0.0
        assert np.all(np.diff(grid.z_faces) > 0)
        np.testing.assert_allclose(grid.z_centers, [-0.875, -0.625, -0.375, -0.125])

    def test_rejects_non_power_of_two(self):
        with pytest.raises(GridError, match="power of two"):
            make_grid(6, 8, 4, 1.0, 1.0, 1.0)

    @pytest.mark.parametrize("extent", [0.0, -1.0, float("nan")])
    def test_rejects_bad_extent(self, extent):
        with pytest.raises(GridError):
            make_grid(8, 8, 4, extent, 1.0, 1.0)

    def test_grid_error_is_value_error(self):
        with pytest.raises(ValueError):
            make_grid(8, 8, 0, 1.0, 1.0, 1.0)


class TestInnerH:
    """Discrete L2 product over (v, T, S)"""

    def test_zero_state(self, small_grid):
        zero = State.zeros(small_grid)
        assert inner_H(zero, zero) == 0.0

    def test_unit_volume_constant(self):
        grid = make_grid(4, 4, 2, 1.0, 1.0, 1.0)
        state = State.zeros(grid).replace(T=np.ones(grid.shape))
        assert inner_H(state, state) == pytest.approx(1.0, rel=1e-14)

    def test_matches_riemann_sum(self, random_state):
        grid = make_grid(4, 4, 2, 1.5, 2.5, 0.75)
        u, w = random_state(grid), random_state(grid)
        expected = 0.0
        for i in range(grid.nx):
            for j in range(grid.ny):
                for k in range(grid.nz):
                    point = (
                        u.v_star[0, i, j, k] * w.v_star[0, i, j, k]
                        + u.v_star[1, i, j, k] * w.v_star[1, i, j, k]
                        + u.T[i, j, k] * w.T[i, j, k]
                        + u.S[i, j, k] * w.S[i, j, k]
                    )
                    expected += point * grid.dx * grid.dy * grid.dz
        assert inner_H(u, w) == pytest.approx(expected, rel=1e-12)

    def test_symmetric_positive(self, random_state):
        grid = make_grid(8, 8, 4, 1.0, 1.0, 1.0)
        for _ in range(100):
            u, w = random_state(grid), random_state(grid)
            assert abs(inner_H(u, w) - inner_H(w, u)) <= 1e-12 * abs(inner_H(u, w)) + 1e-14
            assert inner_H(u, u) > 0.0

    def test_grid_mismatch(self, small_grid, grid):
        with pytest.raises(FieldShapeError):
            inner_H(State.zeros(small_grid), State.zeros(grid))


class TestInnerV:
    """Gradient product with the Robin surface term"""

    def test_constant_temperature_keeps_surface_term(self, small_grid):
        params = PhysParams(alpha_T=0.5, nu_T=0.01)
        c = 3.0
        state = State.zeros(small_grid).replace(T=np.full(small_grid.shape, c))
        expected = params.alpha_T / params.nu_T * c**2 * small_grid.Lx * small_grid.Ly
        assert inner_V(state, state, params) == pytest.approx(expected, rel=1e-12)

    def test_sine_velocity(self, grid):
        x, _, _ = grid.mesh()
        v = np.stack([np.sin(x), np.zeros(grid.shape)])
        state = State.zeros(grid).replace(v_star=v)
        assert inner_V(state, state, PhysParams()) == pytest.approx(2 * math.pi**2, rel=1e-12)

    def test_zero_state(self, small_grid):
        zero = State.zeros(small_grid)
        assert inner_V(zero, zero, PhysParams(alpha_T=1.0)) == 0.0

    def test_symmetric_positive(self, random_state):
        grid = make_grid(8, 8, 4, 1.0, 1.0, 1.0)
        params = PhysParams(alpha_T=0.2)
        for _ in range(100):
            u, w = random_state(grid), random_state(grid)
            uw, wu = inner_V(u, w, params), inner_V(w, u, params)
            assert abs(uw - wu) <= 1e-12 * (inner_V(u, u, params) + inner_V(w, w, params))
            assert inner_V(u, u, params) >= 0.0


class TestCalculus:
    """Spectral and vertical stencils"""

    def test_ddx_of_sine(self, grid):
        x, _, _ = grid.mesh()
        np.testing.assert_allclose(ddx(grid, np.sin(3 * x)), 3 * np.cos(3 * x), atol=1e-12)

    def test_ddz_exact_on_linear_interior(self, grid):
        _, _, z = grid.mesh()
        dq = ddz(grid, 2.0 * z)
        np.testing.assert_allclose(dq[..., 1:-1], 2.0, rtol=1e-12)

    def test_divergence_is_negative_adjoint_of_gradient(self, grid, rng):
        q = rng.standard_normal(grid.shape)
        flux = rng.standard_normal((3, *grid.shape))
        lhs = field_inner(grid, divergence3(grid, flux), q)
        rhs = -field_inner(grid, flux, gradient3(grid, q))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_vertical_adjoint(self, grid, rng):
        q = rng.standard_normal(grid.shape)
        f = rng.standard_normal(grid.shape)
        lhs = np.sum(ddz_flux_divergence(grid, f) * q)
        rhs = -np.sum(f * ddz(grid, q))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-10)
