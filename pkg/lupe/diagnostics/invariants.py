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

"""Structural invariant suite behind ``lupe check``.

Assertions must hold for the configuration to pass; detections only report
what they found (for instance baroclinic noise shear) and never fail.
"""

import dataclasses
import logging
from typing import Literal

import numpy as np

from lupe.diagnostics.balance import fd_balance
from lupe.diagnostics.regime import stochastic_shear
from lupe.fields import Grid, field_inner, field_norm, horizontal_gradient
from lupe.filtering import FilterKernel, apply_filter
from lupe.noise import NoiseModel, make_generator, mode_divergence, sample_increment
from lupe.operators import bottom_residual, vertical_velocity_faces
from lupe.projectors import baroclinic, barotropic, barotropic_divergence, project
from lupe.runconfig import SimConfig
from lupe.stepper import StepContext, build_noise_model, prepare_initial_state, step_with_increment

logger = logging.getLogger(__name__)

DEFAULT_CHECK_STEPS = 10


@dataclasses.dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    kind: Literal["assert", "detect"] = "assert"

    @property
    def status(self) -> str:
        if self.kind == "detect":
            return "detected" if self.passed else "absent"
        return "pass" if self.passed else "FAIL"


def _bound(name: str, value: float, tolerance: float) -> CheckResult:
    return CheckResult(name, float(value), tolerance, bool(value <= tolerance))


def _relative(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0.0 else numerator


def _mode_checks(model: NoiseModel) -> list[CheckResult]:
    grid = model.grid
    scale = max(1.0, float(np.max(np.abs(model.modes_h), initial=0.0)) / min(grid.dx, grid.dy, grid.dz))
    divergence = max(
        (float(np.max(np.abs(mode_divergence(grid, h, w)))) for h, w in zip(model.modes_h, model.modes_w_faces, strict=True)),
        default=0.0,
    )
    boundary = float(np.max(np.abs(model.modes_w_faces[..., [0, -1]]), initial=0.0))
    drift_divergence = float(
        np.max(np.abs(mode_divergence(grid, model.v_s, model.w_s_faces)))
    )
    a = np.moveaxis(model.a, (0, 1), (-2, -1))
    asymmetry = float(np.max(np.abs(a - np.swapaxes(a, -1, -2))))
    a_scale = max(float(np.max(np.abs(a))), 1e-300)
    min_eigenvalue = float(np.min(np.linalg.eigvalsh(a))) / a_scale
    checks = [
        _bound("mode divergence", divergence, 1e-10 * scale),
        _bound("mode w on rigid lids", boundary, 0.0),
        _bound("Itô-Stokes divergence after projection", drift_divergence, 1e-10 * scale),
        _bound("variance tensor asymmetry", asymmetry, 1e-14 * a_scale),
        CheckResult("variance tensor min eigenvalue", min_eigenvalue, -1e-12, min_eigenvalue >= -1e-12),
    ]
    if model.bhn:
        spread = float(np.max(np.abs(model.modes_h - model.modes_h[..., :1]), initial=0.0))
        checks.append(_bound("BHN layer spread of modes", spread, 0.0))
    return checks


def _projector_checks(grid: Grid, rng: np.random.Generator) -> list[CheckResult]:
    v = rng.standard_normal((2, *grid.shape))
    norm2 = field_inner(grid, v, v)
    mean = barotropic(v)
    projected = project(grid, v)
    surface = rng.standard_normal((grid.nx, grid.ny, 1)) * np.ones(grid.shape)
    surface_gradient = project(grid, horizontal_gradient(grid, surface))
    w_faces = vertical_velocity_faces(grid, projected)
    return [
        _bound("barotropic idempotence", float(np.max(np.abs(barotropic(mean) - mean))), 1e-14),
        _bound("baroclinic annihilates barotropic", float(np.max(np.abs(baroclinic(mean)))), 1e-14),
        _bound(
            "barotropic/baroclinic orthogonality",
            abs(field_inner(grid, mean, baroclinic(v))) / norm2,
            1e-12,
        ),
        _bound(
            "P^v idempotence",
            _relative(field_norm(grid, project(grid, projected) - projected), field_norm(grid, v)),
            1e-12,
        ),
        _bound(
            "P^v annihilates surface pressure gradients",
            float(np.max(np.abs(surface_gradient))),
            1e-11 * max(1.0, float(np.max(np.abs(horizontal_gradient(grid, surface))))),
        ),
        _bound("w at the surface", float(np.max(np.abs(w_faces[..., -1]))), 0.0),
        _bound("w at the bottom after projection", bottom_residual(grid, projected), 1e-10),
    ]


def _balance_checks(model: NoiseModel, kernel: FilterKernel, rng: np.random.Generator) -> list[CheckResult]:
    if not model.is_active:
        return []
    grid = model.grid
    q = apply_filter(FilterKernel("gaussian", length_scale=2.0 * grid.dx), grid, rng.standard_normal(grid.shape))
    f = rng.standard_normal(grid.shape)
    g = rng.standard_normal(grid.shape)
    adjoint_gap = abs(
        field_inner(grid, apply_filter(kernel, grid, f), g)
        - field_inner(grid, f, apply_filter(kernel, grid, g))
    )
    return [
        _bound("fluctuation-dissipation (unfiltered)", abs(fd_balance(grid, q, model)), 1e-8),
        _bound("fluctuation-dissipation (filtered)", abs(fd_balance(grid, q, model, kernel)), 1e-8),
        _bound(
            "filter self-adjointness",
            adjoint_gap / (field_norm(grid, f) * field_norm(grid, g)),
            1e-12,
        ),
    ]


def _trajectory_checks(config: SimConfig, model: NoiseModel, n_steps: int) -> list[CheckResult]:
    ctx = StepContext.from_config(config, model)
    state = prepare_initial_state(config)
    worst_divergence = 0.0
    worst_spread = 0.0
    for _ in range(n_steps):
        increment = None
        if model.is_active:
            increment = sample_increment(
                model, ctx.dt, make_generator(model.rng_seed, state.step_index)
            )
            if model.bhn:
                sigma_h = increment.sigma_dw[:2]
                worst_spread = max(
                    worst_spread, float(np.max(np.abs(sigma_h - sigma_h[..., :1])))
                )
        state = step_with_increment(state, ctx, increment)
        worst_divergence = max(worst_divergence, barotropic_divergence(ctx.grid, state.v_star))
    checks = [_bound("post-step barotropic divergence", worst_divergence, config.time.tol_div)]
    if model.bhn and model.is_active:
        checks.append(_bound("BHN layer spread of noise forcing", worst_spread, 0.0))
    return checks


def run_invariant_suite(
    config: SimConfig, n_steps: int | None = None, seed: int = 0
) -> list[CheckResult]:
    """Evaluates every structural invariant on the configured model."""
    grid = config.to_grid()
    model = build_noise_model(config)
    kernel = config.closure.to_kernel()
    rng = np.random.default_rng(seed)
    steps = min(config.time.n_steps, DEFAULT_CHECK_STEPS) if n_steps is None else n_steps

    results = _mode_checks(model)
    results += _projector_checks(grid, rng)
    results += _balance_checks(model, kernel, rng)
    results += _trajectory_checks(config, model, steps)
    shear = stochastic_shear(model)
    results.append(
        CheckResult("baroclinic noise shear Υ(∂zφ^H)²", shear, 0.0, shear > 0.0, kind="detect")
    )
    failed = [r.name for r in results if r.kind == "assert" and not r.passed]
    if failed:
        logger.warning(f"Invariant suite failures: {', '.join(failed)}")
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results if r.kind == "assert")
