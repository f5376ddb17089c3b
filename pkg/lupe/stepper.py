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

"""Euler-Maruyama integration of the LU primitive equations.

One step advances U* = (v*, T, S) by

    U*_{n+1} = U*_n + dt [-A U* - B(U*, U*) - Γ U* + hydro - weak - F_σ]
               + G_σ ΔW + martingale,

solves the vertical diffusion implicitly per column (unless configured
explicit) and re-applies the Leray projector. ``hydro`` is the buoyancy forcing
-g ∇_H ∫_z^0 (β_T T + β_S S) dz' carrying its physical sign, so it is added;
the weak correction keeps the sign of the closed system. With no active
noise the stochastic branches are skipped entirely, so every closure reduces to the
deterministic primitive equations bit for bit.
"""

import dataclasses
import logging
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from lupe.diagnostics.records import DiagnosticsRecord, estimate_quantities
from lupe.errors import BlowUpError, CFLViolationError, DivergenceConstraintError
from lupe.fields import Grid, HVecField, PhysParams, ScalarField, State, horizontal_laplacian
from lupe.filtering import FilterKernel
from lupe.noise import (
    NoiseIncrement,
    NoiseModel,
    build_modes,
    empty_model,
    make_generator,
    sample_increment,
)
from lupe.operators import (
    DiffusionParams,
    advect,
    coriolis,
    diffuse,
    salinity_diffusion,
    solve_vertical_diffusion,
    stochastic_diffusion,
    temperature_diffusion,
    transport,
    velocity_diffusion,
    vertical_velocity,
)
from lupe.presets import initial_state
from lupe.pressure import (
    hydrostatic_gradient,
    martingale_pressure_forcing,
    weak_pressure_gradient,
)
from lupe.projectors import barotropic_divergence, project, project_state
from lupe.runconfig import SimConfig

logger = logging.getLogger(__name__)


class Tendency(NamedTuple):
    """Increment of (v*, T, S)."""

    v_star: HVecField
    T: ScalarField
    S: ScalarField


def _zero_tendency(grid: Grid) -> Tendency:
    return Tendency(grid.zeros((2,)), grid.zeros(), grid.zeros())


def tracer_tendency(
    grid: Grid,
    q: ScalarField,
    v_star: HVecField,
    model: NoiseModel,
    diffusion: DiffusionParams,
    implicit_vertical: bool = True,
) -> ScalarField:
    """Drift of a tracer: -A q - B(v*, q) + ½∇·(a∇q)."""
    if implicit_vertical:
        dissipation = -diffusion.mu * horizontal_laplacian(grid, q)
    else:
        dissipation = diffuse(grid, diffusion, q)
    drift = -dissipation - advect(grid, v_star, q)
    if model.is_active:
        drift = drift + stochastic_diffusion(grid, model.a, q)
    return drift


def tracer_noise(grid: Grid, q: ScalarField, increment: NoiseIncrement) -> ScalarField:
    """-(σΔW·∇)q."""
    return -transport(grid, increment.sigma_dw, q)


def f_sigma(grid: Grid, state: State, model: NoiseModel, params: PhysParams) -> Tendency:
    """F_σ(U*) for time-independent modes (d_t U_S = 0)."""
    if not model.is_active:
        return _zero_tendency(grid)
    v, v_s, a = state.v_star, model.v_s, model.a
    momentum = (
        advect(grid, v, v_s, bottom="dirichlet")
        - stochastic_diffusion(grid, a, v_s)
        + diffuse(grid, velocity_diffusion(params), v_s)
        + coriolis(v_s, params.f)
        - stochastic_diffusion(grid, a, v)
    )
    return Tendency(
        project(grid, momentum),
        -stochastic_diffusion(grid, a, state.T),
        -stochastic_diffusion(grid, a, state.S),
    )


def g_sigma(
    grid: Grid,
    state: State,
    model: NoiseModel,
    increment: NoiseIncrement,
    params: PhysParams,
) -> Tendency:
    """G_σ(U*) ΔW."""
    if not model.is_active:
        return _zero_tendency(grid)
    sigma_dw = increment.sigma_dw
    sigma_h = sigma_dw[:2]
    momentum = (
        -transport(grid, sigma_dw, state.v_star)
        - transport(grid, sigma_dw, model.v_s)
        - diffuse(grid, velocity_diffusion(params), sigma_h)
        - coriolis(sigma_h, params.f)
    )
    return Tendency(
        project(grid, momentum),
        tracer_noise(grid, state.T, increment),
        tracer_noise(grid, state.S, increment),
    )


def courant_number(grid: Grid, v_star: HVecField, dt: float) -> float:
    w = vertical_velocity(grid, v_star)
    local = (
        np.abs(v_star[0]) / grid.dx + np.abs(v_star[1]) / grid.dy + np.abs(w) / grid.dz
    )
    return float(np.max(local) * dt)


@dataclasses.dataclass(frozen=True)
class StepContext:
    """Everything a step needs besides the state, built once per run."""

    grid: Grid
    params: PhysParams
    model: NoiseModel
    kernel: FilterKernel
    closure: str
    dt: float
    implicit_vertical: bool
    tol_div: float

    @classmethod
    def from_config(cls, config: SimConfig, model: NoiseModel) -> "StepContext":
        return cls(
            grid=config.to_grid(),
            params=config.physics,
            model=model,
            kernel=config.closure.to_kernel(),
            closure=config.closure.variant,
            dt=config.time.dt,
            implicit_vertical=config.time.vertical_diffusion == "implicit",
            tol_div=config.time.tol_div,
        )


def build_noise_model(config: SimConfig) -> NoiseModel:
    grid = config.to_grid()
    if config.closure.variant == "deterministic":
        return empty_model(grid, config.seed.value)
    return build_modes(
        config.noise.modes,
        grid,
        upsilon=config.noise.upsilon,
        bhn=config.noise.bhn,
        rng_seed=config.seed.value,
    )


def step_with_increment(
    state: State, ctx: StepContext, increment: NoiseIncrement | None
) -> State:
    """One Euler-Maruyama step for a given (possibly absent) noise increment."""
    grid, params, model, dt = ctx.grid, ctx.params, ctx.model, ctx.dt
    courant = courant_number(grid, state.v_star, dt)
    if courant > 1.0:
        logger.error(f"CFL violated at step {state.step_index}: Courant number {courant:.3f}")
        raise CFLViolationError(
            f"advective Courant number {courant:.3f} > 1 at step {state.step_index}"
        )

    v = state.v_star
    v_diffusion = velocity_diffusion(params)
    t_diffusion = temperature_diffusion(params)
    s_diffusion = salinity_diffusion(params)
    implicit = ctx.implicit_vertical

    if implicit:
        v_dissipation = -v_diffusion.mu * horizontal_laplacian(grid, v)
    else:
        v_dissipation = diffuse(grid, v_diffusion, v)
    dv = (
        -v_dissipation
        - advect(grid, v, v, bottom="dirichlet")
        - coriolis(v, params.f)
        + hydrostatic_gradient(grid, state.T, state.S, params)
    )
    dT = tracer_tendency(grid, state.T, v, model, t_diffusion, implicit)
    dS = tracer_tendency(grid, state.S, v, model, s_diffusion, implicit)

    v_new = v + dt * dv
    T_new = state.T + dt * dT
    S_new = state.S + dt * dS

    if model.is_active:
        if increment is None:
            raise ValueError("an active noise model needs an increment for every step")
        # tracer parts of F_σ are already in tracer_tendency
        correction = f_sigma(grid, state, model, params)
        noise = g_sigma(grid, state, model, increment, params)
        v_new = v_new - dt * correction.v_star + noise.v_star
        T_new = T_new + noise.T
        S_new = S_new + noise.S
        if ctx.closure == "weak-filtered":
            v_new = (
                v_new
                - dt * weak_pressure_gradient(grid, v, model, ctx.kernel)
                + martingale_pressure_forcing(grid, v, model, ctx.kernel, increment, params)
            )

    v_new = project(grid, v_new)
    if implicit:
        v_new = project(grid, solve_vertical_diffusion(grid, v_diffusion, v_new, dt))
        T_new = solve_vertical_diffusion(grid, t_diffusion, T_new, dt)
        S_new = solve_vertical_diffusion(grid, s_diffusion, S_new, dt)

    index = state.step_index + 1
    new_state = State(grid, v_new, T_new, S_new, t=index * dt, step_index=index)
    if not new_state.is_finite():
        logger.error(f"Non-finite state after step {index}")
        raise BlowUpError(index)
    divergence = barotropic_divergence(grid, v_new)
    if divergence > ctx.tol_div:
        logger.error(f"Barotropic divergence {divergence:.3e} exceeds {ctx.tol_div:.1e}")
        raise DivergenceConstraintError(
            f"barotropic divergence {divergence:.3e} > {ctx.tol_div:.1e} at step {index}"
        )
    return new_state


def step(
    state: State, config: SimConfig, model: NoiseModel, rng: np.random.Generator
) -> State:
    """Advances the state by one dt using increments drawn from ``rng``."""
    ctx = StepContext.from_config(config, model)
    increment = sample_increment(model, ctx.dt, rng) if model.is_active else None
    return step_with_increment(state, ctx, increment)


@dataclasses.dataclass
class RunResult:
    final_state: State
    diagnostics: list[DiagnosticsRecord]
    snapshots: list[State]


OutputCallback = Callable[[State, DiagnosticsRecord], None]
StepCallback = Callable[[State], None]


def prepare_initial_state(config: SimConfig) -> State:
    grid = config.to_grid()
    state = initial_state(grid, config.init.preset, config.init.params, config.physics)
    return project_state(grid, state)


def run(
    config: SimConfig,
    *,
    member: int = 0,
    model: NoiseModel | None = None,
    keep_snapshots: bool = False,
    on_output: OutputCallback | None = None,
    on_step: StepCallback | None = None,
) -> RunResult:
    """Integrates from the configured preset to t_end.

    Diagnostics are emitted at step 0, every ``output_every`` steps and at
    the final step. Member ``i`` draws from the stream seeded with seed + i.
    """
    model = model if model is not None else build_noise_model(config)
    ctx = StepContext.from_config(config, model)
    state = prepare_initial_state(config)
    n_steps = config.time.n_steps
    every = config.time.output_every

    diagnostics: list[DiagnosticsRecord] = []
    snapshots: list[State] = []

    def emit(current: State) -> None:
        record = estimate_quantities(current, ctx.params, model, ctx.kernel)
        diagnostics.append(record)
        if keep_snapshots:
            snapshots.append(current)
        if on_output is not None:
            on_output(current, record)
        logger.debug(
            f"step {current.step_index} t={current.t:.4g} |U|_H={record.norm_h:.6g}"
        )

    emit(state)
    if on_step is not None:
        on_step(state)
    for _ in range(n_steps):
        increment = None
        if model.is_active:
            rng = make_generator(model.rng_seed, state.step_index, member)
            increment = sample_increment(model, ctx.dt, rng)
        try:
            state = step_with_increment(state, ctx, increment)
        except BlowUpError:
            logger.error(f"Member {member} blew up at step {state.step_index + 1}")
            raise
        if on_step is not None:
            on_step(state)
        if state.step_index % every == 0 or state.step_index == n_steps:
            emit(state)
    logger.info(f"Run finished: member={member}, steps={n_steps}, t={state.t:.4g}")
    return RunResult(final_state=state, diagnostics=diagnostics, snapshots=snapshots)

