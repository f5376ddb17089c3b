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

"""Ensembles and the vanishing-noise convergence experiment."""

import dataclasses
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import TypeVar

import numpy as np

from lupe import config as env
from lupe.errors import LupeError
from lupe.fields import Array, State
from lupe.noise import NoiseModel
from lupe.runconfig import SimConfig
from lupe.stepper import RunResult, build_noise_model, run

logger = logging.getLogger(__name__)

_R = TypeVar("_R")


@dataclasses.dataclass
class MemberResult:
    member: int
    result: RunResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def _map_members(
    function: Callable[[int], _R], members: Sequence[int], threads: int | None
) -> list[_R]:
    workers = threads or env.NUM_THREADS
    if workers <= 1 or len(members) <= 1:
        return [function(member) for member in members]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, members))


def run_ensemble(
    config: SimConfig, n_members: int, threads: int | None = None
) -> list[MemberResult]:
    """Runs members 0..n-1 with independent streams; failures are captured."""
    model = build_noise_model(config)

    def one(member: int) -> MemberResult:
        try:
            return MemberResult(member, run(config, member=member, model=model))
        except LupeError as e:
            logger.warning(f"Ensemble member {member} failed: {e}")
            return MemberResult(member, None, str(e))

    return _map_members(one, range(n_members), threads)


@dataclasses.dataclass(frozen=True)
class ConvergenceRow:
    upsilon: float
    rms_deviation: float
    n_members: int
    n_failed: int


@dataclasses.dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    exponent: float | None

    def deviations(self) -> list[float]:
        return [row.rms_deviation for row in self.rows]


def _state_arrays(state: State) -> tuple[Array, Array, Array]:
    return state.v_star.copy(), state.T.copy(), state.S.copy()


def _deviation(state: State, reference: tuple[Array, Array, Array]) -> float:
    v, T, S = reference
    total = (
        np.sum((state.v_star - v) ** 2)
        + np.sum((state.T - T) ** 2)
        + np.sum((state.S - S) ** 2)
    )
    return float(math.sqrt(total * state.grid.cell_volume))


def fit_exponent(upsilons: Sequence[float], deviations: Sequence[float]) -> float | None:
    """Slope of log(deviation) against log(Υ) over the positive entries."""
    pairs = [
        (math.log(u), math.log(d))
        for u, d in zip(upsilons, deviations, strict=True)
        if u > 0.0 and d > 0.0 and math.isfinite(d)
    ]
    if len(pairs) < 2:
        return None
    x, y = zip(*pairs, strict=True)
    slope, _ = np.polyfit(np.array(x), np.array(y), 1)
    return float(slope)


def _sup_deviation(
    config: SimConfig,
    model: NoiseModel,
    reference: Sequence[tuple[Array, Array, Array]],
    member: int,
) -> float | None:
    sup = 0.0

    def track(state: State) -> None:
        nonlocal sup
        sup = max(sup, _deviation(state, reference[state.step_index]))

    try:
        run(config, member=member, model=model, on_step=track)
    except LupeError as e:
        logger.warning(f"Υ={model.upsilon:g} member {member} excluded: {e}")
        return None
    return sup


def noise_convergence_experiment(
    config: SimConfig,
    upsilons: Sequence[float],
    n_ensemble: int,
    threads: int | None = None,
) -> ConvergenceTable:
    """RMS over members of sup_t ‖U^Υ - U^0‖_H for each Υ.

    All levels reuse the streams of members 0..n-1, so the same Brownian
    paths drive every Υ.
    """
    reference: list[tuple[Array, Array, Array]] = []
    run(config.with_upsilon(0.0), on_step=lambda s: reference.append(_state_arrays(s)))
    logger.info(f"Reference trajectory: {len(reference) - 1} steps")

    rows = []
    for upsilon in upsilons:
        level = config.with_upsilon(float(upsilon))
        model = build_noise_model(level)

        sups = _map_members(
            partial(_sup_deviation, level, model, reference), range(n_ensemble), threads
        )
        kept = [s for s in sups if s is not None]
        rms = float(math.sqrt(np.mean(np.square(kept)))) if kept else math.nan
        rows.append(ConvergenceRow(float(upsilon), rms, len(kept), len(sups) - len(kept)))
        logger.info(f"Υ={upsilon:g}: rms sup deviation {rms:.4e} over {len(kept)} members")

    exponent = fit_exponent([r.upsilon for r in rows], [r.rms_deviation for r in rows])
    return ConvergenceTable(tuple(rows), exponent)
