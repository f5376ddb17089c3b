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

"""Simulator for the location-uncertainty stochastic primitive equations."""

from lupe.errors import LupeError
from lupe.fields import Grid, PhysParams, State, inner_H, inner_V, make_grid
from lupe.noise import ModeSpec, NoiseModel, build_modes, sample_increment
from lupe.runconfig import SimConfig, parse_config
from lupe.stepper import RunResult, run, step

__all__ = [
    "Grid",
    "LupeError",
    "ModeSpec",
    "NoiseModel",
    "PhysParams",
    "RunResult",
    "SimConfig",
    "State",
    "build_modes",
    "inner_H",
    "inner_V",
    "make_grid",
    "parse_config",
    "run",
    "sample_increment",
    "step",
]
