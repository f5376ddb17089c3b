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

"""Exception hierarchy shared by every lupe module."""


class LupeError(Exception):
    """Base class for simulator failures."""


class GridError(LupeError, ValueError):
    """Invalid grid geometry (non power-of-two counts, bad extents)."""


class FieldShapeError(LupeError, ValueError):
    """A field does not match the grid it is used with."""


class NoiseModelError(LupeError, ValueError):
    """Noise modes violate band limits or the BHN structure."""


class ProjectionError(LupeError, ValueError):
    """The 2D Leray projector received a field that depends on z."""


class ConfigError(LupeError, ValueError):
    """Run configuration failed validation."""


class CFLViolationError(LupeError):
    """Advective Courant number exceeded one."""


class DivergenceConstraintError(LupeError):
    """Barotropic divergence exceeded its tolerance after a step."""


class BlowUpError(LupeError):
    """Non-finite values appeared in the state."""

    def __init__(self, step_index: int, message: str = "") -> None:
        self.step_index = step_index
        super().__init__(message or f"non-finite state at step {step_index}")


class SnapshotError(LupeError):
    """Snapshot file is corrupt or truncated."""


class UnsupportedVersionError(SnapshotError):
    """Snapshot was written with an unknown format version."""
