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

"""Monitors, invariant checks and experiments on simulated trajectories."""

from lupe.diagnostics.balance import backscatter, dissipation, fd_balance
from lupe.diagnostics.records import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    estimate_quantities,
    read_diagnostics_csv,
    write_diagnostics_csv,
)
from lupe.diagnostics.regime import RegimeIndicator, regime_indicator, stochastic_shear

__all__ = [
    "CSV_COLUMNS",
    "DiagnosticsRecord",
    "RegimeIndicator",
    "backscatter",
    "dissipation",
    "estimate_quantities",
    "fd_balance",
    "read_diagnostics_csv",
    "regime_indicator",
    "stochastic_shear",
    "write_diagnostics_csv",
]
