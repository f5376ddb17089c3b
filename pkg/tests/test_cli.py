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

"""Tests for the lupe command-line surface"""

import csv
import math

import pytest

from lupe.cli import cli
from lupe.diagnostics import CSV_COLUMNS, read_diagnostics_csv

from tests.conftest import SHIPPED_CONFIGS

SMALL_RUN = """
[grid]
nx = 8
ny = 8
nz = 4
Lx = 6.283185307179586
Ly = 6.283185307179586
h = 1.0

[physics]
f = 1.0
g = 1.0
rho0 = 1.0
beta_T = -0.1
beta_S = 0.0
T_r = 0.0

[noise]
upsilon = 1.0
bhn = true

[[noise.modes]]
name = "zonal"
kind = "bhn-streamfunction"
kx = 1
amplitude = 0.05

[[noise.modes]]
name = "meridional"
kind = "bhn-streamfunction"
ky = 1
amplitude = 0.05

[closure]
variant = "weak-filtered"
kernel = "gaussian"
length_scale = 0.4

[time]
dt = 0.01
t_end = 0.05
output_every = 2

[init]
preset = "barotropic-jet"

[init.params]
u0 = 0.1
t_top = 1.0
t_bottom = 0.0

[seed]
value = 5
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_RUN, encoding="utf-8")
    return path


def _lupe(*args):
    return cli(["lupe", *args])


class TestRunCommand:
    """lupe run"""

    def test_writes_diagnostics(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        assert _lupe("run", "--config", str(config_path), "--output_dir", str(out)) == 0
        records = read_diagnostics_csv(out / "diagnostics.csv")
        assert [r.step_index for r in records] == [0, 2, 4, 5]
        header = (out / "diagnostics.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.split(",") == list(CSV_COLUMNS)
        assert "Finished 5 steps" in capsys.readouterr().out

    def test_reruns_are_byte_identical(self, config_path, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert _lupe("run", "--config", str(config_path), "--output_dir", str(first)) == 0
        assert _lupe("run", "--config", str(config_path), "--output_dir", str(second)) == 0
        assert (first / "diagnostics.csv").read_bytes() == (second / "diagnostics.csv").read_bytes()

    def test_writes_snapshots(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert _lupe("run", "--config", str(config_path), "--output_dir", str(out), "--write_snapshots") == 0
        names = sorted(p.name for p in (out / "snapshots").iterdir())
        assert names == [f"step_{i:08d}.lupe" for i in (0, 2, 4, 5)]

    def test_steps_override(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        assert _lupe("run", "--config", str(config_path), "--output_dir", str(out), "--steps_override", "3") == 0
        records = read_diagnostics_csv(out / "diagnostics.csv")
        assert [r.step_index for r in records] == [0, 2, 3]
        assert "Finished 3 steps" in capsys.readouterr().out


class TestOtherCommands:
    """check, ensemble, converge and info"""

    @pytest.mark.parametrize("name", ["deterministic.toml", "baroclinic_noise.toml"])
    def test_check_shipped_configurations(self, name, capsys):
        assert _lupe("check", "--config", str(SHIPPED_CONFIGS / name)) == 0
        assert "all invariants hold" in capsys.readouterr().out

    def test_ensemble(self, config_path, tmp_path):
        out = tmp_path / "ens"
        assert _lupe("ensemble", "--config", str(config_path), "--output_dir", str(out), "--members", "2") == 0
        assert (out / "member_000" / "diagnostics.csv").is_file()
        assert (out / "member_001" / "diagnostics.csv").is_file()

    def test_converge(self, config_path, tmp_path, capsys):
        out = tmp_path / "conv"
        code = _lupe(
            "converge", "--config", str(config_path), "--output_dir", str(out),
            "--ensemble", "2", "--upsilons", "1,0.25",
        )
        assert code == 0
        with (out / "convergence.csv").open(newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [float(r["upsilon"]) for r in rows] == [1.0, 0.25]
        assert all(int(r["n_members"]) == 2 for r in rows)
        with (out / "convergence_fit.csv").open(newline="", encoding="utf-8") as handle:
            (fit,) = list(csv.DictReader(handle))
        assert int(fit["n_levels"]) == 2
        exponent = float(fit["fitted_exponent"])
        assert math.isfinite(exponent)
        assert f"fitted exponent: {exponent:.4f}" in capsys.readouterr().out

    def test_info(self, config_path, capsys):
        assert _lupe("info", "--config", str(config_path)) == 0
        output = capsys.readouterr().out
        assert "noise modes: 2, active=True" in output
        assert "Richardson number" in output


class TestExitCodes:
    """Usage errors exit 2, runtime failures exit 1"""

    def test_no_command(self, config_path):
        assert _lupe("--config", str(config_path)) == 2

    def test_unknown_command(self, config_path):
        assert _lupe("simulate", "--config", str(config_path)) == 2

    def test_missing_config_flag(self):
        assert _lupe("run") == 2

    def test_unknown_flag(self, config_path):
        assert _lupe("run", "--config", str(config_path), "--colour") == 2

    def test_bad_upsilons(self, config_path):
        assert _lupe("converge", "--config", str(config_path), "--upsilons", "one,two") == 2

    def test_missing_config_file(self, tmp_path, capsys):
        assert _lupe("run", "--config", str(tmp_path / "absent.toml"), "--output_dir", str(tmp_path)) == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[grid]\nnx = 6\nny = 8\nnz = 4\nLx = 1.0\nLy = 1.0\nh = 1.0\n[time]\ndt = 0.1\nt_end = 1.0\n", encoding="utf-8")
        assert _lupe("run", "--config", str(path), "--output_dir", str(tmp_path)) == 1
