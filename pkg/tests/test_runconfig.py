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

"""Tests for TOML run configuration loading and validation"""

import math

import pytest

from lupe.errors import ConfigError
from lupe.fields import PhysParams
from lupe.runconfig import config_from_dict, parse_config

from tests.conftest import BAROCLINIC_MODES, DATA_DIR, SHIPPED_CONFIGS, base_config

MINIMAL = """
[grid]
nx = 8
ny = 8
nz = 4
Lx = 1.0
Ly = 1.0
h = 1.0

[time]
dt = 0.1
t_end = 1.0
"""


class TestParseConfig:
    """TOML loading"""

    def test_golden_values(self):
        config = parse_config(DATA_DIR / "golden.toml")
        assert (config.grid.nx, config.grid.ny, config.grid.nz) == (8, 16, 4)
        assert (config.grid.Lx, config.grid.Ly, config.grid.h) == (2.0, 4.0, 0.5)
        assert config.physics == PhysParams(
            f=0.5, g=9.81, rho0=1000.0, beta_T=-0.0002, beta_S=0.0008, T_r=12.0, S_r=34.5,
            mu_v=0.001, nu_v=0.002, mu_T=0.003, nu_T=0.004, mu_S=0.005, nu_S=0.006, alpha_T=0.25,
        )
        assert config.noise.upsilon == 0.5
        assert config.noise.bhn is True
        first, second = config.noise.modes
        assert (first.name, first.kind, first.kx, first.ky) == ("streamfunction", "bhn-streamfunction", 1, 2)
        assert (first.amplitude, first.phase) == (0.01, 0.25)
        assert (second.kind, second.component, second.amplitude) == ("uniform", "y", 0.002)
        assert config.closure.variant == "strong"
        kernel = config.closure.to_kernel()
        assert (kernel.kind, kernel.cutoff, kernel.horizontal_only) == ("sharp-cutoff", 3.5, True)
        assert (config.time.dt, config.time.t_end, config.time.output_every) == (0.002, 0.02, 5)
        assert config.time.vertical_diffusion == "explicit"
        assert config.time.tol_div == 1e-10
        assert config.time.n_steps == 10
        assert config.init.preset == "barotropic-jet"
        assert config.init.params == {"u0": 0.05, "wavenumber": 2, "t_top": 14.0, "t_bottom": 8.0, "salinity": 34.5}
        assert config.seed.value == 99

    def test_minimal_file_uses_defaults(self, tmp_path):
        path = tmp_path / "minimal.toml"
        path.write_text(MINIMAL, encoding="utf-8")
        config = parse_config(path)
        assert config.physics == PhysParams()
        assert config.noise.modes == []
        assert config.closure.variant == "weak-filtered"
        assert config.time.vertical_diffusion == "implicit"
        assert config.time.output_every == 1
        assert config.init.preset == "rest-stratified"
        assert config.seed.value == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_config(tmp_path / "absent.toml")

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[grid\nnx = 8\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="malformed TOML"):
            parse_config(path)

    @pytest.mark.parametrize("name", sorted(p.name for p in SHIPPED_CONFIGS.glob("*.toml")))
    def test_shipped_configurations_parse(self, name):
        config = parse_config(SHIPPED_CONFIGS / name)
        assert config.time.n_steps > 0


class TestValidation:
    """Schema and consistency errors"""

    def test_unknown_key_is_rejected(self):
        data = base_config(time={"dt": 0.01, "t_end": 0.1, "stride": 3})
        with pytest.raises(ConfigError, match="stride"):
            config_from_dict(data)

    def test_unknown_section_is_rejected(self):
        data = base_config()
        data["output"] = {"format": "netcdf"}
        with pytest.raises(ConfigError, match="output"):
            config_from_dict(data)

    def test_bhn_conflict_names_the_mode(self):
        data = base_config(noise={"upsilon": 1.0, "bhn": True, "modes": [dict(m) for m in BAROCLINIC_MODES]})
        with pytest.raises(ConfigError, match="px"):
            config_from_dict(data)

    def test_mode_above_band_limit(self):
        mode = {"name": "too-fine", "kind": "potential", "kx": 5, "amplitude": 0.1}
        with pytest.raises(ConfigError, match="too-fine"):
            config_from_dict(base_config(noise={"upsilon": 1.0, "modes": [mode]}))

    def test_horizontal_diffusion_bound(self):
        data = base_config(physics={"mu_v": 10.0}, time={"dt": 0.1, "t_end": 1.0})
        with pytest.raises(ConfigError, match="horizontal diffusion bound"):
            config_from_dict(data)

    def test_explicit_vertical_bound(self):
        data = base_config(physics={"nu_T": 1.0}, time={"dt": 0.01, "t_end": 0.1, "vertical_diffusion": "explicit"})
        with pytest.raises(ConfigError, match="vertical diffusion bound"):
            config_from_dict(data)
        implicit = base_config(physics={"nu_T": 1.0}, time={"dt": 0.01, "t_end": 0.1})
        assert config_from_dict(implicit).time.vertical_diffusion == "implicit"

    def test_grid_must_be_power_of_two(self):
        with pytest.raises(ConfigError, match="power of two"):
            config_from_dict(base_config(grid={"nx": 12}))

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown init preset"):
            config_from_dict(base_config(init={"preset": "hurricane", "params": {}}))

    def test_unknown_preset_parameter(self):
        with pytest.raises(ConfigError, match="amplitude"):
            config_from_dict(base_config(init={"preset": "rest-stratified", "params": {"amplitude": 1.0}}))

    def test_sharp_cutoff_needs_cutoff(self):
        with pytest.raises(ConfigError, match="cutoff"):
            config_from_dict(base_config(closure={"kernel": "sharp-cutoff", "cutoff": 0.0}))

    def test_negative_upsilon(self):
        with pytest.raises(ConfigError):
            config_from_dict(base_config(noise={"upsilon": -0.5}))

    def test_config_error_is_value_error(self):
        with pytest.raises(ValueError):
            config_from_dict({"time": {"dt": 0.1, "t_end": 1.0}})


class TestConfigHelpers:
    """Derived configurations used by the experiments"""

    def test_with_upsilon(self, make_config):
        config = make_config(noise={"upsilon": 1.0})
        scaled = config.with_upsilon(0.25)
        assert scaled.noise.upsilon == 0.25
        assert config.noise.upsilon == 1.0
        assert scaled.seed == config.seed

    def test_effective_upsilon(self, make_config):
        config = make_config(noise={"upsilon": 1.0})
        assert config.effective_upsilon == 1.0
        assert config.with_closure("deterministic").effective_upsilon == 0.0

    def test_n_steps_rounds(self, make_config):
        config = make_config(time={"dt": 0.1, "t_end": 0.3})
        assert config.time.n_steps == 3
        assert math.isclose(config.time.n_steps * config.time.dt, 0.3)

    def test_with_steps(self, make_config):
        config = make_config(time={"dt": 0.1, "t_end": 0.3})
        assert config.with_steps(7).time.n_steps == 7
        assert config.with_steps(0).time.n_steps == 0
        assert config.time.n_steps == 3
