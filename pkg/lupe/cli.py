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

"""Command-line surface: ``lupe {run,check,ensemble,converge,info} --config FILE``."""

import csv
import logging
import math
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
from absl import app, flags

from lupe import config as env
from lupe.diagnostics import (
    DiagnosticsRecord,
    estimate_quantities,
    regime_indicator,
    write_diagnostics_csv,
)
from lupe.diagnostics.experiments import noise_convergence_experiment, run_ensemble
from lupe.diagnostics.invariants import all_passed, run_invariant_suite
from lupe.errors import LupeError
from lupe.fields import State, field_norm
from lupe.noise import noise_energy_rate
from lupe.runconfig import SimConfig, parse_config
from lupe.snapshot import snapshot_name, write_snapshot
from lupe.stepper import build_noise_model, prepare_initial_state, run

logger = logging.getLogger(__name__)

FLAGS = flags.FLAGS
flags.DEFINE_string("config", None, "Path to the TOML run configuration.")
flags.DEFINE_string("output_dir", env.OUTPUT_DIR, "Directory for CSV and snapshot output.")
flags.DEFINE_integer("members", 4, "Ensemble size for the ensemble command.", lower_bound=1)
flags.DEFINE_integer("ensemble", 64, "Members per noise level for the converge command.", lower_bound=1)
flags.DEFINE_list("upsilons", ["1", "0.25", "0.0625"], "Noise scalings for the converge command.")
flags.DEFINE_bool("write_snapshots", False, "Write binary snapshots at every diagnostics step.")
flags.DEFINE_integer("steps_override", None, "Run this many steps instead of t_end / dt.", lower_bound=0)

USAGE = """usage: lupe COMMAND --config FILE [flags]

commands:
  run       integrate one trajectory and write diagnostics.csv
  check     run the structural invariant suite and print a pass/fail table
  ensemble  run --members trajectories with seed offsets
  converge  vanishing-noise experiment over --upsilons with --ensemble members
  info      echo the configuration and derived quantities at t = 0
"""


def _run(config: SimConfig, output_dir: Path) -> int:
    snapshot_dir = output_dir / "snapshots"

    def save(state: State, record: DiagnosticsRecord) -> None:
        del record
        if FLAGS.write_snapshots:
            write_snapshot(snapshot_dir / snapshot_name(state.step_index), state)

    result = run(config, on_output=save)
    path = write_diagnostics_csv(output_dir / "diagnostics.csv", result.diagnostics)
    final = result.diagnostics[-1]
    print(f"Finished {final.step_index} steps at t={final.t:.6g}; diagnostics in {path}")
    return 0


def _check(config: SimConfig, output_dir: Path) -> int:
    del output_dir
    results = run_invariant_suite(config)
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  {'value':>12}  {'tolerance':>12}  status")
    for r in results:
        print(f"{r.name:<{width}}  {r.value:>12.3e}  {r.tolerance:>12.1e}  {r.status}")
    passed = all_passed(results)
    print("all invariants hold" if passed else "invariant suite FAILED")
    return 0 if passed else 1


def _ensemble(config: SimConfig, output_dir: Path) -> int:
    members = run_ensemble(config, FLAGS.members)
    for member in members:
        if member.result is not None:
            write_diagnostics_csv(
                output_dir / f"member_{member.member:03d}" / "diagnostics.csv",
                member.result.diagnostics,
            )
        else:
            print(f"member {member.member} failed: {member.error}")
    succeeded = sum(member.ok for member in members)
    print(f"{succeeded}/{len(members)} members completed; output in {output_dir}")
    return 0 if succeeded else 1


def _converge(config: SimConfig, output_dir: Path) -> int:
    upsilons = [float(u) for u in FLAGS.upsilons]
    table = noise_convergence_experiment(config, upsilons, FLAGS.ensemble)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / "convergence.csv"
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["upsilon", "rms_deviation", "n_members", "n_failed"])
        for row in table.rows:
            writer.writerow(
                [format(row.upsilon, ".17g"), format(row.rms_deviation, ".17g"), row.n_members, row.n_failed]
            )
    fit_path = output_dir / "convergence_fit.csv"
    with fit_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["fitted_exponent", "n_levels"])
        exponent_value = math.nan if table.exponent is None else table.exponent
        writer.writerow([format(exponent_value, ".17g"), len(table.rows)])
    for row in table.rows:
        print(f"upsilon={row.upsilon:<10g} rms={row.rms_deviation:.6e} members={row.n_members} failed={row.n_failed}")
    exponent = "undefined" if table.exponent is None else f"{table.exponent:.4f}"
    print(f"fitted exponent: {exponent}")
    return 0


def _info(config: SimConfig, output_dir: Path) -> int:
    del output_dir
    grid = config.to_grid()
    model = build_noise_model(config)
    state = prepare_initial_state(config)
    regime = regime_indicator(state, model, config.physics)
    record = estimate_quantities(state, config.physics, model, config.closure.to_kernel())
    print(config.model_dump_json(indent=2))
    print(f"grid spacing: dx={grid.dx:.6g} dy={grid.dy:.6g} dz={grid.dz:.6g} m")
    print(f"steps: {config.time.n_steps} (dt={config.time.dt:g} s)")
    print(f"noise modes: {model.n_modes}, active={model.is_active}")
    print(f"max |a|: {float(np.max(np.abs(model.a))):.6e} m^2/s")
    print(f"|u_S|_H: {field_norm(grid, model.u_s):.6e}")
    print(f"Itô-Stokes divergence before projection: {model.u_s_residual:.3e}")
    print(f"noise energy rate: {noise_energy_rate(model):.6e}")
    print(f"Richardson number: {regime.richardson:.6g} (alpha^2 = {regime.alpha2:.3e})")
    print(f"alpha^2/Ri: {regime.alpha2_over_ri:.6g}; noise shear ratio: {regime.noise_shear_ratio:.6g}")
    if regime.flagged:
        print(f"regime indicator flagged: {regime.reason}")
    print(f"|U|_H at t=0: {record.norm_h:.6e}")
    return 0


COMMANDS: dict[str, Callable[[SimConfig, Path], int]] = {
    "run": _run,
    "check": _check,
    "ensemble": _ensemble,
    "converge": _converge,
    "info": _info,
}


def _usage_error(message: str) -> int:
    print(f"error: {message}\n\n{USAGE}", file=sys.stderr)
    return 2


def dispatch(positional: Sequence[str]) -> int:
    """Runs the command named in ``positional[1]`` with the parsed flags."""
    if len(positional) != 2 or positional[1] not in COMMANDS:
        return _usage_error("expected exactly one command")
    if FLAGS.config is None:
        return _usage_error("--config is required")
    try:
        [float(u) for u in FLAGS.upsilons]
    except ValueError:
        return _usage_error(f"--upsilons must be numbers, got {FLAGS.upsilons}")
    try:
        config = parse_config(FLAGS.config)
        if FLAGS.steps_override is not None:
            config = config.with_steps(FLAGS.steps_override)
        return COMMANDS[positional[1]](config, Path(FLAGS.output_dir))
    except (LupeError, OSError) as e:
        logger.error(f"{positional[1]} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


def cli(argv: Sequence[str]) -> int:
    """Parses ``argv`` (program name first) and returns the exit code."""
    FLAGS.unparse_flags()
    try:
        positional = FLAGS(list(argv))
    except flags.Error as e:
        return _usage_error(str(e))
    return dispatch(positional)


def _parse_flags(argv: list[str]) -> list[str]:
    try:
        return FLAGS(argv)
    except flags.Error as e:
        sys.exit(_usage_error(str(e)))


def main(argv: list[str]) -> int:
    logging.basicConfig(level=env.LOG_LEVEL)
    return dispatch(argv)


def run_main() -> None:
    app.run(main, flags_parser=_parse_flags)


if __name__ == "__main__":
    run_main()
