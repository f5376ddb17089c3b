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

"""Binary snapshot container.

Layout, all little-endian: 8-byte magic ``LUPESNAP``, uint32 version,
uint32 nx, ny, nz, float64 Lx, Ly, h, float64 t, int64 step index,
uint32 array count, then per array a uint16 name length, the UTF-8 name and
nx*ny*nz float64 values in x-fastest order. Arrays are v_x, v_y, T, S and the
diagnosed w.
"""

import logging
import struct
from pathlib import Path

import numpy as np

from lupe.errors import SnapshotError, UnsupportedVersionError
from lupe.fields import Array, State, make_grid
from lupe.operators import vertical_velocity

logger = logging.getLogger(__name__)

MAGIC = b"LUPESNAP"
VERSION = 1
_HEADER = struct.Struct("<8sI3I3ddqI")
_NAME_LENGTH = struct.Struct("<H")
ARRAY_NAMES = ("v_x", "v_y", "T", "S", "w")


def encode_snapshot(state: State) -> bytes:
    grid = state.grid
    arrays = {
        "v_x": state.v_star[0],
        "v_y": state.v_star[1],
        "T": state.T,
        "S": state.S,
        "w": vertical_velocity(grid, state.v_star),
    }
    parts = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            grid.nx,
            grid.ny,
            grid.nz,
            grid.Lx,
            grid.Ly,
            grid.h,
            state.t,
            state.step_index,
            len(arrays),
        )
    ]
    for name, values in arrays.items():
        encoded = name.encode("utf-8")
        parts.append(_NAME_LENGTH.pack(len(encoded)))
        parts.append(encoded)
        parts.append(np.asarray(values, dtype="<f8").tobytes(order="F"))
    return b"".join(parts)


def decode_snapshot(data: bytes) -> tuple[State, dict[str, Array]]:
    """Returns the state and every stored array by name."""
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise SnapshotError("not a lupe snapshot (bad magic)")
    if len(data) < _HEADER.size:
        raise SnapshotError("truncated snapshot header")
    _magic, version, nx, ny, nz, Lx, Ly, h, t, step_index, count = _HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(
            f"snapshot format version {version} is not supported (expected {VERSION})"
        )
    grid = make_grid(nx, ny, nz, Lx, Ly, h)
    n_values = nx * ny * nz
    offset = _HEADER.size
    arrays: dict[str, Array] = {}
    for _ in range(count):
        if offset + _NAME_LENGTH.size > len(data):
            raise SnapshotError("truncated snapshot: missing array name")
        (length,) = _NAME_LENGTH.unpack_from(data, offset)
        offset += _NAME_LENGTH.size
        try:
            name = data[offset : offset + length].decode("utf-8")
        except UnicodeDecodeError as e:
            raise SnapshotError(f"array name at byte {offset} is not valid UTF-8") from e
        offset += length
        end = offset + 8 * n_values
        if end > len(data):
            raise SnapshotError(f"truncated snapshot: array '{name}' is incomplete")
        flat = np.frombuffer(data, dtype="<f8", count=n_values, offset=offset)
        arrays[name] = np.array(flat.reshape(grid.shape, order="F"), dtype=np.float64, order="C")
        offset = end
    missing = [name for name in ARRAY_NAMES[:4] if name not in arrays]
    if missing:
        raise SnapshotError(f"snapshot lacks arrays {missing}")
    state = State(
        grid,
        np.stack([arrays["v_x"], arrays["v_y"]]),
        arrays["T"],
        arrays["S"],
        t=t,
        step_index=step_index,
    )
    return state, arrays


def write_snapshot(path: str | Path, state: State) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_snapshot(state))
    logger.debug(f"Wrote snapshot {path} at step {state.step_index}")
    return path


def read_snapshot(path: str | Path) -> State:
    state, _ = decode_snapshot(Path(path).read_bytes())
    return state


def snapshot_name(step_index: int) -> str:
    return f"step_{step_index:08d}.lupe"
