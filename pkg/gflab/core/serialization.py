# core/serialization.py
"""
CSV codecs. Numbers are written with 17 significant digits ('%.17g'),
'.' as decimal separator, ',' as delimiter and one header row, so a
read-back reproduces every double bit for bit.

  Field            i0[,i1,i2],component,real,imag
  ProjectionField  i0[,i1,i2],row,col,real,imag
  Trajectory       step,time,i0[,i1,i2],component,real,imag
  GlobalOperator   row,col,real,imag   (nonzero entries only)
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from gflab.core.grid import Field, GridSpec, ProjectionField, Trajectory
from gflab.core.locality import GlobalOperator

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]
GLOBAL_OPERATOR_DTYPES = {"row": np.int64, "col": np.int64}


def _index_columns(n: int) -> List[str]:
    return [f"i{k}" for k in range(n)]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"wrote {len(frame)} rows to {path}")
    return path


def _cell_table(values: np.ndarray, n: int, trailing: List[str]) -> pd.DataFrame:
    """One row per array entry, spatial indices first, then the trailing (fiber) indices."""
    index = np.indices(values.shape).reshape(values.ndim, -1)
    flat = values.reshape(-1)
    columns = {name: index[k] for k, name in enumerate(_index_columns(n) + trailing)}
    columns["real"] = flat.real
    columns["imag"] = flat.imag
    return pd.DataFrame(columns)


def _sizes_from(frame: pd.DataFrame, n: int):
    return tuple(int(frame[c].max()) + 1 for c in _index_columns(n))


def _n_from(frame: pd.DataFrame) -> int:
    return sum(1 for c in frame.columns if c.startswith("i") and c[1:].isdigit())


def write_field(f: Field, path: PathLike) -> Path:
    return _write(_cell_table(f.values, f.grid.n, ["component"]), path)


def read_field(path: PathLike, length: float = 1.0) -> Field:
    frame = pd.read_csv(path, float_precision="round_trip")
    n = _n_from(frame)
    sizes = _sizes_from(frame, n)
    d = int(frame["component"].max()) + 1
    values = np.zeros(sizes + (d,), dtype=complex)
    keys = tuple(frame[c].to_numpy() for c in _index_columns(n) + ["component"])
    values[keys] = frame["real"].to_numpy() + 1j * frame["imag"].to_numpy()
    return Field(GridSpec(sizes, length), values)


def write_projection_field(p: ProjectionField, path: PathLike) -> Path:
    return _write(_cell_table(p.values, p.grid.n, ["row", "col"]), path)


def read_projection_field(path: PathLike, length: float = 1.0) -> ProjectionField:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"projection field file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    n = _n_from(frame)
    sizes = _sizes_from(frame, n)
    d = int(frame["row"].max()) + 1
    values = np.zeros(sizes + (d, d), dtype=complex)
    keys = tuple(frame[c].to_numpy() for c in _index_columns(n) + ["row", "col"])
    values[keys] = frame["real"].to_numpy() + 1j * frame["imag"].to_numpy()
    return ProjectionField(GridSpec(sizes, length), values)


def write_trajectory(traj: Trajectory, path: PathLike) -> Path:
    frames = []
    for step, (t, state) in enumerate(zip(traj.times, traj.states)):
        table = _cell_table(state.values, state.grid.n, ["component"])
        table.insert(0, "time", t)
        table.insert(0, "step", step)
        frames.append(table)
    return _write(pd.concat(frames, ignore_index=True), path)


def read_trajectory(path: PathLike, length: float = 1.0) -> Trajectory:
    frame = pd.read_csv(path, float_precision="round_trip")
    n = _n_from(frame)
    sizes = _sizes_from(frame, n)
    d = int(frame["component"].max()) + 1
    grid = GridSpec(sizes, length)
    times, states = [], []
    for step, rows in frame.groupby("step", sort=True):
        values = np.zeros(sizes + (d,), dtype=complex)
        keys = tuple(rows[c].to_numpy() for c in _index_columns(n) + ["component"])
        values[keys] = rows["real"].to_numpy() + 1j * rows["imag"].to_numpy()
        times.append(float(rows["time"].iloc[0]))
        states.append(Field(grid, values))
    return Trajectory(np.asarray(times), tuple(states))


def write_global_operator(g: GlobalOperator, path: PathLike) -> Path:
    rows, cols = np.nonzero(g.matrix)
    entries = g.matrix[rows, cols]
    frame = pd.DataFrame({"row": rows, "col": cols, "real": entries.real, "imag": entries.imag})
    return _write(frame, path)


def read_global_operator(path: PathLike, grid: GridSpec, d: int, is_projection: bool = True) -> GlobalOperator:
    # a zero operator is a header-only file; pin the index dtypes so it still reads
    frame = pd.read_csv(path, float_precision="round_trip", dtype=GLOBAL_OPERATOR_DTYPES)
    size = grid.num_cells * d
    matrix = np.zeros((size, size), dtype=complex)
    rows, cols = frame["row"].to_numpy(np.intp), frame["col"].to_numpy(np.intp)
    matrix[rows, cols] = frame["real"].to_numpy(float) + 1j * frame["imag"].to_numpy(float)
    return GlobalOperator(grid, d, matrix, is_projection=is_projection)
