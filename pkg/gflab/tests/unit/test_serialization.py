import numpy as np
import pandas as pd

from gflab.core.evolution import evolve_schrodinger
from gflab.core.grid import Field, GridSpec, Trajectory
from gflab.core.locality import lift, plant_offdiagonal_block
from gflab.core.presets import random_smooth_field, rotating_field, zero_field
from gflab.core.serialization import (
    read_field,
    read_global_operator,
    read_projection_field,
    read_trajectory,
    write_field,
    write_global_operator,
    write_projection_field,
    write_trajectory,
)


class TestCsvFormats:
    def test_field_columns(self, plane_grid, rng, tmp_path):
        path = write_field(Field.random(plane_grid, 2, rng), tmp_path / "f.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["i0", "i1", "component", "real", "imag"]
        assert len(frame) == 8 * 8 * 2

    def test_trajectory_columns(self, line_grid, rng, tmp_path):
        f = Field.random(line_grid, 2, rng)
        path = write_trajectory(Trajectory([0.0, 0.5], (f, f)), tmp_path / "t.csv")
        assert path.read_text().splitlines()[0] == "step,time,i0,component,real,imag"

    def test_seventeen_digits(self, line_grid, tmp_path):
        values = np.full((16, 1), 1.0 / 3.0 + 0.1j)
        path = write_field(Field(line_grid, values), tmp_path / "f.csv")
        first_row = path.read_text().splitlines()[1]
        assert first_row == "0,0,0.33333333333333331,0.10000000000000001"

    def test_creates_parent_directories(self, line_grid, tmp_path):
        path = write_field(Field.zeros(line_grid, 1), tmp_path / "a" / "b" / "f.csv")
        assert path.exists()


class TestBitExactReread:
    def test_field(self, plane_grid, rng, tmp_path):
        f = Field.random(plane_grid, 3, rng) * (1.0 / 7.0)
        g = read_field(write_field(f, tmp_path / "f.csv"))
        assert g.grid == f.grid
        assert np.array_equal(g.values, f.values)

    def test_projection_field(self, plane_grid, rng, tmp_path):
        p = random_smooth_field(plane_grid, 3, rng)
        q = read_projection_field(write_projection_field(p, tmp_path / "p.csv"))
        assert np.array_equal(q.values, p.values)

    def test_trajectory(self, line_grid, rng, tmp_path):
        f = Field.random(line_grid, 2, rng)
        times = np.array([0.0, 0.0025, 0.005])
        traj = Trajectory(times, tuple(evolve_schrodinger(f, t) for t in times))
        back = read_trajectory(write_trajectory(traj, tmp_path / "t.csv"))
        assert np.array_equal(back.times, traj.times)
        assert all(np.array_equal(a.values, b.values) for a, b in zip(back.states, traj.states))

    def test_global_operator_keeps_only_nonzeros(self, tmp_path):
        grid = GridSpec((8,))
        g = plant_offdiagonal_block(lift(rotating_field(grid, 2)), 1, 6, 1e-6)
        path = write_global_operator(g, tmp_path / "g.csv")
        assert len(pd.read_csv(path)) == np.count_nonzero(g.matrix)
        back = read_global_operator(path, grid, 2)
        assert np.array_equal(back.matrix, g.matrix)

    def test_zero_operator_is_header_only(self, tmp_path):
        grid = GridSpec((4,))
        g = lift(zero_field(grid, 2))
        path = write_global_operator(g, tmp_path / "zero.csv")
        assert path.read_text().splitlines() == ["row,col,real,imag"]
        back = read_global_operator(path, grid, 2)
        assert np.array_equal(back.matrix, g.matrix)
        assert back.is_projection
