"""
Unit tests for CSV and VTK result files.
"""

import numpy as np
import pytest

from src.config.presets import verification_cube
from src.config.problem import build_problem
from src.core.exceptions import OutputError
from src.core.integrator import init_state
from src.core.runner import Problem, run
from src.core.state import StepParams
from src.core.types import CSV_COLUMNS
from src.output.writers import SnapshotWriter, read_csv, write_csv, write_outputs, write_vtk


@pytest.fixture
def rows():
    rng = np.random.default_rng(0)
    return [{c: float(v) for c, v in zip(CSV_COLUMNS, rng.standard_normal(len(CSV_COLUMNS)))} for _ in range(3)]


@pytest.fixture
def problem(unit_cube, coupled_model) -> Problem:
    return Problem("cube", unit_cube, coupled_model, (1.0, 0.2, 0.0), StepParams(0.7, 0.05), 0.2)


class TestCSV:
    """Test the trajectory CSV."""

    def test_header_is_fixed(self, tmp_path, rows):
        """Test the first line lists the columns in order."""
        path = write_csv(rows, tmp_path / "run.csv")
        assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_values_read_back_exactly(self, tmp_path, rows):
        """Test %.17g keeps every bit."""
        path = write_csv(rows, tmp_path / "run.csv")
        assert read_csv(path) == rows

    def test_creates_parent_directories(self, tmp_path, rows):
        """Test nested output directories are created."""
        path = write_csv(rows, tmp_path / "a" / "b" / "run.csv")
        assert path.exists()

    def test_unwritable_path(self, tmp_path, rows):
        """Test I/O failures become OutputError naming the path."""
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OutputError, match="run.csv"):
            write_csv(rows, blocker / "run.csv")

    def test_write_outputs_can_be_disabled(self, tmp_path, rows):
        """Test csv_enabled=False writes nothing."""
        assert write_outputs(rows, tmp_path, "run", csv_enabled=False) is None
        assert list(tmp_path.iterdir()) == []

    def test_write_outputs_names_file_after_run(self, tmp_path, rows):
        """Test the CSV is <directory>/<name>.csv."""
        assert write_outputs(rows, tmp_path, "run") == tmp_path / "run.csv"

    def test_identical_config_gives_identical_bytes(self, tmp_path):
        """Test two runs of the same seeded config write byte-identical CSVs."""
        # Arrange
        config = verification_cube(steps=3)

        # Act
        paths = [
            write_outputs(run(build_problem(config)).rows, tmp_path / label, config.name)
            for label in ("first", "second")
        ]

        # Assert
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert len(read_csv(paths[0])) == 4


class TestVTK:
    """Test legacy VTK snapshots."""

    def test_grid_sections(self, tmp_path, unit_cube):
        """Test point, cell and data counts."""
        # Arrange
        state = init_state(unit_cube, (0.0, 0.0, 2.0))

        # Act
        lines = write_vtk(unit_cube, state, tmp_path / "s.vtk").read_text().splitlines()

        # Assert
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert f"POINTS {unit_cube.n_nodes} double" in lines
        assert f"CELLS {unit_cube.n_tets} {5 * unit_cube.n_tets}" in lines
        assert f"POINT_DATA {unit_cube.n_nodes}" in lines
        assert "VECTORS magnetisation double" in lines
        assert "VECTORS displacement double" in lines
        start = lines.index("LOOKUP_TABLE default") + 1
        assert lines[start:start + unit_cube.n_nodes] == ["1"] * unit_cube.n_nodes

    def test_cell_types_are_tetrahedra(self, tmp_path, unit_cube):
        """Test every cell has VTK type 10."""
        lines = write_vtk(unit_cube, init_state(unit_cube, (1.0, 0.0, 0.0)), tmp_path / "s.vtk").read_text().splitlines()
        start = lines.index(f"CELL_TYPES {unit_cube.n_tets}") + 1
        assert set(lines[start:start + unit_cube.n_tets]) == {"10"}


class TestSnapshotWriter:
    """Test snapshots as a step observer."""

    @pytest.mark.parametrize("stride,expected", [(1, [0, 1, 2, 3, 4]), (2, [0, 2, 4]), (3, [0, 3, 4])])
    def test_stride(self, tmp_path, problem, stride, expected):
        """Test the initial, every stride-th and the final state are written."""
        writer = SnapshotWriter(problem.mesh, tmp_path, "cube", stride)
        run(problem, observers=[writer])
        assert [p.name for p in writer.written] == [f"cube_{s:06d}.vtk" for s in expected]
        assert all(p.exists() for p in writer.written)
