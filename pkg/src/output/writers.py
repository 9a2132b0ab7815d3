"""
Result files: one CSV time series per run and optional VTK snapshots.

Floats are written with ``%.17g`` so identical runs produce identical bytes.
"""

import csv
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import structlog

from ..core.exceptions import OutputError
from ..core.integrator import StepReport
from ..core.mesh import Mesh
from ..core.state import State
from ..core.types import CSV_COLUMNS, TrajectoryRowDict

logger = structlog.get_logger(__name__)

VTK_TETRA = 10


def _fmt(value: float) -> str:
    return "%.17g" % value


def write_csv(rows: Sequence[TrajectoryRowDict], path: Union[str, Path]) -> Path:
    """Write trajectory rows under the fixed header.

    Raises:
        OutputError: On any I/O failure, naming the path.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])  # type: ignore[literal-required]
    except OSError as e:
        raise OutputError(str(path), cause=e)
    return path


def read_csv(path: Union[str, Path]) -> List[TrajectoryRowDict]:
    """Parse a file written by ``write_csv``."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        return [
            TrajectoryRowDict(**{c: float(r[c]) for c in CSV_COLUMNS})  # type: ignore[typeddict-item]
            for r in reader
        ]


def write_vtk(mesh: Mesh, state: State, path: Union[str, Path]) -> Path:
    """Legacy ASCII unstructured grid with magnetisation, displacement and |m|.

    Raises:
        OutputError: On any I/O failure, naming the path.
    """
    path = Path(path)
    m = np.asarray(state.m)
    lines = [
        "# vtk DataFile Version 3.0",
        f"magnetoelastic step {state.step} t {_fmt(state.t)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_nodes} double",
    ]
    lines.extend(" ".join(_fmt(x) for x in p) for p in mesh.nodes)
    lines.append(f"CELLS {mesh.n_tets} {5 * mesh.n_tets}")
    lines.extend("4 " + " ".join(str(int(n)) for n in tet) for tet in mesh.tets)
    lines.append(f"CELL_TYPES {mesh.n_tets}")
    lines.extend([str(VTK_TETRA)] * mesh.n_tets)
    lines.append(f"POINT_DATA {mesh.n_nodes}")
    lines.append("VECTORS magnetisation double")
    lines.extend(" ".join(_fmt(x) for x in row) for row in m)
    lines.append("VECTORS displacement double")
    lines.extend(" ".join(_fmt(x) for x in row) for row in np.asarray(state.u))
    lines.append("SCALARS m_norm double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(_fmt(x) for x in np.linalg.norm(m, axis=1))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise OutputError(str(path), cause=e)
    return path


class SnapshotWriter:
    """Step observer writing ``<name>_<step>.vtk`` every ``stride`` steps."""

    def __init__(self, mesh: Mesh, directory: Union[str, Path], name: str, stride: int):
        self.mesh = mesh
        self.directory = Path(directory)
        self.name = name
        self.stride = stride
        self.written: List[Path] = []

    def _write(self, state: State) -> None:
        path = self.directory / f"{self.name}_{state.step:06d}.vtk"
        self.written.append(write_vtk(self.mesh, state, path))

    def on_start(self, state: State) -> None:
        self._write(state)

    def on_step(self, state: State, report: StepReport) -> None:
        if state.step % self.stride == 0:
            self._write(state)

    def on_finish(self, state: State) -> None:
        if not self.written or self.written[-1].name != f"{self.name}_{state.step:06d}.vtk":
            self._write(state)
        logger.info("snapshots_written", run=self.name, count=len(self.written))


def write_outputs(
    rows: Sequence[TrajectoryRowDict], directory: Union[str, Path], name: str, csv_enabled: bool = True
) -> Optional[Path]:
    """Write the CSV of a finished run; returns its path when written."""
    if not csv_enabled:
        return None
    path = write_csv(rows, Path(directory) / f"{name}.csv")
    logger.info("csv_written", run=name, path=str(path), rows=len(rows))
    return path
