"""
Reader and writer for the ASCII Gmsh MSH 2.2 subset.

Only ``$MeshFormat``, ``$Nodes`` and ``$Elements`` are interpreted;
other sections (``$PhysicalNames`` and friends) are skipped. Triangles
(type 2) become labelled boundary faces via their physical tag and
tetrahedra (type 4) form the volume mesh. Node ids are 1-based in the file
and 0-based in memory.
"""

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import structlog

from .exceptions import MeshParseError, OutputError
from .mesh import Mesh, Region

logger = structlog.get_logger(__name__)

TRIANGLE = 2
TETRAHEDRON = 4
_NODES_PER_TYPE = {TRIANGLE: 3, TETRAHEDRON: 4}

DEFAULT_REGION_TAGS: Dict[Region, int] = {
    Region.DIRICHLET: 1,
    Region.NEUMANN: 2,
    Region.OTHER: 3,
}


class _Lines:
    """Line cursor that remembers 1-based line numbers for error messages."""

    def __init__(self, path: str, text: str):
        self.path = path
        self._lines = text.splitlines()
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos

    def next(self, section: str) -> str:
        if self.pos >= len(self._lines):
            raise MeshParseError(self.path, section, self.pos, "unexpected end of file")
        line = self._lines[self.pos].strip()
        self.pos += 1
        return line

    def at_end(self) -> bool:
        return self.pos >= len(self._lines)

    def fail(self, section: str, reason: str) -> MeshParseError:
        return MeshParseError(self.path, section, self.pos, reason)


def _read_format(lines: _Lines) -> None:
    header = lines.next("$MeshFormat").split()
    if len(header) < 3:
        raise lines.fail("$MeshFormat", "expected 'version file-type data-size'")
    if not header[0].startswith("2."):
        raise lines.fail("$MeshFormat", f"unsupported MSH version {header[0]} (need 2.2)")
    if header[1] != "0":
        raise lines.fail("$MeshFormat", "binary MSH files are not supported")
    if lines.next("$MeshFormat") != "$EndMeshFormat":
        raise lines.fail("$MeshFormat", "missing $EndMeshFormat")


def _read_nodes(lines: _Lines) -> Tuple[np.ndarray, Dict[int, int]]:
    try:
        count = int(lines.next("$Nodes"))
    except ValueError:
        raise lines.fail("$Nodes", "node count is not an integer")
    coords = np.empty((count, 3))
    ids: Dict[int, int] = {}
    for i in range(count):
        parts = lines.next("$Nodes").split()
        if len(parts) != 4:
            raise lines.fail("$Nodes", "expected 'id x y z'")
        try:
            ids[int(parts[0])] = i
            coords[i] = [float(p) for p in parts[1:]]
        except ValueError:
            raise lines.fail("$Nodes", "malformed node record")
    if lines.next("$Nodes") != "$EndNodes":
        raise lines.fail("$Nodes", "missing $EndNodes")
    return coords, ids


def _read_elements(
    lines: _Lines, ids: Dict[int, int]
) -> Tuple[List[List[int]], List[List[int]], List[int]]:
    try:
        count = int(lines.next("$Elements"))
    except ValueError:
        raise lines.fail("$Elements", "element count is not an integer")
    tets: List[List[int]] = []
    faces: List[List[int]] = []
    face_tags: List[int] = []
    for _ in range(count):
        parts = lines.next("$Elements").split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise lines.fail("$Elements", "malformed element record")
        if len(values) < 3:
            raise lines.fail("$Elements", "expected 'id type ntags ...'")
        etype, ntags = values[1], values[2]
        if etype not in _NODES_PER_TYPE:
            raise lines.fail("$Elements", f"unsupported element type {etype}")
        nodes = values[3 + ntags:]
        if len(nodes) != _NODES_PER_TYPE[etype]:
            raise lines.fail(
                "$Elements", f"element type {etype} needs {_NODES_PER_TYPE[etype]} nodes"
            )
        try:
            local = [ids[n] for n in nodes]
        except KeyError as e:
            raise lines.fail("$Elements", f"unknown node id {e.args[0]}")
        if etype == TETRAHEDRON:
            tets.append(local)
        else:
            faces.append(local)
            face_tags.append(values[3] if ntags > 0 else 0)
    if lines.next("$Elements") != "$EndElements":
        raise lines.fail("$Elements", "missing $EndElements")
    return tets, faces, face_tags


def _skip_section(lines: _Lines, name: str) -> None:
    end = "$End" + name[1:]
    while lines.next(name) != end:
        pass


def read_msh(
    path: Union[str, Path],
    tag_regions: Optional[Mapping[int, Region]] = None,
) -> Mesh:
    """
    Parse an MSH 2.2 file into a ``Mesh``.

    Args:
        path: File to read.
        tag_regions: Physical tag to region map for triangles. Defaults to
            the inverse of ``DEFAULT_REGION_TAGS``; unmapped tags become OTHER.

    Raises:
        MeshParseError: Unsupported version or element type, or malformed
            records; the error names the section and line.
    """
    path_str = str(path)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MeshParseError(path_str, "-", 0, f"cannot read file: {e}")

    if tag_regions is None:
        tag_regions = {tag: region for region, tag in DEFAULT_REGION_TAGS.items()}

    lines = _Lines(path_str, text)
    coords: Optional[np.ndarray] = None
    ids: Dict[int, int] = {}
    elements = None
    seen_format = False
    while not lines.at_end():
        header = lines.next("-")
        if not header:
            continue
        if header == "$MeshFormat":
            _read_format(lines)
            seen_format = True
        elif header == "$Nodes":
            coords, ids = _read_nodes(lines)
        elif header == "$Elements":
            elements = _read_elements(lines, ids)
        elif header.startswith("$") and not header.startswith("$End"):
            _skip_section(lines, header)
        else:
            raise lines.fail("-", f"unexpected content {header!r}")

    if not seen_format:
        raise MeshParseError(path_str, "$MeshFormat", 0, "missing $MeshFormat section")
    if coords is None or elements is None:
        raise MeshParseError(path_str, "$Nodes/$Elements", lines.lineno, "missing section")

    tets, faces, face_tags = elements
    if not tets:
        raise MeshParseError(path_str, "$Elements", lines.lineno, "no tetrahedra")
    regions = [int(tag_regions.get(tag, Region.OTHER)) for tag in face_tags]

    logger.debug(
        "msh_read", path=path_str, nodes=len(coords), tets=len(tets), faces=len(faces)
    )
    return Mesh(coords, np.array(tets), np.array(faces).reshape(-1, 3), regions)


def write_msh(
    mesh: Mesh,
    path: Union[str, Path],
    region_tags: Optional[Mapping[Region, int]] = None,
) -> None:
    """Write ``mesh`` as MSH 2.2 ASCII with boundary faces as tagged triangles."""
    tags = dict(DEFAULT_REGION_TAGS)
    tags.update(region_tags or {})

    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.n_nodes)]
    out.extend(
        f"{i + 1} {x:.17g} {y:.17g} {z:.17g}" for i, (x, y, z) in enumerate(mesh.nodes)
    )
    out.append("$EndNodes")

    n_faces = mesh.boundary_faces.shape[0]
    out.extend(["$Elements", str(n_faces + mesh.n_tets)])
    for i, (face, region) in enumerate(zip(mesh.boundary_faces, mesh.face_regions)):
        tag = tags[Region(int(region))]
        a, b, c = (int(n) + 1 for n in face)
        out.append(f"{i + 1} {TRIANGLE} 2 {tag} {tag} {a} {b} {c}")
    for j, tet in enumerate(mesh.tets):
        a, b, c, d = (int(n) + 1 for n in tet)
        out.append(f"{n_faces + j + 1} {TETRAHEDRON} 2 0 0 {a} {b} {c} {d}")
    out.append("$EndElements")

    try:
        Path(path).write_text("\n".join(out) + "\n")
    except OSError as e:
        raise OutputError(str(path), cause=e)
