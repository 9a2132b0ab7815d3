"""
Conforming tetrahedral meshes with labelled boundary faces.

A ``Mesh`` is immutable after construction. Tetrahedra are re-oriented to
positive signed volume, boundary faces to outward normals, and the
geometry tables (volumes, barycentric gradients, lumped weights, Neumann
face data) are computed once on first access.
"""

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from itertools import permutations
from typing import Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidInputError
from .types import BoolArray, FacePredicate, FloatArray, IndexArray

# local vertex triples of the four faces of a tet; face f is opposite vertex f
_TET_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
_TET_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
_DEGENERACY_TOL = 1e-12


class Region(IntEnum):
    """Boundary face labels."""

    OTHER = 0
    DIRICHLET = 1
    NEUMANN = 2


@dataclass(frozen=True, eq=False)
class GeometryTables:
    """Per-element and per-face geometric data."""

    volumes: FloatArray  # (n_tets,)
    gradients: FloatArray  # (n_tets, 4, 3), constant barycentric gradients
    lumped_weights: FloatArray  # (n_nodes,), w_z = sum_{K contains z} |K|/4
    centroids: FloatArray  # (n_tets, 3)
    neumann_faces: IndexArray  # (n_neumann, 3)
    neumann_areas: FloatArray  # (n_neumann,)
    neumann_normals: FloatArray  # (n_neumann, 3), unit and outward
    neumann_centroids: FloatArray  # (n_neumann, 3)

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.volumes))

    @property
    def neumann_area(self) -> float:
        return float(np.sum(self.neumann_areas))


def _signed_volumes(nodes: FloatArray, tets: IndexArray) -> Tuple[FloatArray, FloatArray]:
    x0 = nodes[tets[:, 0]]
    jac = np.stack(
        [nodes[tets[:, 1]] - x0, nodes[tets[:, 2]] - x0, nodes[tets[:, 3]] - x0],
        axis=2,
    )
    return np.linalg.det(jac) / 6.0, jac


def _check_degenerate(nodes: FloatArray, tets: IndexArray, volumes: FloatArray) -> None:
    edges = nodes[tets[:, _TET_EDGES[:, 1]]] - nodes[tets[:, _TET_EDGES[:, 0]]]
    scale = np.max(np.linalg.norm(edges, axis=2), axis=1) ** 3
    bad = np.flatnonzero(np.abs(volumes) <= _DEGENERACY_TOL * scale)
    if bad.size:
        raise InvalidInputError(
            f"Tetrahedron {int(bad[0])} is degenerate (volume {volumes[bad[0]]:.3e})",
            field="tets",
            context={"element": int(bad[0]), "count": int(bad.size)},
        )


def _face_keys(faces: IndexArray, n_nodes: int) -> np.ndarray:
    s = np.sort(faces, axis=1).astype(np.int64)
    n = np.int64(n_nodes)
    return (s[:, 0] * n + s[:, 1]) * n + s[:, 2]


class Mesh:
    """Tetrahedral mesh with Dirichlet/Neumann boundary labels."""

    def __init__(
        self,
        nodes: FloatArray,
        tets: IndexArray,
        boundary_faces: Optional[IndexArray] = None,
        face_regions: Optional[Sequence[int]] = None,
    ):
        """
        Build and normalise a mesh.

        Args:
            nodes: (n_nodes, 3) coordinates.
            tets: (n_tets, 4) 0-based node indices.
            boundary_faces: (n_faces, 3) node triples on the boundary.
            face_regions: ``Region`` value per boundary face.

        Raises:
            InvalidInputError: Bad shapes or indices, degenerate elements, or
                boundary faces that are not faces of exactly one tetrahedron.
        """
        nodes = np.array(nodes, dtype=np.float64)
        tets = np.array(tets, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise InvalidInputError(f"nodes must be (n, 3), got {nodes.shape}", field="nodes")
        if tets.ndim != 2 or tets.shape[1] != 4 or tets.shape[0] == 0:
            raise InvalidInputError(f"tets must be (n, 4), got {tets.shape}", field="tets")
        if tets.min() < 0 or tets.max() >= nodes.shape[0]:
            raise InvalidInputError("tet references a node index out of range", field="tets")

        volumes, _ = _signed_volumes(nodes, tets)
        _check_degenerate(nodes, tets, volumes)
        flip = volumes < 0.0
        tets[flip] = tets[flip][:, [0, 1, 3, 2]]

        if boundary_faces is None:
            boundary_faces = np.zeros((0, 3), dtype=np.int64)
            face_regions = []
        boundary_faces = np.array(boundary_faces, dtype=np.int64).reshape(-1, 3)
        regions = np.array(
            face_regions if face_regions is not None else [Region.OTHER] * len(boundary_faces),
            dtype=np.int64,
        )
        if regions.shape != (boundary_faces.shape[0],):
            raise InvalidInputError(
                "face_regions must have one entry per boundary face", field="face_regions"
            )

        self._nodes = nodes
        self._tets = tets
        self._faces, self._regions = self._orient_boundary(boundary_faces, regions)
        for arr in (self._nodes, self._tets, self._faces, self._regions):
            arr.setflags(write=False)

    def _orient_boundary(
        self, faces: IndexArray, regions: IndexArray
    ) -> Tuple[IndexArray, IndexArray]:
        if faces.shape[0] == 0:
            return faces, regions
        n = self._nodes.shape[0]
        all_faces = self._tets[:, _TET_FACES].reshape(-1, 3)
        keys, first, counts = np.unique(
            _face_keys(all_faces, n), return_index=True, return_counts=True
        )
        wanted = _face_keys(faces, n)
        pos = np.clip(np.searchsorted(keys, wanted), 0, keys.size - 1)
        ok = (keys[pos] == wanted) & (counts[pos] == 1)
        if not np.all(ok):
            bad = int(np.flatnonzero(~ok)[0])
            raise InvalidInputError(
                f"Boundary face {bad} {faces[bad].tolist()} is not a face of exactly one tetrahedron",
                field="boundary_faces",
            )
        owner = first[pos]
        opposite = self._tets[owner // 4, owner % 4]

        a, b, c = (self._nodes[faces[:, i]] for i in range(3))
        normal = np.cross(b - a, c - a)
        inward = np.einsum("ij,ij->i", normal, (a + b + c) / 3.0 - self._nodes[opposite]) < 0.0
        oriented = faces.copy()
        oriented[inward] = oriented[inward][:, [0, 2, 1]]
        return oriented, regions

    @property
    def nodes(self) -> FloatArray:
        return self._nodes

    @property
    def tets(self) -> IndexArray:
        return self._tets

    @property
    def boundary_faces(self) -> IndexArray:
        return self._faces

    @property
    def face_regions(self) -> IndexArray:
        return self._regions

    @property
    def n_nodes(self) -> int:
        return int(self._nodes.shape[0])

    @property
    def n_tets(self) -> int:
        return int(self._tets.shape[0])

    def faces_in(self, region: Region) -> IndexArray:
        return self._faces[self._regions == int(region)]

    @cached_property
    def dirichlet_mask(self) -> BoolArray:
        """Nodes lying on a Dirichlet face."""
        mask = np.zeros(self.n_nodes, dtype=bool)
        mask[self.faces_in(Region.DIRICHLET).ravel()] = True
        mask.setflags(write=False)
        return mask

    @cached_property
    def geometry(self) -> GeometryTables:
        return geometry_tables(self)

    @cached_property
    def h_max(self) -> float:
        edges = self._nodes[self._tets[:, _TET_EDGES[:, 1]]] - self._nodes[self._tets[:, _TET_EDGES[:, 0]]]
        return float(np.max(np.linalg.norm(edges, axis=2)))

    def require_dirichlet(self) -> None:
        """Raise unless some boundary face is labelled Dirichlet."""
        if not np.any(self._regions == int(Region.DIRICHLET)):
            raise InvalidInputError(
                "Mesh has no Dirichlet boundary face; the displacement problem "
                "needs a clamped region of positive measure",
                field="boundary_faces",
            )


def geometry_tables(mesh: Mesh) -> GeometryTables:
    """Volumes, barycentric gradients, lumped weights and Neumann face data.

    Raises:
        InvalidInputError: If an element has (numerically) zero volume.
    """
    nodes, tets = mesh.nodes, mesh.tets
    volumes, jac = _signed_volumes(nodes, tets)
    _check_degenerate(nodes, tets, volumes)
    volumes = np.abs(volumes)

    # rows of J^{-1} are the gradients of lambda_1..lambda_3
    inv = np.linalg.inv(jac)
    gradients = np.empty((tets.shape[0], 4, 3))
    gradients[:, 1:, :] = inv
    gradients[:, 0, :] = -inv.sum(axis=1)

    weights = np.bincount(
        tets.ravel(), weights=np.repeat(volumes / 4.0, 4), minlength=mesh.n_nodes
    )

    faces = mesh.faces_in(Region.NEUMANN)
    a, b, c = (nodes[faces[:, i]] for i in range(3))
    cross = np.cross(b - a, c - a)
    twice_area = np.linalg.norm(cross, axis=1)
    normals = cross / twice_area[:, None] if faces.shape[0] else np.zeros((0, 3))

    tables = GeometryTables(
        volumes=volumes,
        gradients=gradients,
        lumped_weights=weights,
        centroids=nodes[tets].mean(axis=1),
        neumann_faces=faces,
        neumann_areas=0.5 * twice_area,
        neumann_normals=normals,
        neumann_centroids=(a + b + c) / 3.0,
    )
    for arr in (
        tables.volumes,
        tables.gradients,
        tables.lumped_weights,
        tables.centroids,
        tables.neumann_areas,
        tables.neumann_normals,
        tables.neumann_centroids,
    ):
        arr.setflags(write=False)
    return tables


def plane_predicate(axis: int, value: float, tol: float = 1e-9) -> FacePredicate:
    """Select faces whose centroid lies on the plane x[axis] = value."""

    def predicate(centroids: FloatArray) -> BoolArray:
        return np.abs(centroids[:, axis] - value) <= tol * max(1.0, abs(value))

    return predicate


def any_of(*predicates: FacePredicate) -> FacePredicate:
    """Union of face predicates."""

    def predicate(centroids: FloatArray) -> BoolArray:
        result = np.zeros(centroids.shape[0], dtype=bool)
        for p in predicates:
            result |= p(centroids)
        return result

    return predicate


def box_mesh(
    lengths: Sequence[float],
    divisions: Sequence[int],
    dirichlet_predicate: FacePredicate,
    neumann_predicate: Optional[FacePredicate] = None,
    origin: Sequence[float] = (0.0, 0.0, 0.0),
) -> Mesh:
    """
    Structured box split into 6 Kuhn tetrahedra per hexahedron.

    Boundary faces are labelled Dirichlet where ``dirichlet_predicate``
    holds at the face centroid, otherwise Neumann where
    ``neumann_predicate`` holds, otherwise OTHER.

    Raises:
        InvalidInputError: Non-positive lengths/divisions or no Dirichlet face.
    """
    lengths_arr = np.asarray(lengths, dtype=np.float64)
    div = np.asarray(divisions, dtype=np.int64)
    if lengths_arr.shape != (3,) or np.any(lengths_arr <= 0.0):
        raise InvalidInputError(f"Box lengths must be 3 positive values, got {lengths}", field="lengths")
    if div.shape != (3,) or np.any(div < 1):
        raise InvalidInputError(f"Box divisions must be 3 integers >= 1, got {divisions}", field="divisions")

    nx, ny, nz = (int(d) for d in div)
    axes = [
        origin[a] + lengths_arr[a] * np.arange(div[a] + 1) / div[a] for a in range(3)
    ]
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    nodes = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def index(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    kk, jj, ii = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    ii, jj, kk = ii.ravel(), jj.ravel(), kk.ravel()
    tets = []
    for perm in permutations(range(3)):
        offset = np.zeros(3, dtype=np.int64)
        verts = [index(ii, jj, kk)]
        for axis in perm:
            offset[axis] += 1
            verts.append(index(ii + offset[0], jj + offset[1], kk + offset[2]))
        tets.append(np.column_stack(verts))
    tets_arr = np.concatenate(tets)

    all_faces = tets_arr[:, _TET_FACES].reshape(-1, 3)
    keys, first, counts = np.unique(
        _face_keys(all_faces, nodes.shape[0]), return_index=True, return_counts=True
    )
    boundary = all_faces[first[counts == 1]]
    centroids = nodes[boundary].mean(axis=1)

    regions = np.full(boundary.shape[0], int(Region.OTHER), dtype=np.int64)
    if neumann_predicate is not None:
        regions[np.asarray(neumann_predicate(centroids), dtype=bool)] = int(Region.NEUMANN)
    regions[np.asarray(dirichlet_predicate(centroids), dtype=bool)] = int(Region.DIRICHLET)
    if not np.any(regions == int(Region.DIRICHLET)):
        raise InvalidInputError(
            "Dirichlet predicate selects no boundary face", field="dirichlet_predicate"
        )

    return Mesh(nodes, tets_arr, boundary, regions)
