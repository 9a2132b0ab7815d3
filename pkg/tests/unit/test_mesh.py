"""
Unit tests for tetrahedral meshes, the box mesher and geometry tables.
"""

import numpy as np
import pytest

from src.core.exceptions import InvalidInputError
from src.core.mesh import Mesh, Region, any_of, box_mesh, plane_predicate

CLAMP_X0 = plane_predicate(0, 0.0)


class TestMeshConstruction:
    """Test validation and normalisation in Mesh."""

    def test_reference_tet_geometry(self, reference_tet):
        """Test volume 1/6 and grad lambda_0 = (-1,-1,-1)."""
        geo = reference_tet.geometry
        assert geo.volumes[0] == pytest.approx(1.0 / 6.0, rel=1e-15)
        np.testing.assert_allclose(geo.gradients[0, 0], [-1.0, -1.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(geo.gradients[0, 1:], np.eye(3), atol=1e-15)

    def test_negative_orientation_is_flipped(self):
        """Test that an inverted tet is re-oriented to positive volume."""
        # Arrange
        nodes = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1]])

        # Act
        mesh = Mesh(nodes, [[0, 2, 1, 3]])

        # Assert
        assert mesh.tets.tolist() == [[0, 2, 3, 1]]
        assert mesh.geometry.volumes[0] == pytest.approx(1.0 / 6.0)

    def test_degenerate_tet_is_rejected(self):
        """Test that a flat tet names the offending element."""
        nodes = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [1.0, 1, 0]])
        with pytest.raises(InvalidInputError, match="Tetrahedron 0 is degenerate"):
            Mesh(nodes, [[0, 1, 2, 3]])

    def test_out_of_range_index_is_rejected(self):
        """Test that tets may only reference existing nodes."""
        nodes = np.eye(3)
        with pytest.raises(InvalidInputError, match="out of range"):
            Mesh(nodes, [[0, 1, 2, 3]])

    def test_bad_shapes_are_rejected(self):
        """Test node and tet array shapes."""
        with pytest.raises(InvalidInputError, match="nodes"):
            Mesh(np.zeros((4, 2)), [[0, 1, 2, 3]])
        with pytest.raises(InvalidInputError, match="tets"):
            Mesh(np.zeros((4, 3)), [[0, 1, 2]])

    def test_interior_face_is_not_a_boundary_face(self):
        """Test that a face shared by two tets cannot be labelled."""
        nodes = np.array(
            [[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1], [1.0, 1, 1]]
        )
        tets = [[0, 1, 2, 3], [1, 2, 3, 4]]
        with pytest.raises(InvalidInputError, match="exactly one tetrahedron"):
            Mesh(nodes, tets, [[1, 2, 3]], [Region.NEUMANN])

    def test_boundary_faces_are_oriented_outward(self):
        """Test that an inward triple is reversed."""
        nodes = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1]])
        mesh = Mesh(nodes, [[0, 1, 2, 3]], [[0, 1, 2]], [Region.NEUMANN])
        np.testing.assert_allclose(mesh.geometry.neumann_normals[0], [0.0, 0.0, -1.0])

    def test_region_count_mismatch(self):
        """Test one region label per face."""
        nodes = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1]])
        with pytest.raises(InvalidInputError, match="one entry per boundary face"):
            Mesh(nodes, [[0, 1, 2, 3]], [[0, 1, 2]], [])

    def test_arrays_are_immutable(self, unit_cube):
        """Test that mesh arrays cannot be written."""
        with pytest.raises(ValueError):
            unit_cube.nodes[0, 0] = 5.0
        with pytest.raises(ValueError):
            unit_cube.geometry.volumes[0] = 5.0

    def test_require_dirichlet(self, reference_tet, unit_cube):
        """Test that a mesh without a clamped face is reported."""
        unit_cube.require_dirichlet()
        with pytest.raises(InvalidInputError, match="no Dirichlet"):
            reference_tet.require_dirichlet()


class TestBoxMesh:
    """Test the structured Kuhn mesher."""

    def test_single_hexahedron(self):
        """Test unit cube with one hexahedron."""
        mesh = box_mesh([1.0, 1.0, 1.0], [1, 1, 1], CLAMP_X0)
        assert mesh.n_nodes == 8
        assert mesh.n_tets == 6
        assert mesh.geometry.total_volume == pytest.approx(1.0, abs=1e-12)

    def test_bar_volume(self):
        """Test the 20 x 6 x 6 bar has volume 720."""
        mesh = box_mesh([20.0, 6.0, 6.0], [10, 3, 3], CLAMP_X0)
        assert mesh.geometry.total_volume == pytest.approx(720.0, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_clamped_face_count(self, n):
        """Test each hexahedron face on x=0 splits into two Dirichlet triangles."""
        mesh = box_mesh([1.0, 1.0, 1.0], [n, n, n], CLAMP_X0)
        dirichlet = mesh.faces_in(Region.DIRICHLET)
        assert len(dirichlet) == 2 * n * n
        assert np.all(mesh.nodes[dirichlet][:, :, 0] == 0.0)
        assert len(mesh.boundary_faces) == 12 * n * n

    def test_dirichlet_overrides_neumann(self):
        """Test that a face selected by both predicates is Dirichlet."""
        mesh = box_mesh([1.0, 1.0, 1.0], [1, 1, 1], CLAMP_X0, CLAMP_X0)
        assert len(mesh.faces_in(Region.NEUMANN)) == 0

    def test_union_of_planes(self):
        """Test any_of selects faces on several planes."""
        mesh = box_mesh(
            [1.0, 1.0, 1.0], [1, 1, 1], any_of(CLAMP_X0, plane_predicate(1, 0.0))
        )
        assert len(mesh.faces_in(Region.DIRICHLET)) == 4

    def test_origin_shift(self):
        """Test boxes may start away from the origin."""
        mesh = box_mesh(
            [1.0, 2.0, 2.0], [1, 2, 2], CLAMP_X0, origin=(0.0, -1.0, -1.0)
        )
        np.testing.assert_allclose(mesh.nodes.min(axis=0), [0.0, -1.0, -1.0])
        np.testing.assert_allclose(mesh.nodes.max(axis=0), [1.0, 1.0, 1.0])

    def test_no_dirichlet_face_selected(self):
        """Test that an empty clamp is rejected."""
        with pytest.raises(InvalidInputError, match="selects no boundary face"):
            box_mesh([1.0, 1.0, 1.0], [1, 1, 1], plane_predicate(0, 5.0))

    @pytest.mark.parametrize(
        "lengths,divisions", [([1.0, 0.0, 1.0], [1, 1, 1]), ([1.0, 1.0, 1.0], [1, 0, 1])]
    )
    def test_rejects_invalid_box(self, lengths, divisions):
        """Test positive lengths and divisions."""
        with pytest.raises(InvalidInputError):
            box_mesh(lengths, divisions, CLAMP_X0)

    def test_h_max_is_cell_diagonal(self):
        """Test the longest edge of the Kuhn split is the hexahedron diagonal."""
        mesh = box_mesh([6.0, 6.0, 6.0], [2, 2, 2], CLAMP_X0)
        assert mesh.h_max == pytest.approx(3.0 * np.sqrt(3.0))


class TestGeometryTables:
    """Test derived geometric quantities."""

    def test_partition_of_unity(self, unit_cube):
        """Test barycentric gradients sum to zero per element."""
        np.testing.assert_allclose(unit_cube.geometry.gradients.sum(axis=1), 0.0, atol=1e-13)

    def test_lumped_weights_sum_to_volume(self):
        """Test sum_z w_z equals the total volume."""
        mesh = box_mesh([2.0, 3.0, 1.5], [3, 4, 2], CLAMP_X0)
        geo = mesh.geometry
        assert np.all(geo.lumped_weights > 0.0)
        assert geo.lumped_weights.sum() == pytest.approx(9.0, rel=1e-12)

    def test_neumann_normals(self, unit_cube):
        """Test Neumann normals are unit and point outward."""
        geo = unit_cube.geometry
        np.testing.assert_allclose(np.linalg.norm(geo.neumann_normals, axis=1), 1.0)
        np.testing.assert_allclose(geo.neumann_normals, np.tile([1.0, 0.0, 0.0], (8, 1)), atol=1e-15)

    def test_neumann_area_is_refinement_invariant(self):
        """Test the loaded area does not change under refinement."""
        areas = [
            box_mesh([1.0, 2.0, 3.0], [n, n, n], CLAMP_X0, plane_predicate(0, 1.0)).geometry.neumann_area
            for n in (1, 2, 4)
        ]
        np.testing.assert_allclose(areas, 6.0, rtol=1e-12)

    def test_dirichlet_mask(self, unit_cube):
        """Test that clamped nodes are exactly those at x=0."""
        np.testing.assert_array_equal(unit_cube.dirichlet_mask, unit_cube.nodes[:, 0] == 0.0)
