"""
Unit tests for experiment presets.
"""

import pytest

from src.config.presets import (
    CFL_FINE_MESH,
    CFL_MESHES,
    CFL_STEPS,
    PRESETS,
    THETA_NEAR_HALF,
    build_preset,
    dimensionless_time,
    preset_names,
    verification_cube,
)
from src.config.problem import build_problem
from src.config.run_config import InitialKind
from src.core.exceptions import ConfigurationError


class TestPresetRegistry:
    """Test preset lookup and expansion."""

    @pytest.mark.parametrize(
        "name,count",
        [
            ("applied_field", 5),
            ("traction", 5),
            ("nutation", 4),
            ("theta_sweep", 7),
            ("constraint_sweep", 4),
            ("cfl_robustness", 16),
        ],
    )
    def test_member_counts(self, name, count):
        """Test each preset expands into one member per swept value."""
        members = build_preset(name)
        assert len(members) == count
        assert len({m.name for m in members}) == count

    def test_names_match_registry(self):
        """Test preset_names lists the registry."""
        assert preset_names() == list(PRESETS)

    def test_unknown_preset(self):
        """Test an unknown name is a configuration error."""
        with pytest.raises(ConfigurationError, match="Unknown preset: bogus"):
            build_preset("bogus")

    def test_overrides_apply_to_every_member(self):
        """Test --set style overrides reach all members."""
        members = build_preset("constraint_sweep", ["integration.t_final=0.1", "output.csv=false"])
        assert all(m.integration.t_final == 0.1 for m in members)
        assert all(m.output.csv is False for m in members)

    def test_invalid_override(self):
        """Test overrides are validated per member."""
        with pytest.raises(ConfigurationError):
            build_preset("theta_sweep", ["integration.theta=2"])


class TestPresetContents:
    """Test the physical setup of the presets."""

    def test_dimensionless_time(self):
        """Test one nanosecond is about 332 time units."""
        assert dimensionless_time(1e-9) == pytest.approx(331.94, rel=1e-3)

    def test_bar_runs_take_500_steps(self):
        """Test the bar presets step 2 ps up to 1 ns."""
        member = build_preset("applied_field")[0]
        problem = build_problem(member)
        assert problem.n_steps == 500
        assert problem.params.theta == THETA_NEAR_HALF
        assert problem.physical_time is True

    def test_applied_field_directions(self):
        """Test fields point along +y and grow through the sweep."""
        fields = [m.physical.applied_field for m in build_preset("applied_field")]
        assert all(f[0] == 0.0 and f[2] == 0.0 for f in fields)
        assert [f[1] for f in fields] == sorted(f[1] for f in fields)
        assert fields[0][1] == 0.0

    def test_traction_on_free_end(self):
        """Test the bar is clamped at x=0 and loaded at x=20."""
        member = build_preset("traction")[-1]
        box = member.mesh.box
        assert box.dirichlet[0].value == 0.0
        assert box.neumann[0].value == 20.0
        assert member.physical.traction == [0.0, 100.0, 0.0]

    def test_nutation_scales_magnetostriction(self):
        """Test the magnetostriction multiplier and the perturbed start."""
        members = build_preset("nutation")
        base = members[1].physical.params.lambda100 / 20
        assert members[-1].physical.params.lambda100 == pytest.approx(100 * base)
        assert members[0].physical.params.lambda100 == 0.0
        assert all(m.initial.kind is InitialKind.PERTURBED for m in members)

    def test_hot_cube_members(self):
        """Test the sweeps start from the seeded hot state."""
        for member in build_preset("theta_sweep") + build_preset("constraint_sweep"):
            assert member.initial.kind is InitialKind.HOT
            assert member.physical.params.alpha == 0.001

    def test_cfl_grid(self):
        """Test coarse meshes meet every time step and the finest mesh only k = 0.01."""
        # Arrange
        coarse = [d for h, d in CFL_MESHES.items() if h != CFL_FINE_MESH]
        expected = {(d, k) for d in coarse for k in CFL_STEPS} | {(CFL_MESHES[CFL_FINE_MESH], 0.01)}

        # Act
        members = build_preset("cfl_robustness")

        # Assert
        grid = {(m.mesh.box.divisions[0], m.integration.k) for m in members}
        assert grid == expected
        assert len(members) == 16


class TestVerificationCube:
    """Test the built-in verification problem."""

    def test_step_count(self):
        """Test t_final covers exactly the requested steps."""
        problem = build_problem(verification_cube(steps=3))
        assert problem.n_steps == 3
        assert problem.mesh.n_nodes == 27

    def test_clamped_and_loaded(self):
        """Test the cube has both boundary parts."""
        mesh = build_problem(verification_cube()).mesh
        assert mesh.dirichlet_mask.sum() == 9
        assert mesh.geometry.neumann_area == pytest.approx(4.0)
