"""
End-to-end checks of the discrete theory on the shipped presets.

Marked ``slow``; deselect with ``-m "not slow"``.
"""

import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sp

from src.config.presets import CFL_MESHES, CFL_STEPS, build_preset, preset_names, verification_cube
from src.config.problem import build_problem
from src.core.diagnostics import energy
from src.core.integrator import init_state
from src.core.mesh import box_mesh, plane_predicate
from src.core.runner import run
from src.core.scaling import PhysicalParams, compute_scaling
from src.core.solvers import cg_solve, gmres_solve, nullspace_reduce, tangent_basis
from src.core.state import Assemblies
from src.core.tensors import magnetostrain_bilinear, t4_contract_mat, t4_transpose
from src.core.verification import (
    check_norm_equivalence,
    check_tensor_identity,
    random_minor_symmetric,
    verify_run,
)
from src.output.writers import read_csv, write_outputs

pytestmark = pytest.mark.slow


def _member(preset, predicate, overrides=()):
    return next(m for m in build_preset(preset, overrides) if predicate(m))


class TestDiscreteIdentities:
    """Identities that hold to solver precision."""

    def test_energy_law_on_bar(self):
        """Test the per-step energy balance and tangency on the field-driven bar."""
        # Arrange
        config = build_preset("applied_field")[1]

        # Act
        result = run(build_problem(config), max_steps=50)

        # Assert
        assert len(result.reports) == 50
        for report in result.reports:
            assert report.law.relative_residual <= 1e-8, report.step
            assert report.tangency <= 1e-10

    def test_nodal_constraint_identity(self):
        """Test |m|^2 - 1 - s stays at round-off for 100 hot-magnet steps."""
        config = _member("constraint_sweep", lambda m: m.integration.k == 1e-3)
        result = run(build_problem(config), max_steps=100)
        assert result.steps == 100
        assert max(r.constraint.identity_defect for r in result.reports) <= 1e-12
        assert max(r.tangency for r in result.reports) <= 1e-10

    def test_constraint_violation_is_linear_in_k(self):
        """Test the L1 violation at fixed final time scales like k."""
        # Arrange
        members = build_preset("constraint_sweep", ["integration.t_final=0.4"])

        # Act
        violations = []
        for config in members:
            result = run(build_problem(config), keep_reports=False)
            violations.append(result.rows[-1]["constraint_l1"])
        steps = [m.integration.k for m in members]

        # Assert
        slope, _ = np.polyfit(np.log(steps), np.log(violations), 1)
        assert 0.8 <= slope <= 1.2

    def test_norm_equivalence_on_random_box(self):
        """Test ||phi|| <= ||phi||_h <= sqrt(5) ||phi|| for 1000 random fields."""
        rng = np.random.default_rng(42)
        lengths = rng.uniform(0.5, 3.0, 3)
        mesh = box_mesh(lengths, [3, 2, 4], plane_predicate(0, 0.0))
        result = check_norm_equivalence(mesh, samples=1000, seed=1)
        assert result.passed, result.value

    def test_tensor_identity(self):
        """Test the triple identity on 1000 random quadruples and against index sums."""
        assert check_tensor_identity(samples=1000).passed

        rng = np.random.default_rng(3)
        for _ in range(20):
            Z = random_minor_symmetric(rng)
            s = rng.standard_normal((3, 3))
            s = 0.5 * (s + s.T)
            m, w = rng.standard_normal(3), rng.standard_normal(3)
            oracle = 0.0
            for i, j, p, q in itertools.product(range(3), repeat=4):
                oracle += s[i, j] * Z.comp[i, j, p, q] * m[p] * w[q]
            zt_s = t4_contract_mat(t4_transpose(Z), s)
            for value in ((zt_s @ w) @ m, (zt_s @ m) @ w, np.sum(s * magnetostrain_bilinear(Z, m, w))):
                assert value == pytest.approx(oracle, rel=1e-12, abs=1e-12)

    def test_exchange_length(self):
        """Test the default material has an exchange length near 3 nm."""
        assert compute_scaling(PhysicalParams()).ell_ex == pytest.approx(3e-9, rel=0.1)


class TestDissipation:
    """Energy decay of the scheme."""

    def test_theta_orders_final_energy(self):
        """Test more implicit exchange dissipates more energy."""
        finals = []
        for theta in (0.6, 0.8, 1.0):
            config = _member(
                "theta_sweep",
                lambda m: m.integration.theta == theta,
                ["physical.params.lambda100=0", "integration.k=0.01"],
            )
            result = run(build_problem(config), max_steps=200, keep_reports=False)
            finals.append(result.rows[-1]["totalenergy"])
        assert finals[0] > finals[1] > finals[2]

    def test_zero_coupling_exchange_is_monotone(self):
        """Test exchange energy never grows without coupling and loads."""
        config = verification_cube(lambda100=0.0, steps=40).with_overrides(
            ["dimensionless.f=[0, 0, 0]", "dimensionless.g=[0, 0, 0]", "dimensionless.h_ext=[0, 0, 0]"]
        )
        rows = run(build_problem(config), keep_reports=False).rows
        exchange = [r["exchange"] for r in rows]
        assert all(b <= a + 1e-10 for a, b in zip(exchange, exchange[1:]))

    def test_zero_coupling_csv_total_energy_is_monotone(self, tmp_path):
        """Test the totalenergy column read back from the CSV never grows without coupling."""
        # Arrange
        config = verification_cube(lambda100=0.0, steps=40).with_overrides(
            ["dimensionless.f=[0, 0, 0]", "dimensionless.g=[0, 0, 0]", "dimensionless.h_ext=[0, 0, 0]"]
        )
        rows = run(build_problem(config), keep_reports=False).rows

        # Act
        path = write_outputs(rows, tmp_path, config.name)
        totals = [r["totalenergy"] for r in read_csv(path)]

        # Assert
        assert len(totals) == 41
        assert all(b <= a + 1e-10 for a, b in zip(totals, totals[1:]))
        assert totals[-1] < totals[0]

    def test_initial_sinusoidal_exchange(self):
        """Test the sinusoidal state on the fine cube has exchange energy near 64.8."""
        config = _member("cfl_robustness", lambda m: m.mesh.box.divisions[0] == CFL_MESHES["0.45"])
        problem = build_problem(config)
        asm = Assemblies.build(problem.mesh, problem.model)
        state = init_state(problem.mesh, problem.m0)
        assert energy(state, asm).exchange == pytest.approx(64.8, rel=0.05)

    @pytest.mark.parametrize(
        "h_label,k", list(itertools.product(["1.59", "1.09", "0.84"], CFL_STEPS[:4]))
    )
    def test_stability_sweep(self, h_label, k):
        """Test energies stay finite and bounded on every mesh and step size."""
        config = _member(
            "cfl_robustness",
            lambda m: m.mesh.box.divisions[0] == CFL_MESHES[h_label] and m.integration.k == k,
        )
        rows = run(build_problem(config), max_steps=50, keep_reports=False).rows
        totals = np.array([r["totalenergy"] for r in rows])
        assert np.all(np.isfinite(totals))
        assert np.all(totals <= 1.1 * abs(totals[0]))


class TestMagnetostriction:
    """Qualitative response of the clamped bar."""

    def test_field_rotates_magnetisation(self):
        """Test stronger fields along y give larger final <m_y>."""
        members = build_preset("applied_field", ["mesh.box.divisions=[14, 4, 4]"])[1:]
        final_my = [run(build_problem(c), keep_reports=False).rows[-1]["y_mag_avg"] for c in members]
        assert all(a < b for a, b in zip(final_my, final_my[1:])), final_my


class TestSolverOracles:
    """Krylov solvers and the tangent reduction against dense linear algebra."""

    def test_against_dense_solves(self):
        """Test 50 random 30 x 30 systems."""
        rng = np.random.default_rng(2024)
        for _ in range(50):
            a = rng.standard_normal((30, 30))
            b = rng.standard_normal(30)
            spd = a.T @ a + np.eye(30)
            x, _ = cg_solve(sp.csr_matrix(spd), b, tol=1e-13)
            np.testing.assert_allclose(x, np.linalg.solve(spd, b), rtol=1e-8, atol=1e-8)
            general = a + math.sqrt(30.0) * np.eye(30)
            x, _ = gmres_solve(sp.csr_matrix(general), b, tol=1e-13)
            np.testing.assert_allclose(x, np.linalg.solve(general, b), rtol=1e-8, atol=1e-8)

    def test_nullspace_reduce_against_dense(self):
        """Test T^T A T on random node-block matrices."""
        rng = np.random.default_rng(7)
        for _ in range(10):
            A = rng.standard_normal((30, 30))
            rhs = rng.standard_normal(30)
            basis = tangent_basis(rng.standard_normal((10, 3)))
            T = basis.matrix.toarray()
            A_red, rhs_red = nullspace_reduce(sp.csr_matrix(A), rhs, basis)
            np.testing.assert_allclose(A_red.toarray(), T.T @ A @ T, atol=1e-12)
            np.testing.assert_allclose(rhs_red, T.T @ rhs, atol=1e-12)


class TestPresets:
    """Every shipped preset satisfies the per-step invariants."""

    @pytest.mark.parametrize("preset", preset_names())
    def test_first_steps_pass_verification(self, preset):
        """Test each member keeps the energy law, constraint identity, tangency and D >= 0 for 5 steps."""
        failures = {}
        for member in build_preset(preset):
            checks = verify_run(build_problem(member), steps=5)
            failed = [c.name for c in checks if not c.passed]
            if failed:
                failures[member.name] = failed
        assert failures == {}
