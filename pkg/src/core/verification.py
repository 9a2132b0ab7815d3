"""
Invariant checks on a small coupled problem.

``verify_run`` steps a problem and checks the discrete energy balance,
the nodal constraint identity, tangency and D >= 0 on every step;
``check_norm_equivalence`` and ``check_tensor_identity`` sample random
inputs. ``run_verification`` bundles all of them.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from .assembly import assemble_consistent_mass, l2_norm, lumped_norm
from .integrator import Integrator, init_state
from .mesh import Mesh
from .runner import Problem
from .state import Assemblies
from .tensors import Symmetry, Tensor4, magnetostrain_bilinear, t4_contract_mat, t4_transpose
from .types import CheckResultDict

ENERGY_LAW_TOL = 1e-8
CONSTRAINT_TOL = 1e-12
TANGENCY_TOL = 1e-10
DISSIPATION_TOL = -1e-14
NORM_SLACK = 1e-12
TENSOR_TOL = 1e-12


class CheckResult(BaseModel):
    name: str = Field(..., description="Check identifier")
    passed: bool
    value: float = Field(..., description="Worst observed value")
    threshold: float

    def as_dict(self) -> CheckResultDict:
        return CheckResultDict(
            name=self.name, passed=self.passed, value=self.value, threshold=self.threshold
        )


class VerificationReport(BaseModel):
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


def _upper(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name=name, passed=bool(value <= threshold), value=value, threshold=threshold)


def verify_run(problem: Problem, steps: Optional[int] = None) -> List[CheckResult]:
    """Step ``problem`` and check per-step invariants."""
    asm = Assemblies.build(problem.mesh, problem.model)
    integrator = Integrator(asm, problem.params)
    state = init_state(problem.mesh, problem.m0, problem.u0, problem.udot0)

    worst_law = worst_defect = worst_tangency = 0.0
    min_dissipation = np.inf
    for _ in range(problem.n_steps if steps is None else steps):
        state, report = integrator.step(state)
        worst_law = max(worst_law, report.law.relative_residual)
        worst_defect = max(worst_defect, report.constraint.identity_defect)
        worst_tangency = max(worst_tangency, report.tangency)
        min_dissipation = min(min_dissipation, report.law.d_total)

    return [
        _upper("energy_law_residual", worst_law, ENERGY_LAW_TOL),
        _upper("constraint_identity", worst_defect, CONSTRAINT_TOL),
        _upper("tangency", worst_tangency, TANGENCY_TOL),
        CheckResult(
            name="dissipation_nonnegative",
            passed=bool(min_dissipation >= DISSIPATION_TOL),
            value=float(min_dissipation),
            threshold=DISSIPATION_TOL,
        ),
    ]


def check_norm_equivalence(mesh: Mesh, samples: int = 100, seed: int = 0) -> CheckResult:
    """||phi|| <= ||phi||_h <= sqrt(5) ||phi|| on random P1 fields.

    The value reported is the largest violation (<= 0 means satisfied).
    """
    rng = np.random.default_rng(seed)
    mass = assemble_consistent_mass(mesh)
    worst = -np.inf
    for _ in range(samples):
        phi = rng.standard_normal((mesh.n_nodes, 3))
        l2, lumped = l2_norm(mesh, phi, mass), lumped_norm(mesh, phi)
        scale = max(lumped, 1.0)
        worst = max(worst, (l2 - lumped) / scale, (lumped - np.sqrt(5.0) * l2) / scale)
    return _upper("norm_equivalence", float(worst), NORM_SLACK)


def random_minor_symmetric(rng: np.random.Generator) -> Tensor4:
    a = rng.standard_normal((3, 3, 3, 3))
    a = 0.5 * (a + a.transpose(1, 0, 2, 3))
    a = 0.5 * (a + a.transpose(0, 1, 3, 2))
    return Tensor4(a, Symmetry.MINOR)


def check_tensor_identity(samples: int = 1000, seed: int = 0) -> CheckResult:
    """[(Z^T:s) w].m = [(Z^T:s) m].w = s:[Z:(m (x) w)] on random inputs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        Z = random_minor_symmetric(rng)
        s = rng.standard_normal((3, 3))
        s = 0.5 * (s + s.T)
        m, w = rng.standard_normal(3), rng.standard_normal(3)
        zt_s = t4_contract_mat(t4_transpose(Z), s)
        a = float((zt_s @ w) @ m)
        b = float((zt_s @ m) @ w)
        c = float(np.sum(s * magnetostrain_bilinear(Z, m, w)))
        scale = max(abs(a), abs(b), abs(c), 1.0)
        worst = max(worst, abs(a - b) / scale, abs(a - c) / scale)
    return _upper("tensor_identity", worst, TENSOR_TOL)


def run_verification(problem: Problem, steps: Optional[int] = None) -> VerificationReport:
    checks = verify_run(problem, steps)
    checks.append(check_norm_equivalence(problem.mesh))
    checks.append(check_tensor_identity())
    return VerificationReport(checks=checks)
