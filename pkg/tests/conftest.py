"""
Shared fixtures: small meshes and dimensionless models.
"""

import numpy as np
import pytest
import structlog

from src.core.mesh import Mesh, box_mesh, plane_predicate
from src.core.scaling import ScaledModel
from src.core.state import Assemblies, StepParams
from src.core.tensors import build_isotropic_Z
from src.observability.logging import configure_default_logging


@pytest.fixture(autouse=True)
def default_logging():
    """Restore INFO-level library logging after tests that reconfigure it."""
    yield
    structlog.reset_defaults()
    configure_default_logging()


@pytest.fixture
def reference_tet() -> Mesh:
    nodes = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return Mesh(nodes, np.array([[0, 1, 2, 3]]))


@pytest.fixture
def unit_cube() -> Mesh:
    """Unit cube, 2 hexahedra per edge, clamped at x=0 and loaded at x=1."""
    return box_mesh(
        [1.0, 1.0, 1.0], [2, 2, 2], plane_predicate(0, 0.0), plane_predicate(0, 1.0)
    )


@pytest.fixture
def coupled_model() -> ScaledModel:
    return ScaledModel.dimensionless(
        alpha=0.1,
        mu=2.0,
        lam=1.0,
        Z=build_isotropic_Z(1.0),
        f=(0.0, 0.0, -0.01),
        g=(0.0, 0.02, 0.0),
        h_ext=(0.0, 0.3, 0.0),
    )


@pytest.fixture
def uncoupled_model() -> ScaledModel:
    return ScaledModel.dimensionless(alpha=0.1, mu=2.0, lam=1.0, Z=build_isotropic_Z(0.0))


@pytest.fixture
def coupled_assemblies(unit_cube, coupled_model) -> Assemblies:
    return Assemblies.build(unit_cube, coupled_model)


@pytest.fixture
def step_params() -> StepParams:
    return StepParams(theta=0.7, k=0.05)


@pytest.fixture
def random_unit_field():
    """Factory for seeded random unit nodal fields."""

    def make(n_nodes: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((n_nodes, 3))
        return m / np.linalg.norm(m, axis=1)[:, None]

    return make
