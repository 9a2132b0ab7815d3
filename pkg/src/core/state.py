"""
Time-loop state, step parameters and the state-independent assemblies.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .assembly import (
    assemble_consistent_mass,
    assemble_elastic_stiffness,
    assemble_loads,
    assemble_vector_laplacian,
    assemble_zeeman_load,
    free_dofs,
)
from .exceptions import InvalidInputError
from .mesh import Mesh
from .scaling import ScaledModel
from .solvers import SolverOptions
from .types import BoolArray, FloatArray, IndexArray, NodalField, safe_cast_theta


@dataclass(frozen=True)
class StepParams:
    """Implicitness, step size and solver options."""

    theta: float
    k: float
    solver: SolverOptions = field(default_factory=SolverOptions)
    unsafe_theta: bool = False

    def __post_init__(self) -> None:
        try:
            safe_cast_theta(self.theta, self.unsafe_theta)
        except ValueError as e:
            raise InvalidInputError(str(e), field="theta")
        if not self.k > 0.0:
            raise InvalidInputError(f"Time step k must be positive, got {self.k}", field="k")


@dataclass(frozen=True, eq=False)
class State:
    """Discrete state after ``step`` steps.

    ``s`` accumulates k^2 |v(z)|^2 over all steps so far, so that
    |m(z)|^2 = 1 + s(z) holds nodewise.
    """

    step: int
    t: float
    m: NodalField
    u: NodalField
    udot: NodalField
    v_prev: NodalField
    s: FloatArray

    def advance(self, **changes) -> "State":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Assemblies:
    """Matrices and load vectors that do not change along a run."""

    mesh: Mesh
    model: ScaledModel
    dirichlet_mask: BoolArray
    free: IndexArray
    laplacian: sp.csr_matrix
    consistent_mass: sp.csr_matrix
    elastic_stiffness: sp.csr_matrix
    zeeman_load: FloatArray
    loads: FloatArray

    @property
    def lumped_weights(self) -> FloatArray:
        return self.mesh.geometry.lumped_weights

    @classmethod
    def build(cls, mesh: Mesh, model: ScaledModel, require_dirichlet: bool = True) -> "Assemblies":
        """Assemble once per run.

        Raises:
            InvalidInputError: If the mesh has no Dirichlet face and
                ``require_dirichlet`` is set.
        """
        if require_dirichlet:
            mesh.require_dirichlet()
        mask = np.array(mesh.dirichlet_mask)
        return cls(
            mesh=mesh,
            model=model,
            dirichlet_mask=mask,
            free=free_dofs(mask),
            laplacian=assemble_vector_laplacian(mesh),
            consistent_mass=assemble_consistent_mass(mesh),
            elastic_stiffness=assemble_elastic_stiffness(mesh, model.C),
            zeeman_load=assemble_zeeman_load(mesh, model.h_ext),
            loads=assemble_loads(mesh, model.f, model.g),
        )

