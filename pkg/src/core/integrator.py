"""
Decoupled linear time stepping for magnetisation and displacement.

One step consists of
    1. a tangent-plane solve for the magnetisation velocity v, reduced to
       the nodewise tangent planes of m and solved with GMRES/ILU;
    2. the explicit update m <- m + k v (no renormalisation);
    3. an implicit elastodynamics step driven by the magnetostrain of the
       projected new magnetisation, solved with Jacobi-PCG.
"""

import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import structlog

from .assembly import (
    assemble_llg_rhs,
    assemble_magnetostrain_load,
    assemble_skew,
    dirichlet_dofs,
    nodal_interpolate,
    nodal_project,
)
from .diagnostics import (
    ConstraintMetrics,
    EnergyBreakdown,
    EnergyLawReport,
    HatEnergyLawReport,
    constraint_metrics,
    energy,
    energy_law_residual,
    hat_energy_law_residual,
)
from .exceptions import InvalidInputError, SimulationError, StepError
from .mesh import Mesh
from .solvers import (
    SolveInfo,
    TangentBasis,
    cg_solve,
    gmres_solve,
    ilu_preconditioner,
    nullspace_reduce,
    tangent_basis,
)
from .state import Assemblies, State, StepParams
from .types import FloatArray, NodalField, VectorData

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class StepReport:
    """Everything produced by one step besides the new state."""

    step: int
    t: float
    v: NodalField
    llg_iterations: int
    elastic_iterations: int
    preconditioner: str
    wall_time: float
    energies: EnergyBreakdown
    law: EnergyLawReport
    constraint: ConstraintMetrics
    tangency: float
    hat_law: Optional[HatEnergyLawReport] = None


def init_state(
    mesh: Mesh,
    m0: VectorData,
    u0: VectorData = (0.0, 0.0, 0.0),
    udot0: VectorData = (0.0, 0.0, 0.0),
) -> State:
    """
    Interpolate and normalise the initial data.

    m0 is interpolated at the nodes and normalised; u0 is interpolated and
    set to zero on Dirichlet nodes.

    Raises:
        InvalidInputError: If m0 vanishes at a node.
    """
    m = nodal_interpolate(m0, mesh)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        node = int(np.flatnonzero(norms == 0.0)[0])
        raise InvalidInputError(f"Initial magnetisation vanishes at node {node}", field="m0")
    u = nodal_interpolate(u0, mesh)
    u[mesh.dirichlet_mask] = 0.0
    return State(
        step=0,
        t=0.0,
        m=m / norms[:, None],
        u=u,
        udot=nodal_interpolate(udot0, mesh),
        v_prev=np.zeros((mesh.n_nodes, 3)),
        s=np.zeros(mesh.n_nodes),
    )


def llg_system(
    state: State, asm: Assemblies, params: StepParams
) -> Tuple[sp.csr_matrix, FloatArray, TangentBasis]:
    """Reduced matrix, reduced right-hand side and tangent basis of the LLG step."""
    mesh, model = asm.mesh, asm.model
    lumped = sp.diags(np.repeat(asm.lumped_weights, 3))
    A = model.alpha * lumped + params.theta * params.k * asm.laplacian + assemble_skew(mesh, state.m)
    b = assemble_llg_rhs(
        mesh,
        state.m,
        state.u,
        model.C,
        model.Z,
        model.kappa,
        laplacian=asm.laplacian,
        zeeman_load=asm.zeeman_load,
    )
    basis = tangent_basis(state.m)
    A_red, b_red = nullspace_reduce(A, b, basis)
    return A_red, b_red, basis


def llg_substep(
    state: State,
    asm: Assemblies,
    params: StepParams,
    preconditioner: Optional[spla.LinearOperator] = None,
) -> Tuple[NodalField, SolveInfo]:
    """Solve for the tangential velocity v, warm-started from the previous one."""
    A_red, b_red, basis = llg_system(state, asm, params)
    opts = params.solver
    x, info = gmres_solve(
        A_red,
        b_red,
        x0=basis.restrict(state.v_prev),
        tol=opts.gmres_tol,
        restart=opts.gmres_restart,
        maxit=opts.gmres_maxit,
        preconditioner=preconditioner,
    )
    return basis.expand(x), info


def magnetisation_update(state: State, v: NodalField, k: float) -> Tuple[NodalField, FloatArray]:
    """m + k v and the updated accumulator s + k^2 |v|^2."""
    v = np.asarray(v, dtype=np.float64)
    return state.m + k * v, state.s + k**2 * np.einsum("zi,zi->z", v, v)


def elastic_system(asm: Assemblies, k: float) -> sp.csr_matrix:
    """(M + k^2 K_C) restricted to free dofs."""
    A = (asm.consistent_mass + k**2 * asm.elastic_stiffness).tocsr()
    return A[asm.free][:, asm.free].tocsr()


def elastic_substep(
    state: State,
    m_new: NodalField,
    asm: Assemblies,
    params: StepParams,
    system: Optional[sp.csr_matrix] = None,
) -> Tuple[NodalField, NodalField, SolveInfo]:
    """
    Implicit displacement update.

    Solves (M + k^2 K_C) w = k^2 (F_m + F - K_C u) + k M udot for the
    increment w = u_new - u on free dofs; udot_new = w / k.
    """
    k = params.k
    model = asm.model
    u, udot = np.asarray(state.u).ravel(), np.asarray(state.udot).ravel()
    load = assemble_magnetostrain_load(asm.mesh, model.C, model.Z, nodal_project(m_new))
    rhs = k**2 * (load + asm.loads - asm.elastic_stiffness @ u) + k * (asm.consistent_mass @ udot)

    w = np.zeros_like(u)
    info = SolveInfo()
    if asm.free.size:
        E = elastic_system(asm, k) if system is None else system
        w_free, info = cg_solve(
            E,
            rhs[asm.free],
            x0=k * udot[asm.free],
            tol=params.solver.cg_tol,
            maxit=params.solver.cg_maxit,
        )
        w[asm.free] = w_free
    w[dirichlet_dofs(asm.dirichlet_mask)] = 0.0
    shape = state.u.shape
    return (u + w).reshape(shape), (w / k).reshape(shape), info


class Integrator:
    """Runs steps on fixed assemblies, caching what does not change."""

    def __init__(self, asm: Assemblies, params: StepParams, hat_energy: bool = False):
        self.asm = asm
        self.params = params
        self.hat_energy = hat_energy
        self._elastic = elastic_system(asm, params.k) if asm.free.size else None
        self._frozen_ilu: Optional[spla.LinearOperator] = None

    def _llg(self, state: State) -> Tuple[NodalField, SolveInfo]:
        if not self.params.solver.freeze_ilu:
            return llg_substep(state, self.asm, self.params)
        if self._frozen_ilu is None:
            A_red, _, _ = llg_system(state, self.asm, self.params)
            self._frozen_ilu, _ = ilu_preconditioner(A_red)
        return llg_substep(state, self.asm, self.params, self._frozen_ilu)

    def step(self, state: State) -> Tuple[State, StepReport]:
        """
        Advance one step.

        Raises:
            StepError: Wrapping any failure, with the step index attached.
        """
        index = state.step + 1
        k = self.params.k
        started = time.perf_counter()

        stage = "llg"
        try:
            v, llg_info = self._llg(state)
            stage = "update"
            m_new, s_new = magnetisation_update(state, v, k)
            stage = "elastic"
            u_new, udot_new, el_info = elastic_substep(
                state, m_new, self.asm, self.params, self._elastic
            )
        except (SimulationError, ValueError, ArithmeticError, RuntimeError) as e:
            raise StepError(index, stage, e)

        new = state.advance(
            step=index, t=state.t + k, m=m_new, u=u_new, udot=udot_new, v_prev=v, s=s_new
        )
        wall = time.perf_counter() - started

        law = energy_law_residual(state, new, v, self.asm, self.params)
        if not np.isfinite(law.residual):
            raise StepError(index, "diagnostics", ArithmeticError("non-finite energy"))
        energies = energy(new, self.asm)
        hat = (
            hat_energy_law_residual(state, new, v, self.asm, self.params)
            if self.hat_energy
            else None
        )
        report = StepReport(
            step=index,
            t=new.t,
            v=v,
            llg_iterations=llg_info.iterations,
            elastic_iterations=el_info.iterations,
            preconditioner=llg_info.preconditioner,
            wall_time=wall,
            energies=energies,
            law=law,
            constraint=constraint_metrics(new, self.asm.mesh),
            tangency=float(np.max(np.abs(np.einsum("zi,zi->z", state.m, v)))),
            hat_law=hat,
        )
        logger.debug(
            "step_complete",
            step=index,
            t=new.t,
            llg_iterations=llg_info.iterations,
            elastic_iterations=el_info.iterations,
            energy_residual=law.residual,
        )
        return new, report
