"""
Energies, the per-step discrete energy balance and constraint metrics.

Every integral uses the quadrature of ``assembly`` so that the balance
closes to solver precision: exchange through the assembled Laplacian,
Zeeman through the assembled load, elastic terms with element-constant
strain and centroid magnetostrain.
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .assembly import (
    c_inner,
    constraint_violation,
    element_magnetostrain,
    element_strain,
    lumped_inner,
    nodal_project,
)
from .mesh import Mesh
from .state import Assemblies, State, StepParams
from .types import FloatArray, NodalField


class EnergyBreakdown(BaseModel):
    """Dimensionless energy contributions of one state."""

    model_config = ConfigDict(frozen=True)

    exchange: float = Field(..., description="1/2 ||grad m||^2")
    zeeman: float = Field(..., description="-<h_ext, m>")
    elastic: float = Field(..., description="kappa/2 ||eps(u) - eps_m(m)||_C^2")
    work: float = Field(..., description="-kappa (<f, u> + <g, u>_N)")
    kinetic: float = Field(..., description="kappa/2 ||d_t u||^2")

    @property
    def total_potential(self) -> float:
        return self.exchange + self.zeeman + self.elastic + self.work

    @property
    def total(self) -> float:
        return self.total_potential + self.kinetic


class EnergyLawReport(BaseModel):
    """Terms of the per-step balance lhs + alpha_term + D + E = 0."""

    model_config = ConfigDict(frozen=True)

    lhs: float = Field(..., description="Change of total plus kinetic energy")
    alpha_term: float = Field(..., description="alpha k ||v||_h^2")
    d1: float = Field(..., description="k^2 (theta - 1/2) ||grad v||^2")
    d2: float = Field(..., description="kappa/2 ||d_t u+ - d_t u||^2")
    d3: float = Field(..., description="kappa/2 ||X+ - X||_C^2")
    e1: float
    e2: float
    e3: float
    e4: float
    energy_scale: float = Field(..., description="max(1, |E_total|) over both states")

    @property
    def d_total(self) -> float:
        return self.d1 + self.d2 + self.d3

    @property
    def e_total(self) -> float:
        return self.e1 + self.e2 + self.e3 + self.e4

    @property
    def residual(self) -> float:
        return self.lhs + self.alpha_term + self.d_total + self.e_total

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / self.energy_scale

    def holds(self, tol: float = 1e-8) -> bool:
        return self.relative_residual <= tol


class HatEnergyLawReport(BaseModel):
    """Balance for the energy with the projected magnetisation in the magnetostrain."""

    model_config = ConfigDict(frozen=True)

    lhs: float
    alpha_term: float
    d1: float
    d2: float
    d3: float = Field(..., description="kappa/2 ||Y+ - Y||_C^2, Y = eps(u) - eps_m(Pi m)")
    e1: float
    e2: float
    e3: float
    e4: float
    e5: float
    energy_scale: float

    @property
    def d_total(self) -> float:
        return self.d1 + self.d2 + self.d3

    @property
    def e_total(self) -> float:
        return self.e1 + self.e2 + self.e3 + self.e4 + self.e5

    @property
    def residual(self) -> float:
        return self.lhs + self.alpha_term + self.d_total + self.e_total

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / self.energy_scale


class ConstraintMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    l1_violation: float = Field(..., description="sum_z w_z | |m(z)|^2 - 1 |")
    nodal_max: float = Field(..., description="max_z |m(z)|")
    identity_defect: float = Field(..., description="max_z | |m(z)|^2 - 1 - s(z) |")


def _flat(field: NodalField) -> FloatArray:
    return np.asarray(field, dtype=np.float64).ravel()


def _misfit(asm: Assemblies, u: NodalField, m: NodalField) -> FloatArray:
    return element_strain(asm.mesh, u) - element_magnetostrain(asm.mesh, asm.model.Z, m)


def _energy(state: State, asm: Assemblies, m_elastic: NodalField) -> EnergyBreakdown:
    kappa = asm.model.kappa
    m, u, udot = _flat(state.m), _flat(state.u), _flat(state.udot)
    X = _misfit(asm, state.u, m_elastic)
    return EnergyBreakdown(
        exchange=0.5 * float(m @ (asm.laplacian @ m)),
        zeeman=-float(asm.zeeman_load @ m),
        elastic=0.5 * kappa * c_inner(asm.mesh, asm.model.C, X, X),
        work=-kappa * float(asm.loads @ u),
        kinetic=0.5 * kappa * float(udot @ (asm.consistent_mass @ udot)),
    )


def energy(state: State, asm: Assemblies) -> EnergyBreakdown:
    """Total free energy plus kinetic energy of ``state``."""
    return _energy(state, asm, state.m)


def hat_energy(state: State, asm: Assemblies) -> EnergyBreakdown:
    """Energy with Pi_h m in place of m inside the magnetostrain."""
    return _energy(state, asm, nodal_project(state.m))


def energy_law_residual(
    before: State,
    after: State,
    v: NodalField,
    asm: Assemblies,
    params: StepParams,
) -> EnergyLawReport:
    """Evaluate every term of the discrete energy balance of one step."""
    mesh, C, Z = asm.mesh, asm.model.C, asm.model.Z
    kappa, alpha, k, theta = asm.model.kappa, asm.model.alpha, params.k, params.theta
    e_before, e_after = energy(before, asm), energy(after, asm)

    vf = _flat(v)
    du = _flat(after.udot) - _flat(before.udot)
    X, X_next = _misfit(asm, before.u, before.m), _misfit(asm, after.u, after.m)
    pm, pm_next = nodal_project(before.m), nodal_project(after.m)
    Y = _misfit(asm, before.u, pm)
    em_mv = element_magnetostrain(mesh, Z, before.m, v)
    em_pv = element_magnetostrain(mesh, Z, pm, v)
    em_vv = element_magnetostrain(mesh, Z, v)
    projection_defect = element_magnetostrain(mesh, Z, after.m) - element_magnetostrain(
        mesh, Z, pm_next
    )
    strain_increment = element_strain(mesh, after.u) - element_strain(mesh, before.u)

    return EnergyLawReport(
        lhs=e_after.total - e_before.total,
        alpha_term=alpha * k * lumped_inner(mesh, v, v),
        d1=k**2 * (theta - 0.5) * float(vf @ (asm.laplacian @ vf)),
        d2=0.5 * kappa * float(du @ (asm.consistent_mass @ du)),
        d3=0.5 * kappa * c_inner(mesh, C, X_next - X, X_next - X),
        e1=kappa * k**2 * c_inner(mesh, C, X_next, em_vv),
        e2=2.0 * kappa * k * c_inner(mesh, C, X_next - X, em_mv),
        e3=2.0 * kappa * k * (c_inner(mesh, C, X, em_mv) - c_inner(mesh, C, Y, em_pv)),
        e4=kappa * c_inner(mesh, C, projection_defect, strain_increment),
        energy_scale=max(1.0, abs(e_before.total), abs(e_after.total)),
    )


def hat_energy_law_residual(
    before: State,
    after: State,
    v: NodalField,
    asm: Assemblies,
    params: StepParams,
) -> HatEnergyLawReport:
    """Balance of the projected-magnetostrain energy across one step."""
    mesh, C, Z = asm.mesh, asm.model.C, asm.model.Z
    kappa, alpha, k, theta = asm.model.kappa, asm.model.alpha, params.k, params.theta
    e_before, e_after = hat_energy(before, asm), hat_energy(after, asm)

    vf = _flat(v)
    du = _flat(after.udot) - _flat(before.udot)
    pm, pm_next = nodal_project(before.m), nodal_project(after.m)
    Y, Y_next = _misfit(asm, before.u, pm), _misfit(asm, after.u, pm_next)
    ep, ep_next = element_magnetostrain(mesh, Z, pm), element_magnetostrain(mesh, Z, pm_next)

    return HatEnergyLawReport(
        lhs=e_after.total - e_before.total,
        alpha_term=alpha * k * lumped_inner(mesh, v, v),
        d1=k**2 * (theta - 0.5) * float(vf @ (asm.laplacian @ vf)),
        d2=0.5 * kappa * float(du @ (asm.consistent_mass @ du)),
        d3=0.5 * kappa * c_inner(mesh, C, Y_next - Y, Y_next - Y),
        e1=kappa * c_inner(mesh, C, Y_next - Y, ep_next - ep),
        e2=kappa * c_inner(mesh, C, Y, ep_next - element_magnetostrain(mesh, Z, after.m)),
        e3=kappa * c_inner(mesh, C, Y, element_magnetostrain(mesh, Z, before.m) - ep),
        e4=2.0 * kappa * k * c_inner(
            mesh, C, Y, element_magnetostrain(mesh, Z, np.asarray(before.m) - pm, v)
        ),
        e5=kappa * k**2 * c_inner(mesh, C, Y, element_magnetostrain(mesh, Z, v)),
        energy_scale=max(1.0, abs(e_before.total), abs(e_after.total)),
    )


def constraint_metrics(state: State, mesh: Mesh) -> ConstraintMetrics:
    sq = np.einsum("zi,zi->z", state.m, state.m)
    return ConstraintMetrics(
        l1_violation=constraint_violation(mesh, state.m),
        nodal_max=float(np.sqrt(np.max(sq))),
        identity_defect=float(np.max(np.abs(sq - 1.0 - state.s))),
    )


def averages(state: State, mesh: Mesh) -> Tuple[float, float, float, float, float, float]:
    """Mean of m and u over the domain (exact for P1 fields)."""
    w = mesh.geometry.lumped_weights
    vol = float(np.sum(w))
    mean_m = w @ np.asarray(state.m) / vol
    mean_u = w @ np.asarray(state.u) / vol
    return (
        float(mean_m[0]),
        float(mean_m[1]),
        float(mean_m[2]),
        float(mean_u[0]),
        float(mean_u[1]),
        float(mean_u[2]),
    )
