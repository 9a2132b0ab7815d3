"""
Nondimensionalisation of the physical magnetoelastic model.

Lengths are measured in exchange lengths, time in units of 1/(gamma mu0 Ms),
fields in units of Ms and stresses in units of kappa mu0 Ms^2, where
kappa = rho ell_ex^2 gamma^2 mu0 is the magnetoelastic coupling parameter.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import InvalidInputError
from .tensors import Tensor4, build_cubic_Z, build_isotropic_C, build_isotropic_Z
from .types import FloatArray, VectorData, as_vector3


class LameAssignment(Enum):
    """How the two tabulated Lame moduli map onto (mu, lambda)."""

    # mu = mu_lame, lambda = lambda_lame, as the table labels them
    TABLE_LABELS = "table_labels"
    # mu = lambda_lame, lambda = mu_lame; matches the published dimensionless pair
    SWAPPED = "swapped"


class PhysicalParams(BaseModel):
    """SI material parameters (defaults: FeCoSiB)."""

    model_config = ConfigDict(frozen=True)

    A: float = Field(1.5e-11, gt=0, description="Exchange constant [J/m]")
    alpha: float = Field(0.005, gt=0, description="Gilbert damping [-]")
    gamma: float = Field(1.761e11, gt=0, description="Gyromagnetic ratio [rad/(s T)]")
    mu0: float = Field(1.25663706e-6, gt=0, description="Vacuum permeability [N/A^2]")
    Ms: float = Field(1.5e6, gt=0, description="Saturation magnetisation [A/m]")
    lambda100: float = Field(30e-6, description="Saturation magnetostrain [-]")
    lambda111: Optional[float] = Field(
        None, description="Cubic magnetostrain constant [-]; None means isotropic"
    )
    rho: float = Field(7900.0, gt=0, description="Mass density [kg/m^3]")
    mu_lame: float = Field(172e9, gt=0, description="First tabulated Lame modulus [Pa]")
    lambda_lame: float = Field(54e9, description="Second tabulated Lame modulus [Pa]")
    g_grav: float = Field(9.81, ge=0, description="Gravitational acceleration [m/s^2]")


@dataclass(frozen=True)
class Scaling:
    """Unit system produced by the nondimensionalisation."""

    ell_ex: float
    kappa: float
    time_scale: float
    field_unit: float
    stress_unit: float
    force_density_unit: float

    def stress_to_dimensionless(self, value: FloatArray) -> FloatArray:
        return np.asarray(value, dtype=np.float64) / self.stress_unit

    def stress_to_physical(self, value: FloatArray) -> FloatArray:
        return np.asarray(value, dtype=np.float64) * self.stress_unit

    def force_density_to_dimensionless(self, value: FloatArray) -> FloatArray:
        return np.asarray(value, dtype=np.float64) / self.force_density_unit

    def force_density_to_physical(self, value: FloatArray) -> FloatArray:
        return np.asarray(value, dtype=np.float64) * self.force_density_unit

    def field_to_dimensionless(self, value: FloatArray) -> FloatArray:
        return np.asarray(value, dtype=np.float64) / self.field_unit

    def seconds(self, t: float) -> float:
        return t * self.time_scale

    def dimensionless_time(self, seconds: float) -> float:
        return seconds / self.time_scale


@dataclass(frozen=True)
class ScaledModel:
    """Dimensionless core fields derived from physical parameters."""

    scaling: Scaling
    alpha: float
    mu: float
    lam: float
    C: Tensor4
    Z: Tensor4
    f: VectorData
    g: VectorData
    h_ext: VectorData

    @classmethod
    def dimensionless(
        cls,
        alpha: float,
        mu: float,
        lam: float,
        Z: Tensor4,
        kappa: float = 1.0,
        f: VectorData = (0.0, 0.0, 0.0),
        g: VectorData = (0.0, 0.0, 0.0),
        h_ext: VectorData = (0.0, 0.0, 0.0),
    ) -> "ScaledModel":
        """Model given directly in dimensionless units (unit length and time)."""
        if alpha <= 0.0:
            raise InvalidInputError(f"alpha must be positive, got {alpha}", field="alpha")
        if kappa <= 0.0:
            raise InvalidInputError(f"kappa must be positive, got {kappa}", field="kappa")
        unit = Scaling(
            ell_ex=1.0,
            kappa=float(kappa),
            time_scale=1.0,
            field_unit=1.0,
            stress_unit=1.0,
            force_density_unit=1.0,
        )
        return cls(unit, float(alpha), float(mu), float(lam), build_isotropic_C(mu, lam), Z, f, g, h_ext)

    @property
    def kappa(self) -> float:
        return self.scaling.kappa

    @property
    def ell_ex(self) -> float:
        return self.scaling.ell_ex

    @property
    def time_scale(self) -> float:
        return self.scaling.time_scale


def exchange_length(p: PhysicalParams) -> float:
    return math.sqrt(2.0 * p.A / (p.mu0 * p.Ms**2))


def compute_scaling(p: PhysicalParams, kappa: Optional[float] = None) -> Scaling:
    """Derive the unit system; ``kappa`` overrides rho ell_ex^2 gamma^2 mu0."""
    ell = exchange_length(p)
    k = p.rho * ell**2 * p.gamma**2 * p.mu0 if kappa is None else float(kappa)
    if k <= 0.0:
        raise InvalidInputError(f"kappa must be positive, got {k}", field="kappa")
    stress_unit = k * p.mu0 * p.Ms**2
    return Scaling(
        ell_ex=ell,
        kappa=k,
        time_scale=1.0 / (p.gamma * p.mu0 * p.Ms),
        field_unit=p.Ms,
        stress_unit=stress_unit,
        force_density_unit=stress_unit / ell,
    )


def _vector_input(value: Sequence[float], name: str) -> FloatArray:
    try:
        return as_vector3(value, name)
    except ValueError as e:
        raise InvalidInputError(str(e), field=name)


def nondimensionalise(
    p: PhysicalParams,
    applied_field: Sequence[float] = (0.0, 0.0, 0.0),
    traction: Sequence[float] = (0.0, 0.0, 0.0),
    gravity: bool = False,
    lame_assignment: LameAssignment = LameAssignment.TABLE_LABELS,
    crystal_basis: Optional[Sequence[Sequence[float]]] = None,
    kappa: Optional[float] = None,
) -> ScaledModel:
    """Convert SI parameters into the dimensionless model.

    Args:
        p: Physical parameters.
        applied_field: External field H_ext [A/m].
        traction: Surface force G [N/m^2] on the Neumann boundary.
        gravity: Add the body force (0, 0, -rho g) [N/m^3].
        lame_assignment: Mapping of the tabulated moduli onto (mu, lambda).
        crystal_basis: Rows of the crystal frame for cubic magnetostriction.
        kappa: Optional override of the coupling parameter.

    Returns:
        ScaledModel with kappa, ell_ex, time scale, C, Z, f, g and h_ext.
    """
    scaling = compute_scaling(p, kappa)

    field_si = _vector_input(applied_field, "applied_field")
    traction_si = _vector_input(traction, "traction")

    if lame_assignment is LameAssignment.TABLE_LABELS:
        mu_si, lam_si = p.mu_lame, p.lambda_lame
    else:
        mu_si, lam_si = p.lambda_lame, p.mu_lame
    mu = float(scaling.stress_to_dimensionless(mu_si))
    lam = float(scaling.stress_to_dimensionless(lam_si))

    if p.lambda111 is None:
        Z = build_isotropic_Z(p.lambda100)
    else:
        Z = build_cubic_Z(p.lambda100, p.lambda111, crystal_basis)

    body = np.array([0.0, 0.0, -p.rho * p.g_grav]) if gravity else np.zeros(3)

    return ScaledModel(
        scaling=scaling,
        alpha=p.alpha,
        mu=mu,
        lam=lam,
        C=build_isotropic_C(mu, lam),
        Z=Z,
        f=scaling.force_density_to_dimensionless(body),
        g=scaling.stress_to_dimensionless(traction_si),
        h_ext=scaling.field_to_dimensionless(field_si),
    )
