"""
YAML run configuration.

A run file has the blocks ``mesh``, exactly one of ``physical`` /
``dimensionless``, ``initial``, ``integration``, ``solver``, ``output``
and ``diagnostics``. Physical quantities are SI (fields in A/m, tractions
in Pa); dimensionless blocks are in exchange-length units.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.exceptions import ConfigurationError
from ..core.mesh import Region
from ..core.scaling import LameAssignment, PhysicalParams
from ..core.solvers import SolverOptions
from ..core.types import safe_cast_theta


def _three(values: List[float], name: str) -> List[float]:
    if len(values) != 3:
        raise ValueError(f"{name} must have 3 components, got {len(values)}")
    return values


class PlaneSpec(BaseModel):
    """Axis-aligned plane x[axis] = value selecting boundary faces."""

    model_config = ConfigDict(extra="forbid")

    axis: int = Field(..., ge=0, le=2, description="0, 1, 2 for x, y, z")
    value: float = Field(..., description="Plane position")


class BoxMeshConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lengths: List[float] = Field(..., description="Box edge lengths [ell_ex]")
    divisions: List[int] = Field(..., description="Hexahedra per axis")
    origin: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    dirichlet: List[PlaneSpec] = Field(..., min_length=1, description="Clamped planes")
    neumann: List[PlaneSpec] = Field(default_factory=list, description="Traction planes")

    @field_validator("lengths", "origin")
    @classmethod
    def _three_floats(cls, v: List[float]) -> List[float]:
        return _three(v, "box vector")

    @field_validator("divisions")
    @classmethod
    def _positive_divisions(cls, v: List[int]) -> List[int]:
        _three(v, "divisions")
        if any(d < 1 for d in v):
            raise ValueError("divisions must be >= 1")
        return v


class RegionName(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    OTHER = "other"

    def to_region(self) -> Region:
        return Region[self.name]


class MshMeshConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str = Field(..., description="MSH 2.2 ASCII file")
    tags: Dict[int, RegionName] = Field(
        default_factory=lambda: {1: RegionName.DIRICHLET, 2: RegionName.NEUMANN},
        description="Physical tag of boundary triangles -> region",
    )


class MeshConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    box: Optional[BoxMeshConfig] = None
    msh: Optional[MshMeshConfig] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "MeshConfig":
        if (self.box is None) == (self.msh is None):
            raise ValueError("mesh needs exactly one of 'box' or 'msh'")
        return self


class PhysicalConfig(BaseModel):
    """SI parameters plus applied data."""

    model_config = ConfigDict(extra="forbid")

    params: PhysicalParams = Field(default_factory=PhysicalParams)
    applied_field: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], description="[A/m]")
    traction: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], description="[Pa]")
    gravity: bool = False
    lame_assignment: LameAssignment = LameAssignment.TABLE_LABELS
    crystal_basis: Optional[List[List[float]]] = None
    kappa: Optional[float] = Field(None, gt=0, description="Override of rho ell^2 gamma^2 mu0")

    @field_validator("applied_field", "traction")
    @classmethod
    def _vec(cls, v: List[float]) -> List[float]:
        return _three(v, "vector")


class DimensionlessConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(..., gt=0)
    kappa: float = Field(1.0, gt=0)
    mu: float = Field(..., gt=0, description="Shear modulus")
    lam: float = Field(..., description="First Lame parameter")
    lambda100: float = 0.0
    lambda111: Optional[float] = None
    crystal_basis: Optional[List[List[float]]] = None
    f: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    g: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    h_ext: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])

    @field_validator("f", "g", "h_ext")
    @classmethod
    def _vec(cls, v: List[float]) -> List[float]:
        return _three(v, "vector")


class InitialKind(str, Enum):
    UNIFORM = "uniform"
    PERTURBED = "perturbed"
    HOT = "hot"
    SINUSOIDAL = "sinusoidal"
    CALLBACK = "callback"


class InitialConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: InitialKind = InitialKind.UNIFORM
    direction: List[float] = Field(
        default_factory=lambda: [1.0, 0.0, 0.0], description="Uniform/perturbed m0 (normalised)"
    )
    seed: int = Field(0, ge=0, description="PRNG seed of the hot state")
    callback: Optional[str] = Field(None, description="'module:function' returning m0(x)")
    displacement: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    velocity: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])

    @field_validator("direction", "displacement", "velocity")
    @classmethod
    def _vec(cls, v: List[float]) -> List[float]:
        return _three(v, "vector")

    @model_validator(mode="after")
    def _callback_named(self) -> "InitialConfig":
        if self.kind is InitialKind.CALLBACK and not self.callback:
            raise ValueError("initial.kind 'callback' needs initial.callback")
        return self


class IntegrationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theta: float = Field(0.50000005, description="Implicitness of the exchange term")
    k: float = Field(..., gt=0, description="Dimensionless time step")
    t_final: float = Field(..., gt=0, description="Dimensionless final time")
    unsafe_theta: bool = Field(False, description="Permit theta in [0, 1/2]")

    @model_validator(mode="after")
    def _check(self) -> "IntegrationConfig":
        safe_cast_theta(self.theta, self.unsafe_theta)
        if self.k > self.t_final:
            raise ValueError(f"k={self.k} exceeds t_final={self.t_final}")
        return self


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gmres_tol: float = Field(1e-10, gt=0)
    gmres_restart: int = Field(50, ge=1)
    gmres_maxit: int = Field(5000, ge=1)
    cg_tol: float = Field(1e-10, gt=0)
    cg_maxit: int = Field(10000, ge=1)
    freeze_ilu: bool = False

    def to_options(self) -> SolverOptions:
        return SolverOptions(**self.model_dump())


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "output"
    snapshot_stride: int = Field(0, ge=0, description="VTK every n steps; 0 disables")
    csv: bool = True


class DiagnosticsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hat_energy: bool = Field(False, description="Also report the projected-energy balance")


class RunConfig(BaseModel):
    """Complete description of one simulation run."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, description="Run name, used for output files")
    mesh: MeshConfig
    physical: Optional[PhysicalConfig] = None
    dimensionless: Optional[DimensionlessConfig] = None
    initial: InitialConfig = Field(default_factory=InitialConfig)
    integration: IntegrationConfig
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)

    @model_validator(mode="after")
    def _one_parameter_block(self) -> "RunConfig":
        if (self.physical is None) == (self.dimensionless is None):
            raise ValueError("exactly one of 'physical' or 'dimensionless' is required")
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any], source: str = "<dict>") -> "RunConfig":
        """Validate a YAML-shaped mapping.

        Raises:
            ConfigurationError: Listing each invalid field path.
        """
        if not isinstance(data, dict):
            raise ConfigurationError(f"{source} must contain a mapping", config_key=source)
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            details = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise ConfigurationError(f"Invalid run config {source}: {details}", config_key=source)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        """Load and validate a YAML run file.

        Raises:
            ConfigurationError: Missing file, invalid YAML or invalid fields;
                the message names the file.
        """
        path = Path(path)
        try:
            with open(path) as f:
                data = yaml.safe_load(f)
        except FileNotFoundError as e:
            raise ConfigurationError(f"Run config not found: {path}", config_key=str(path), cause=e)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {path}", config_key=str(path), cause=e)
        except OSError as e:
            raise ConfigurationError(f"Cannot read {path}", config_key=str(path), cause=e)
        return cls.from_dict(data, str(path))

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)

    def to_yaml(self, path: Optional[Union[str, Path]] = None) -> str:
        text = yaml.safe_dump(self.to_dict(), sort_keys=False)
        if path is not None:
            Path(path).write_text(text)
        return text

    def with_overrides(self, overrides: List[str]) -> "RunConfig":
        """Apply dotted ``key=value`` overrides (values parsed as YAML)."""
        data = self.to_dict()
        for item in overrides:
            apply_override(data, item)
        return RunConfig.from_dict(data, "overrides")


def apply_override(data: Dict[str, Any], item: str) -> None:
    """Set ``a.b.c=value`` in a nested dict, creating intermediate mappings.

    Raises:
        ConfigurationError: If the item is not of the form key=value.
    """
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigurationError(f"Override must be key=value, got {item!r}", config_key=item)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Cannot parse value of override {item!r}", config_key=key, cause=e)

    parts = key.strip().split(".")
    node = data
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value
