"""
Shared type definitions for the simulator.

Nodal vector fields are plain ``(n_nodes, 3)`` float arrays; the aliases
here document intent at call sites and keep signatures readable.
"""

from typing import Callable, List, NewType, Sequence, Tuple, TypedDict, Union

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]

# (n_nodes, 3) nodal values of a P1 vector field
NodalField = FloatArray
# Vectorised callback: (n, 3) positions -> (n, 3) values
FieldFunction = Callable[[FloatArray], FloatArray]
# Constant vector or position callback
VectorData = Union[Sequence[float], FloatArray, FieldFunction]
# (n, 3) centroids -> (n,) flags
FacePredicate = Callable[[FloatArray], BoolArray]

PresetName = NewType("PresetName", str)


CSV_COLUMNS: Tuple[str, ...] = (
    "t",
    "x_mag_avg",
    "y_mag_avg",
    "z_mag_avg",
    "x_disp_avg",
    "y_disp_avg",
    "z_disp_avg",
    "totalenergy",
    "kinetic",
    "exchange",
    "elastic",
    "zeeman",
    "work",
    "constraint_l1",
    "nodal_max",
    "energy_residual",
)


class TrajectoryRowDict(TypedDict):
    """One CSV row of a run, keyed by ``CSV_COLUMNS``."""

    t: float
    x_mag_avg: float
    y_mag_avg: float
    z_mag_avg: float
    x_disp_avg: float
    y_disp_avg: float
    z_disp_avg: float
    totalenergy: float
    kinetic: float
    exchange: float
    elastic: float
    zeeman: float
    work: float
    constraint_l1: float
    nodal_max: float
    energy_residual: float


class CheckResultDict(TypedDict):
    """Outcome of a single verification check."""

    name: str
    passed: bool
    value: float
    threshold: float


def is_valid_theta(theta: float, unsafe: bool = False) -> bool:
    """Type guard for the implicitness parameter."""
    if unsafe:
        return 0.0 <= theta <= 1.0
    return 0.5 < theta <= 1.0


def safe_cast_theta(theta: float, unsafe: bool = False) -> float:
    """Validate theta, allowing [0, 1/2] only with the unsafe flag."""
    if not is_valid_theta(theta, unsafe):
        allowed = "[0, 1]" if unsafe else "(1/2, 1]"
        raise ValueError(f"Invalid theta {theta}: must lie in {allowed}")
    return float(theta)


def is_valid_preset_name(value: str, known: List[str]) -> bool:
    """Type guard for preset names."""
    return value in known


def safe_cast_preset_name(value: str, known: List[str]) -> PresetName:
    """Safely cast string to PresetName with validation."""
    if not is_valid_preset_name(value, known):
        raise ValueError(f"Unknown preset: {value} (known: {', '.join(known)})")
    return PresetName(value)


def as_vector3(value: Sequence[float], name: str = "vector") -> FloatArray:
    """Convert a 3-sequence into a float array, rejecting other shapes."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have exactly 3 components, got {arr.shape}")
    return arr
