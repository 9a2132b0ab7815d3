"""
Exception hierarchy for the magnetoelastic simulator.

Every error raised by library code derives from ``SimulationError`` and
carries an ``ErrorCode`` so callers (the CLI, sweep runners, tests) can
categorise failures without string matching.
"""

from enum import Enum
from typing import Any, Dict, List, Optional


class ErrorCode(Enum):
    """Standardized error codes for categorization."""

    # Input and model errors
    INVALID_INPUT = "INVALID_INPUT"
    CONSTRAINT_VIOLATION = "CONSTRAINT_VIOLATION"

    # Linear algebra
    SOLVER_NON_CONVERGENCE = "SOLVER_NON_CONVERGENCE"

    # Time loop
    STEP_FAILED = "STEP_FAILED"

    # I/O
    MESH_PARSE_ERROR = "MESH_PARSE_ERROR"
    OUTPUT_ERROR = "OUTPUT_ERROR"

    # Configuration
    CONFIGURATION_ERROR = "CONFIGURATION_ERROR"


class SimulationError(Exception):
    """Base exception for all simulator errors."""

    def __init__(
        self,
        message: str,
        error_code: ErrorCode,
        step: Optional[int] = None,
        cause: Optional[Exception] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.step = step
        self.cause = cause
        self.context = context or {}

    def __str__(self) -> str:
        parts = [f"[{self.error_code.value}]"]
        if self.step is not None:
            parts.append(f"Step {self.step}")
        parts.append(self.message)

        if self.cause:
            parts.append(f"Caused by: {self.cause}")

        return " - ".join(parts)


class InvalidInputError(SimulationError):
    """Invalid tensors, meshes, parameters or fields."""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        merged = {"field": field}
        merged.update(context or {})
        super().__init__(message, ErrorCode.INVALID_INPUT, context=merged)
        self.field = field


class ConstraintViolationError(SimulationError):
    """A nodal magnetisation fell below unit length."""

    def __init__(self, node: int, norm: float):
        super().__init__(
            f"Node {node} has |m| = {norm:.17g} < 1; "
            "nodal projection requires |m(z)| >= 1",
            ErrorCode.CONSTRAINT_VIOLATION,
            context={"node": node, "norm": norm},
        )
        self.node = node
        self.norm = norm


class SolverConvergenceError(SimulationError):
    """Krylov solver did not reach the requested tolerance."""

    def __init__(
        self,
        solver: str,
        residual: float,
        iterations: int,
        residual_history: Optional[List[float]] = None,
        cause: Optional[Exception] = None,
    ):
        super().__init__(
            f"{solver} did not converge after {iterations} iterations "
            f"(relative residual {residual:.3e})",
            ErrorCode.SOLVER_NON_CONVERGENCE,
            cause=cause,
            context={
                "solver": solver,
                "residual": residual,
                "iterations": iterations,
            },
        )
        self.solver = solver
        self.residual = residual
        self.iterations = iterations
        self.residual_history = list(residual_history or [])


class StepError(SimulationError):
    """Failure inside a time step; wraps the original error."""

    def __init__(self, step: int, stage: str, cause: Exception):
        super().__init__(
            f"Time step failed during {stage}",
            ErrorCode.STEP_FAILED,
            step=step,
            cause=cause,
            context={"stage": stage},
        )
        self.stage = stage


class MeshParseError(SimulationError):
    """Malformed or unsupported Gmsh input."""

    def __init__(self, path: str, section: str, line: int, reason: str):
        super().__init__(
            f"{path}: section {section}, line {line}: {reason}",
            ErrorCode.MESH_PARSE_ERROR,
            context={"path": path, "section": section, "line": line},
        )
        self.path = path
        self.section = section
        self.line = line


class OutputError(SimulationError):
    """Failure writing result files."""

    def __init__(self, path: str, cause: Optional[Exception] = None):
        super().__init__(
            f"Cannot write output {path}",
            ErrorCode.OUTPUT_ERROR,
            cause=cause,
            context={"path": path},
        )
        self.path = path


class ConfigurationError(SimulationError):
    """Errors in run configuration or presets."""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        cause: Optional[Exception] = None,
    ):
        super().__init__(
            message,
            ErrorCode.CONFIGURATION_ERROR,
            cause=cause,
            context={"config_key": config_key},
        )
        self.config_key = config_key
