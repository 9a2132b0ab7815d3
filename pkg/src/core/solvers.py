"""
Krylov solvers, preconditioners and the nodewise tangent-plane reduction.

Both solvers wrap ``scipy.sparse.linalg`` and add the contract the time
loop relies on: an explicit warm-start check, a true-residual check after
the solve, and a ``SolverConvergenceError`` carrying the residual history
when the tolerance is not met.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import structlog

from .exceptions import InvalidInputError, SolverConvergenceError
from .types import FloatArray, NodalField

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_RESTART = 50


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and limits for the linear solves of one run."""

    gmres_tol: float = DEFAULT_TOL
    gmres_restart: int = DEFAULT_RESTART
    gmres_maxit: int = 5000
    cg_tol: float = DEFAULT_TOL
    cg_maxit: int = 10000
    freeze_ilu: bool = False


@dataclass
class SolveInfo:
    """Diagnostics from a single solve."""

    iterations: int = 0
    residual: float = 0.0
    preconditioner: str = "none"
    residual_history: List[float] = field(default_factory=list)


def _relative_residual(A: sp.spmatrix, b: FloatArray, x: FloatArray, bnorm: float) -> float:
    return float(np.linalg.norm(b - A @ x) / bnorm)


def jacobi_preconditioner(A: sp.spmatrix) -> spla.LinearOperator:
    """Diagonal scaling.

    Raises:
        InvalidInputError: If a diagonal entry is zero.
    """
    diag = np.asarray(A.diagonal(), dtype=np.float64)
    if np.any(diag == 0.0):
        raise InvalidInputError(
            f"Jacobi preconditioner needs a nonzero diagonal (row {int(np.argmin(np.abs(diag)))})",
            field="A",
        )
    inv = 1.0 / diag
    return spla.LinearOperator(A.shape, matvec=lambda x: inv * x, dtype=np.float64)


def ilu_preconditioner(A: sp.spmatrix) -> Tuple[spla.LinearOperator, str]:
    """Zero-fill incomplete LU, falling back to Jacobi on a zero pivot."""
    try:
        factor = spla.spilu(sp.csc_matrix(A), drop_tol=0.0, fill_factor=1.0)
    except RuntimeError as e:
        logger.warning("ilu_failed_fallback_jacobi", error=str(e), size=A.shape[0])
        return jacobi_preconditioner(A), "jacobi"
    return spla.LinearOperator(A.shape, matvec=factor.solve, dtype=np.float64), "ilu"


def cg_solve(
    A: sp.spmatrix,
    b: FloatArray,
    x0: Optional[FloatArray] = None,
    tol: float = DEFAULT_TOL,
    maxit: int = 10000,
) -> Tuple[FloatArray, SolveInfo]:
    """
    Jacobi-preconditioned conjugate gradients for SPD ``A``.

    Returns:
        Solution and ``SolveInfo`` (iterations, final relative residual).

    Raises:
        SolverConvergenceError: If ``maxit`` iterations do not reach ``tol``.
    """
    b = np.asarray(b, dtype=np.float64)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), SolveInfo(preconditioner="jacobi")
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    res = _relative_residual(A, b, x, bnorm)
    if res <= tol:
        return x, SolveInfo(residual=res, preconditioner="jacobi", residual_history=[res])

    history: List[float] = []

    def record(xk: FloatArray) -> None:
        history.append(_relative_residual(A, b, xk, bnorm))

    x, info = spla.cg(
        A, b, x0=x, rtol=tol, atol=0.0, maxiter=maxit, M=jacobi_preconditioner(A),
        callback=record,
    )
    res = _relative_residual(A, b, x, bnorm)
    if info != 0:
        raise SolverConvergenceError("cg", res, len(history), history)
    return x, SolveInfo(len(history), res, "jacobi", history)


def gmres_solve(
    A: sp.spmatrix,
    b: FloatArray,
    x0: Optional[FloatArray] = None,
    tol: float = DEFAULT_TOL,
    restart: int = DEFAULT_RESTART,
    maxit: int = 5000,
    preconditioner: Optional[spla.LinearOperator] = None,
) -> Tuple[FloatArray, SolveInfo]:
    """
    Restarted GMRES with an ILU preconditioner.

    ``maxit`` counts inner iterations. A warm start already within ``tol``
    returns immediately with zero iterations. If the true residual after
    the solve misses ``tol`` the solve is resumed once from its own result.

    Raises:
        SolverConvergenceError: With the residual history, on failure.
    """
    b = np.asarray(b, dtype=np.float64)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), SolveInfo()
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    res = _relative_residual(A, b, x, bnorm)
    if res <= tol:
        return x, SolveInfo(residual=res, residual_history=[res])

    if preconditioner is None:
        M, kind = ilu_preconditioner(A)
    else:
        M, kind = preconditioner, "supplied"

    history: List[float] = []
    cycles = max(1, math.ceil(maxit / restart))
    for _attempt in range(2):
        x, info = spla.gmres(
            A, b, x0=x, rtol=tol, atol=0.0, restart=restart, maxiter=cycles, M=M,
            callback=history.append, callback_type="pr_norm",
        )
        res = _relative_residual(A, b, x, bnorm)
        if res <= tol:
            return x, SolveInfo(len(history), res, kind, history)
        if info < 0:
            break
    raise SolverConvergenceError("gmres", res, len(history), history)


# ---------------------------------------------------------------------------
# Null-space reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TangentBasis:
    """Orthonormal pairs (t1(z), t2(z)) spanning the plane normal to m(z)."""

    t1: FloatArray
    t2: FloatArray

    @property
    def n_nodes(self) -> int:
        return int(self.t1.shape[0])

    @property
    def matrix(self) -> sp.csr_matrix:
        """Block-diagonal T of shape (3N, 2N); column 2z+j is t_j(z)."""
        n = self.n_nodes
        blocks = np.stack([self.t1, self.t2], axis=2)
        return sp.bsr_matrix(
            (blocks, np.arange(n), np.arange(n + 1)), shape=(3 * n, 2 * n)
        ).tocsr()

    def expand(self, x_red: FloatArray) -> NodalField:
        c = np.asarray(x_red, dtype=np.float64).reshape(-1, 2)
        return c[:, :1] * self.t1 + c[:, 1:] * self.t2

    def restrict(self, v: NodalField) -> FloatArray:
        v = np.asarray(v, dtype=np.float64).reshape(-1, 3)
        return np.column_stack(
            [np.einsum("zi,zi->z", v, self.t1), np.einsum("zi,zi->z", v, self.t2)]
        ).ravel()


def tangent_basis(m: NodalField) -> TangentBasis:
    """
    Deterministic tangent pairs: e is the axis least aligned with m(z)
    (lowest index on ties), t1 = normalise(e - (e.m^)m^), t2 = m^ x t1.

    Raises:
        InvalidInputError: If some node vector is zero.
    """
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        node = int(np.flatnonzero(norms == 0.0)[0])
        raise InvalidInputError(f"Zero magnetisation at node {node}", field="m")
    mhat = m / norms[:, None]

    axis = np.argmin(np.abs(mhat), axis=1)
    e = np.zeros_like(mhat)
    e[np.arange(len(axis)), axis] = 1.0
    t1 = e - np.einsum("zi,zi->z", e, mhat)[:, None] * mhat
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(mhat, t1)
    return TangentBasis(t1, t2)


def nullspace_reduce(
    A: sp.spmatrix, rhs: FloatArray, basis: TangentBasis
) -> Tuple[sp.csr_matrix, FloatArray]:
    """Return (T^T A T, T^T rhs)."""
    T = basis.matrix
    return (T.T @ A @ T).tocsr(), T.T @ np.asarray(rhs, dtype=np.float64)
