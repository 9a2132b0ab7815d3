"""
Fourth-order tensor algebra and the magnetoelastic constitutive laws.

Tensors are stored densely as ``(3, 3, 3, 3)`` arrays; the symmetry tag is
validated on construction rather than exploited for compressed storage.
All functions are pure.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidInputError
from .types import FloatArray

SYMMETRY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-12

_I3 = np.eye(3)


class Symmetry(Enum):
    """Symmetry classes for 4-tensors."""

    NONE = "none"
    MINOR = "minor"
    FULL = "full"


def is_minor_symmetric(comp: FloatArray, tol: float = SYMMETRY_TOL) -> bool:
    """Check A[i,j,l,m] = A[j,i,l,m] = A[i,j,m,l]."""
    scale = max(1.0, float(np.max(np.abs(comp))))
    return bool(
        np.allclose(comp, comp.transpose(1, 0, 2, 3), rtol=0.0, atol=tol * scale)
        and np.allclose(comp, comp.transpose(0, 1, 3, 2), rtol=0.0, atol=tol * scale)
    )


def is_major_symmetric(comp: FloatArray, tol: float = SYMMETRY_TOL) -> bool:
    """Check A[i,j,l,m] = A[l,m,j,i]."""
    scale = max(1.0, float(np.max(np.abs(comp))))
    return bool(
        np.allclose(
            comp, np.einsum("lmji->ijlm", comp), rtol=0.0, atol=tol * scale
        )
    )


@dataclass(frozen=True, eq=False)
class Tensor4:
    """Dense fourth-order tensor with a validated symmetry tag."""

    comp: FloatArray
    sym: Symmetry = Symmetry.NONE

    def __post_init__(self) -> None:
        comp = np.array(self.comp, dtype=np.float64)
        if comp.shape != (3, 3, 3, 3):
            raise InvalidInputError(
                f"Tensor4 needs 81 components shaped (3,3,3,3), got {comp.shape}",
                field="comp",
            )
        if not np.all(np.isfinite(comp)):
            raise InvalidInputError("Tensor4 components must be finite", field="comp")
        if self.sym in (Symmetry.MINOR, Symmetry.FULL) and not is_minor_symmetric(comp):
            raise InvalidInputError(
                f"Tensor4 tagged {self.sym.value} is not minorly symmetric",
                field="sym",
            )
        if self.sym is Symmetry.FULL and not is_major_symmetric(comp):
            raise InvalidInputError(
                "Tensor4 tagged full is not majorly symmetric", field="sym"
            )
        comp.setflags(write=False)
        object.__setattr__(self, "comp", comp)

    @classmethod
    def zeros(cls, sym: Symmetry = Symmetry.FULL) -> "Tensor4":
        return cls(np.zeros((3, 3, 3, 3)), sym)

    def __getitem__(self, index):
        return self.comp[index]

    def allclose(self, other: "Tensor4", atol: float = 1e-14) -> bool:
        return bool(np.allclose(self.comp, other.comp, rtol=0.0, atol=atol))


def t4_transpose(Z: Tensor4) -> Tensor4:
    """Transpose with result[i,j,l,m] = Z[l,m,j,i].

    Applying it twice gives Z[j,i,m,l], so it is an involution only on
    minorly symmetric tensors.
    """
    return Tensor4(np.einsum("lmji->ijlm", Z.comp), Z.sym)


def t4_contract_mat(A: Tensor4, nu: FloatArray) -> FloatArray:
    """Double contraction (A:nu)[i,j] = sum_{l,m} A[i,j,l,m] nu[l,m]."""
    return np.einsum("ijlm,...lm->...ij", A.comp, np.asarray(nu, dtype=np.float64))


def magnetostrain(Z: Tensor4, m: FloatArray) -> FloatArray:
    """Spontaneous strain Z:(m (x) m); accepts a single vector or a stack."""
    m = np.asarray(m, dtype=np.float64)
    return np.einsum("ijlm,...l,...m->...ij", Z.comp, m, m)


def magnetostrain_bilinear(Z: Tensor4, a: FloatArray, b: FloatArray) -> FloatArray:
    """Z:(a (x) b), symmetric in (a, b) for minorly symmetric Z."""
    return np.einsum(
        "ijlm,...l,...m->...ij",
        Z.comp,
        np.asarray(a, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
    )


def build_isotropic_Z(lambda100: float) -> Tensor4:
    """Isotropic magnetostriction tensor.

    Z:(m (x) m) = (3/2) lambda100 (m (x) m - |m|^2 I/3), trace-free for
    every m.
    """
    sym_id = 0.5 * (
        np.einsum("il,jm->ijlm", _I3, _I3) + np.einsum("im,jl->ijlm", _I3, _I3)
    )
    vol = np.einsum("ij,lm->ijlm", _I3, _I3) / 3.0
    return Tensor4(1.5 * float(lambda100) * (sym_id - vol), Symmetry.MINOR)


def _check_orthonormal(basis: FloatArray) -> None:
    if basis.shape != (3, 3):
        raise InvalidInputError(
            f"Crystal basis must be 3 vectors of length 3, got {basis.shape}",
            field="crystal_basis",
        )
    deviation = float(np.max(np.abs(basis @ basis.T - _I3)))
    if deviation > ORTHONORMAL_TOL:
        raise InvalidInputError(
            f"Crystal basis is not orthonormal (max Gram deviation {deviation:.3e})",
            field="crystal_basis",
        )


def build_cubic_Z(
    lambda100: float,
    lambda111: float,
    crystal_basis: Optional[Sequence[Sequence[float]]] = None,
) -> Tensor4:
    """Cubic magnetostriction tensor in the lab frame.

    For unit m the strain is
    (3/2){lambda100 (m(x)m - I/3)
          + (lambda111 - lambda100) sum_{i != j} (m.e_i)(m.e_j) e_i (x) e_j}
    with ``crystal_basis`` rows e_1, e_2, e_3.

    Raises:
        InvalidInputError: If the basis is not orthonormal to 1e-12.
    """
    basis = _I3 if crystal_basis is None else np.asarray(crystal_basis, dtype=np.float64)
    _check_orthonormal(basis)

    comp = build_isotropic_Z(lambda100).comp.copy()
    cross = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            ei, ej = basis[i], basis[j]
            outer = np.einsum("a,b->ab", ei, ej)
            cross += 0.5 * (
                np.einsum("ab,c,d->abcd", outer, ei, ej)
                + np.einsum("ab,c,d->abcd", outer, ej, ei)
            )
    comp += 1.5 * (float(lambda111) - float(lambda100)) * cross
    return Tensor4(comp, Symmetry.MINOR)


def build_isotropic_C(mu: float, lam: float) -> Tensor4:
    """Isotropic stiffness with C:eps = 2 mu eps + lam tr(eps) I.

    Raises:
        InvalidInputError: Unless mu > 0 and 3 lam + 2 mu > 0.
    """
    if mu <= 0.0 or 3.0 * lam + 2.0 * mu <= 0.0:
        raise InvalidInputError(
            f"Lame parameters mu={mu}, lambda={lam} are not positive definite "
            "(need mu > 0 and 3*lambda + 2*mu > 0)",
            field="lame",
        )
    comp = float(lam) * np.einsum("ij,lm->ijlm", _I3, _I3) + float(mu) * (
        np.einsum("il,jm->ijlm", _I3, _I3) + np.einsum("im,jl->ijlm", _I3, _I3)
    )
    return Tensor4(comp, Symmetry.FULL)


def stress(C: Tensor4, Z: Tensor4, strain: FloatArray, m: FloatArray) -> FloatArray:
    """Hooke's law sigma = C:(strain - Z:(m (x) m))."""
    return t4_contract_mat(C, np.asarray(strain, dtype=np.float64) - magnetostrain(Z, m))


def elastic_field_density(
    C: Tensor4,
    Z: Tensor4,
    kappa: float,
    strain: FloatArray,
    m_proj: FloatArray,
) -> FloatArray:
    """Magnetoelastic field 2 kappa (Z^T:sigma) m_proj."""
    sigma = stress(C, Z, strain, m_proj)
    zt_sigma = t4_contract_mat(t4_transpose(Z), sigma)
    return 2.0 * float(kappa) * np.einsum("...ij,...j->...i", zt_sigma, m_proj)


def frobenius(a: FloatArray, b: FloatArray) -> FloatArray:
    """Frobenius product a:b over the last two axes."""
    return np.einsum("...ij,...ij->...", a, b)
