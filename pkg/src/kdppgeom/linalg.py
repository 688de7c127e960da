"""Dense symmetric linear algebra used throughout: eigh, minors, rank, clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .combinatorics import SubsetIndex
from .errors import DomainError, SingularKernelError

MAX_DIM = 64
SYM_TOL = 1e-12
PSD_TOL = 1e-10
PD_TOL = 1e-10


def _square(m, name="matrix") -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DomainError(f"{name} dimension {a.shape[0]} exceeds the cap of {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def is_symmetric(a: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return bool(np.all(np.abs(a - a.T) <= SYM_TOL * scale))


def as_symmetric(m, name="kernel") -> np.ndarray:
    """Validate a symmetric matrix and return an exactly symmetric float copy."""
    a = _square(m, name)
    if not is_symmetric(a):
        raise DomainError(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def as_kernel(m, psd: bool = True, name="kernel") -> np.ndarray:
    a = as_symmetric(m, name)
    if psd and a.size:
        w = np.linalg.eigvalsh(a)
        if w[0] < -PSD_TOL * max(abs(w[0]), abs(w[-1])):
            raise DomainError(f"{name} is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return a


def as_positive_definite(m, name="kernel") -> np.ndarray:
    a = as_symmetric(m, name)
    w = np.linalg.eigvalsh(a)
    if w[-1] <= 0 or w[0] < PD_TOL * w[-1]:
        raise SingularKernelError(
            f"{name} must be positive definite (eigenvalues in [{w[0]:.3g}, {w[-1]:.3g}])"
        )
    return a


@dataclass(frozen=True)
class SpectralForm:
    """Columns of `u` are eigenvectors; `lambdas` descending."""

    u: np.ndarray
    lambdas: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.lambdas) @ self.u.T


def fix_signs(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip columns so the first entry with |x| > tol is positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        nz = np.flatnonzero(np.abs(u[:, j]) > tol)
        if nz.size and u[nz[0], j] < 0:
            u[:, j] = -u[:, j]
    return u


def eig_sym(m) -> SpectralForm:
    a = as_symmetric(m)
    w, v = np.linalg.eigh(a)
    order = np.argsort(-w, kind="stable")
    return SpectralForm(fix_signs(v[:, order]), w[order])


def _det(block: np.ndarray) -> float:
    if block.shape[0] == 0:
        return 1.0
    return float(np.linalg.det(block))


def principal_minor(m, a: SubsetIndex) -> float:
    """det(m_A) for A given as a SubsetIndex; det of the empty matrix is 1."""
    mat = np.asarray(m, dtype=float)
    if a.elements and a.elements[-1] > mat.shape[0]:
        raise DomainError(f"subset {a} out of range for n={mat.shape[0]}")
    idx = a.indices
    return _det(mat[np.ix_(idx, idx)])


def rectangular_minor(m, rows: SubsetIndex, cols: SubsetIndex) -> float:
    mat = np.asarray(m, dtype=float)
    if rows.k != cols.k:
        raise DomainError(f"row/column selections differ in size: {rows.k} vs {cols.k}")
    if (rows.elements and rows.elements[-1] > mat.shape[0]) or (
        cols.elements and cols.elements[-1] > mat.shape[1]
    ):
        raise DomainError("minor selection out of range")
    return _det(mat[np.ix_(rows.indices, cols.indices)])


def batched_principal_minors(m: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """det(m[A, A]) for each row A of a (C, k) index array."""
    if idx.shape[1] == 0:
        return np.ones(idx.shape[0])
    blocks = m[idx[:, :, None], idx[:, None, :]]
    return np.linalg.det(blocks)


@dataclass(frozen=True)
class RankReport:
    singular_values: np.ndarray
    rank: int
    tolerance_used: float
    nullspace_basis: np.ndarray  # rows are orthonormal null vectors

    @property
    def nullity(self) -> int:
        return self.nullspace_basis.shape[0]


def rank_and_nullspace(m, rel_tol: float = 1e-10) -> RankReport:
    """Numerical rank with the pseudoinverse convention tol = rel_tol * s_max * max(shape)."""
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    rows, cols = a.shape
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    tol = rel_tol * smax * max(rows, cols)
    rank = int(np.sum(s > tol))
    return RankReport(s, rank, tol, vt[rank:].copy())


def cluster_eigenvalues(lambdas, cluster_tol: float = 1e-8) -> list[list[int]]:
    """Group consecutive (descending) eigenvalues whose gap is within tolerance.

    Groups hold 0-based positions.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        return []
    thresh = cluster_tol * max(1.0, float(np.max(np.abs(lam))))
    groups = [[0]]
    for i in range(1, lam.size):
        if lam[i - 1] - lam[i] <= thresh:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
