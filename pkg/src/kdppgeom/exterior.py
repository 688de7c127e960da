"""Compound matrices and inclusion probabilities of the unconditional DPP."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .combinatorics import SubsetIndex, enumerate_subsets, subset_index_array
from .dpp import inclusion_probability, marginal_kernel
from .errors import CapacityError, DomainError, NotProjectionError
from .kdpp import kdpp_distribution, total_variation

MAX_COMPOUND = 1000


@dataclass(frozen=True)
class CompoundMatrix:
    k: int
    base_n: int
    entries: np.ndarray  # entries[A, B] = det(M[A, B]), canonical order on both axes

    @property
    def subsets(self) -> list[SubsetIndex]:
        return enumerate_subsets(self.base_n, self.k)


def compound(m, k: int) -> CompoundMatrix:
    """k-th compound (exterior power) of a square matrix."""
    mat = np.asarray(m, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError("compound needs a square matrix")
    n = mat.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"order k={k} outside 1..{n}")
    size = comb(n, k)
    if size > MAX_COMPOUND:
        raise CapacityError(f"C({n},{k}) = {size} exceeds the compound limit {MAX_COMPOUND}")
    idx = subset_index_array(n, k)
    out = np.empty((size, size))
    for r, rows in enumerate(idx):
        out[r] = np.linalg.det(mat[rows[None, :, None], idx[:, None, :]])
    return CompoundMatrix(k, n, out)


def inclusion_via_exterior(l, s: SubsetIndex) -> float:
    """rho(S) as the diagonal entry of the compound of K at S."""
    K = marginal_kernel(l)
    if s.k == 0:
        return 1.0
    return float(compound(K, s.k).entries[s.rank, s.rank])


def inclusion_routes(l, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All order-k inclusion probabilities via det(K_S) and via the compound diagonal."""
    K = marginal_kernel(l)
    n = K.shape[0]
    direct = np.array([inclusion_probability(l, s) for s in enumerate_subsets(n, k)])
    lifted = np.diag(compound(K, k).entries).copy()
    return direct, lifted


@dataclass(frozen=True)
class PluckerReport:
    p: dict[tuple[int, int], float]
    relation_residual: float
    sqrt_residual: float
    passed: bool


def plucker_coordinates(v) -> dict[tuple[int, int], float]:
    V = np.asarray(v, dtype=float)
    return {
        (i + 1, j + 1): float(np.linalg.det(V[[i, j], :]))
        for i in range(V.shape[0])
        for j in range(i + 1, V.shape[0])
    }


def plucker_check(v, tol: float = 1e-10) -> PluckerReport:
    """Plucker relation for the 2-plane spanned by the columns of a 4x2 frame.

    Also checks the inclusion-probability form: some sign pattern makes
    sqrt(r12 r34) +- sqrt(r13 r24) +- sqrt(r14 r23) vanish, with r_ij = p_ij^2.
    """
    V = np.asarray(v, dtype=float)
    if V.shape != (4, 2):
        raise DomainError(f"expected a 4x2 frame, got shape {V.shape}")
    if np.max(np.abs(V.T @ V - np.eye(2))) > 1e-10:
        raise DomainError("frame columns are not orthonormal")
    p = plucker_coordinates(V)
    rel = abs(p[1, 2] * p[3, 4] - p[1, 3] * p[2, 4] + p[1, 4] * p[2, 3])
    rho = {key: val * val for key, val in p.items()}
    a = np.sqrt(rho[1, 2] * rho[3, 4])
    b = np.sqrt(rho[1, 3] * rho[2, 4])
    c = np.sqrt(rho[1, 4] * rho[2, 3])
    sq = min(abs(a + sb * b + sc * c) for sb in (1, -1) for sc in (1, -1))
    return PluckerReport(p, float(rel), float(sq), bool(rel <= tol and sq <= tol))


def projection_frame(k_matrix, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal 4x2 frame V with K = V V^T, or NotProjectionError."""
    K = np.asarray(k_matrix, dtype=float)
    if K.shape != (4, 4):
        raise NotProjectionError(f"Plucker check needs n = 4, got {K.shape[0]}")
    if np.max(np.abs(K - K.T)) > tol or np.max(np.abs(K @ K - K)) > tol:
        raise NotProjectionError("kernel is not an orthogonal projection")
    w, u = np.linalg.eigh(0.5 * (K + K.T))
    ones = w > 0.5
    if int(ones.sum()) != 2:
        raise NotProjectionError(f"projection has rank {int(ones.sum())}, expected 2")
    return u[:, ones]


@dataclass(frozen=True)
class ContrastReport:
    tv: float
    inclusion_deviation: float


def scale_invariance_contrast(l, c: float, k: int) -> ContrastReport:
    """Scaling L leaves the k-DPP fixed but moves order-k inclusion probabilities."""
    if not c > 0:
        raise DomainError("scale must be positive")
    L = np.asarray(l, dtype=float)
    tv = total_variation(kdpp_distribution(L, k), kdpp_distribution(c * L, k))
    a, _ = inclusion_routes(L, k)
    b, _ = inclusion_routes(c * L, k)
    return ContrastReport(tv, float(np.max(np.abs(a - b))))
