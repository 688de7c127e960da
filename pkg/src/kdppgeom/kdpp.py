"""k-DPPs: exact tables, the Cauchy-Binet expansion, and the diagonal exponential family.

For the diagonal orientation L(theta) = diag(exp(theta)) the k-DPP is an
exponential family with sufficient statistic T(A) = indicator vector of A and
log-partition psi_k(theta) = log e_k(exp(theta)). Everything below that takes
`theta` works in that model.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .combinatorics import SubsetIndex, enumerate_subsets, esp, esp_batch, subset_index_array
from .errors import CapacityError, DegenerateStratumError, DomainError
from .linalg import as_kernel, batched_principal_minors, rank_and_nullspace

MAX_STRATUM = 1_000_000
DEGENERATE_REL = 1e-14


@dataclass(frozen=True)
class KDppDistribution:
    kernel: np.ndarray
    k: int
    z_k: float
    subsets: list[SubsetIndex]
    probs: np.ndarray

    def prob(self, a: SubsetIndex) -> float:
        if a.k != self.k or a.n != self.kernel.shape[0]:
            return 0.0
        return float(self.probs[a.rank])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {a.elements: float(p) for a, p in zip(self.subsets, self.probs)}


def _check_stratum(n: int, k: int) -> None:
    if k < 0 or k > n:
        raise DomainError(f"cardinality k={k} outside 0..{n}")
    if comb(n, k) > MAX_STRATUM:
        raise CapacityError(f"C({n},{k}) subsets exceed the table limit {MAX_STRATUM}")


def stratum_minors(L: np.ndarray, k: int) -> np.ndarray:
    n = L.shape[0]
    _check_stratum(n, k)
    return batched_principal_minors(L, subset_index_array(n, k))


def kdpp_distribution(l, k: int) -> KDppDistribution:
    L = as_kernel(l)
    n = L.shape[0]
    minors = stratum_minors(L, k)
    z = float(minors.sum())
    scale = float(np.max(np.abs(minors))) if minors.size else 0.0
    if z <= n * k * DEGENERATE_REL * scale or z <= 0.0:
        raise DegenerateStratumError(
            f"Z_k(L) = {z:.3g} is numerically zero for k={k}; the kernel has no mass on this stratum"
        )
    probs = np.clip(minors, 0.0, None) / z
    probs /= probs.sum()
    return KDppDistribution(L, k, z, enumerate_subsets(n, k), probs)


def total_variation(p: KDppDistribution, q: KDppDistribution) -> float:
    if p.k != q.k or p.probs.shape != q.probs.shape:
        raise DomainError("distributions live on different strata")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def _check_orthogonal(u: np.ndarray, tol: float = 1e-10) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DomainError("eigenvector matrix must be square")
    if np.max(np.abs(u.T @ u - np.eye(u.shape[0]))) > tol:
        raise DomainError("eigenvector matrix is not orthogonal")


def _check_natural_k(n: int, k: int) -> None:
    if not 1 <= k <= n - 1:
        raise DomainError(f"the diagonal k-DPP family needs 1 <= k <= n-1, got k={k}, n={n}")


def _shifted(theta) -> tuple[np.ndarray, float]:
    th = np.asarray(theta, dtype=float).ravel()
    if not np.all(np.isfinite(th)):
        raise DomainError("theta must be finite")
    top = float(th.max())
    return np.exp(th - top), top


def kdpp_cauchy_binet_table(u, theta, k: int) -> np.ndarray:
    """Probabilities of every A in X_k via sum_B det(U_{A,B})^2 exp(theta_B) / e_k."""
    U = np.asarray(u, dtype=float)
    _check_orthogonal(U)
    n = U.shape[0]
    _check_natural_k(n, k)
    _check_stratum(n, k)
    s, _ = _shifted(theta)
    idx = subset_index_array(n, k)
    weights = np.prod(s[idx], axis=1)  # exp(sum_B theta - k * max theta)
    sq = np.empty((idx.shape[0], idx.shape[0]))
    for r, rows in enumerate(idx):
        blocks = U[rows[None, :, None], idx[:, None, :]]
        sq[r] = np.linalg.det(blocks) ** 2
    return sq @ weights / esp(s, k).e(k)


def kdpp_cauchy_binet(u, theta, k: int, a: SubsetIndex) -> float:
    U = np.asarray(u, dtype=float)
    _check_orthogonal(U)
    n = U.shape[0]
    _check_natural_k(n, k)
    if a.k != k or a.n != n:
        raise DomainError(f"subset {a} is not in X_{k} over n={n}")
    s, _ = _shifted(theta)
    idx = subset_index_array(n, k)
    rows = np.array(a.indices)
    blocks = U[rows[None, :, None], idx[:, None, :]]
    sq = np.linalg.det(blocks) ** 2
    return float(sq @ np.prod(s[idx], axis=1) / esp(s, k).e(k))


def diagonal_kernel(theta) -> np.ndarray:
    return np.diag(np.exp(np.asarray(theta, dtype=float)))


def to_minimal(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float).ravel()
    return th[:-1] - th[-1]


def from_minimal(theta_tilde, pin: float = 0.0) -> np.ndarray:
    tt = np.asarray(theta_tilde, dtype=float).ravel()
    return np.append(tt + pin, pin)


def log_partition(theta, k: int) -> float:
    """psi_k(theta) = log e_k(exp(theta)), stabilized by homogeneity of e_k."""
    s, top = _shifted(theta)
    _check_natural_k(s.size, k)
    return float(np.log(esp(s, k).e(k)) + k * top)


def _leave_out(s: np.ndarray, pairs: bool, j: int) -> np.ndarray:
    """e_j(s with one / two entries removed) for every i (or i,j), via zeroed rows."""
    n = s.size
    if j < 0:
        return np.zeros((n, n) if pairs else n)
    if not pairs:
        batch = np.tile(s, (n, 1))
        batch[np.arange(n), np.arange(n)] = 0.0
        return esp_batch(batch, j)[:, j]
    iu, ju = np.triu_indices(n, 1)
    batch = np.tile(s, (iu.size, 1))
    batch[np.arange(iu.size), iu] = 0.0
    batch[np.arange(iu.size), ju] = 0.0
    out = np.zeros((n, n))
    out[iu, ju] = esp_batch(batch, j)[:, j]
    return out + out.T


def mean_parameter(theta, k: int) -> np.ndarray:
    """Inclusion probabilities eta_i = s_i e_{k-1}(s_{-i}) / e_k(s) = d psi_k / d theta_i."""
    s, _ = _shifted(theta)
    _check_natural_k(s.size, k)
    return s * _leave_out(s, False, k - 1) / esp(s, k).e(k)


def pair_inclusion(theta, k: int) -> np.ndarray:
    """pi_ij = P(i in A and j in A) for i != j; zero diagonal."""
    s, _ = _shifted(theta)
    _check_natural_k(s.size, k)
    return np.outer(s, s) * _leave_out(s, True, k - 2) / esp(s, k).e(k)


@dataclass(frozen=True)
class FisherMatrix:
    g: np.ndarray
    eta: np.ndarray
    pair_probs: np.ndarray


def fisher_information(theta, k: int) -> FisherMatrix:
    """G = diag(eta) - eta eta^T + Pi, the Hessian of psi_k and covariance of T(A)."""
    eta = mean_parameter(theta, k)
    pi = pair_inclusion(theta, k)
    g = np.diag(eta) - np.outer(eta, eta) + pi
    return FisherMatrix(0.5 * (g + g.T), eta, pi)


@dataclass(frozen=True)
class SymmetryReport:
    max_deviation: float
    passed: bool


def fisher_symmetry_check(theta, k: int, tol: float = 1e-10) -> SymmetryReport:
    """Compare G^(k)(theta) with G^(n-k)(-theta) (complementation A -> Y minus A)."""
    th = np.asarray(theta, dtype=float).ravel()
    lhs = fisher_information(th, k).g
    rhs = fisher_information(-th, th.size - k).g
    dev = float(np.max(np.abs(lhs - rhs)))
    return SymmetryReport(dev, dev <= tol)


def sufficient_statistics(n: int, k: int) -> np.ndarray:
    """C(n,k) x n 0/1 matrix whose rows are T(A) in canonical order."""
    idx = subset_index_array(n, k)
    t = np.zeros((idx.shape[0], n))
    np.put_along_axis(t, idx, 1.0, axis=1)
    return t


@dataclass(frozen=True)
class MinimalityReport:
    n: int
    k: int
    minimal_rank: int
    full_rank: int
    passed: bool


def minimality_check(n: int, k: int) -> MinimalityReport:
    """Ranks of [T_1..T_{n-1}, 1] (should be n) and [T_1..T_n, 1] (also n: sum T_i = k)."""
    _check_natural_k(n, k)
    t = sufficient_statistics(n, k)
    ones = np.ones((t.shape[0], 1))
    minimal = rank_and_nullspace(np.hstack([t[:, :-1], ones])).rank
    full = rank_and_nullspace(np.hstack([t, ones])).rank
    return MinimalityReport(n, k, minimal, full, minimal == n and full == n)
