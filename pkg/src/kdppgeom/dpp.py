"""The unconditional DPP P_L(A) = det(L_A) / det(L + I)."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .combinatorics import SubsetIndex, enumerate_subsets, esp, subset_index_array
from .errors import CapacityError, DomainError
from .linalg import as_kernel, batched_principal_minors, eig_sym, principal_minor

MAX_TABLE_N = 20


@dataclass(frozen=True)
class CardinalityLaw:
    probs: np.ndarray  # probs[k] = P(|A| = k)

    def __getitem__(self, k):
        return float(self.probs[k])


@dataclass(frozen=True)
class DppDistribution:
    kernel: np.ndarray
    log_normalizer: float
    subsets: list[SubsetIndex]
    probs: np.ndarray

    def prob(self, a: SubsetIndex) -> float:
        return float(self.probs[_global_position(a)])


def _global_position(a: SubsetIndex) -> int:
    # strata ordered by size, canonical order inside each stratum
    return sum(comb(a.n, j) for j in range(a.k)) + a.rank


def dpp_probability(l, a: SubsetIndex) -> float:
    L = as_kernel(l)
    _, logdet = np.linalg.slogdet(L + np.eye(L.shape[0]))
    return principal_minor(L, a) / np.exp(logdet)


def dpp_distribution(l) -> DppDistribution:
    """Full table over all 2^n subsets, ordered by cardinality then lexicographically."""
    L = as_kernel(l)
    n = L.shape[0]
    if n > MAX_TABLE_N:
        raise CapacityError(f"full DPP tables are limited to n <= {MAX_TABLE_N}")
    _, logdet = np.linalg.slogdet(L + np.eye(n))
    subsets, minors = [], []
    for k in range(n + 1):
        subsets.extend(enumerate_subsets(n, k))
        minors.append(batched_principal_minors(L, subset_index_array(n, k)))
    probs = np.concatenate(minors) / np.exp(logdet)
    return DppDistribution(L, float(logdet), subsets, probs)


def cardinality_law(lambdas) -> CardinalityLaw:
    lam = np.asarray(lambdas, dtype=float).ravel()
    if np.any(lam < 0):
        raise DomainError("cardinality law needs nonnegative eigenvalues")
    e = esp(lam, lam.size).values[-1]
    return CardinalityLaw(e / np.prod(1.0 + lam))


def marginal_kernel(l) -> np.ndarray:
    """K = L (L + I)^-1, built on the eigenbasis of L so it stays exactly symmetric."""
    L = as_kernel(l)
    spec = eig_sym(L)
    lam = np.clip(spec.lambdas, 0.0, None)
    K = (spec.u * (lam / (1.0 + lam))) @ spec.u.T
    return 0.5 * (K + K.T)


def inclusion_probability(l, s: SubsetIndex) -> float:
    """P(S subset of A) = det(K_S)."""
    return principal_minor(marginal_kernel(l), s)
