"""Invariances of the k-DPP and the space of first-order invisible kernel directions."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .combinatorics import SubsetIndex, enumerate_subsets, subset_index_array
from .errors import DomainError
from .kdpp import kdpp_distribution, total_variation
from .linalg import (
    SpectralForm,
    as_kernel,
    as_positive_definite,
    as_symmetric,
    cluster_eigenvalues,
    rank_and_nullspace,
)

COMMUTE_TOL = 1e-9
TV_TOL = 1e-10


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator, so a seed names the same stream everywhere."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class InvarianceTransform:
    scale_c: float
    sign_flips: np.ndarray
    rotation_q: np.ndarray

    def __post_init__(self):
        if not self.scale_c > 0:
            raise DomainError(f"scale must be positive, got {self.scale_c}")
        flips = np.asarray(self.sign_flips, dtype=float)
        if not np.all(np.isin(flips, (-1.0, 1.0))):
            raise DomainError("sign flips must be +1 or -1")
        q = np.asarray(self.rotation_q, dtype=float)
        if q.shape != (flips.size, flips.size):
            raise DomainError("rotation and sign vector sizes disagree")
        object.__setattr__(self, "sign_flips", flips)
        object.__setattr__(self, "rotation_q", q)

    @classmethod
    def identity(cls, n: int) -> "InvarianceTransform":
        return cls(1.0, np.ones(n), np.eye(n))


def apply_invariance(spec: SpectralForm, t: InvarianceTransform) -> tuple[np.ndarray, np.ndarray]:
    """Return (M, c D L D) where M = (D U Q)(c Lambda)(D U Q)^T."""
    lam = np.asarray(spec.lambdas, dtype=float)
    n = lam.size
    if t.sign_flips.size != n:
        raise DomainError(f"sign vector has length {t.sign_flips.size}, expected {n}")
    q = t.rotation_q
    big = max(1.0, float(np.max(np.abs(lam))))
    resid = np.max(np.abs((q * lam) @ q.T - np.diag(lam)))
    if resid > COMMUTE_TOL * big:
        raise DomainError(f"rotation does not commute with the spectrum (residual {resid:.3g})")
    w = (t.sign_flips[:, None] * spec.u) @ q
    m = (w * (t.scale_c * lam)) @ w.T
    l = spec.reconstruct()
    d = t.sign_flips
    closed = t.scale_c * d[:, None] * l * d[None, :]
    return 0.5 * (m + m.T), closed


@dataclass(frozen=True)
class InvarianceReport:
    tv: float
    passed: bool


def check_kdpp_invariance(l, m, k: int, tol: float = TV_TOL) -> InvarianceReport:
    tv = total_variation(kdpp_distribution(l, k), kdpp_distribution(m, k))
    return InvarianceReport(tv, tv <= tol)


def haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def sample_commuting_rotation(lambdas, seed: int, cluster_tol: float = 1e-8) -> np.ndarray:
    """Block-diagonal Haar orthogonal matrix, one block per eigenvalue cluster."""
    lam = np.asarray(lambdas, dtype=float).ravel()
    rng = make_rng(seed)
    q = np.zeros((lam.size, lam.size))
    for group in cluster_eigenvalues(lam, cluster_tol):
        g = np.array(group)
        q[np.ix_(g, g)] = haar_orthogonal(g.size, rng)
    return q


# -- first-order analysis ---------------------------------------------------

def sym_basis_labels(n: int) -> list[tuple[int, int]]:
    """1-based (i, j) labels: diagonals E_ii first, then E_ij + E_ji for i < j lexicographic."""
    diag = [(i, i) for i in range(1, n + 1)]
    off = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return diag + off


def sym_to_coords(h) -> np.ndarray:
    """Coordinates of a symmetric matrix in the fixed Sym(n) basis."""
    h = np.asarray(h, dtype=float)
    iu, ju = np.triu_indices(h.shape[0], 1)
    return np.concatenate([np.diag(h), h[iu, ju]])


def coords_to_sym(c, n: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    h = np.diag(c[:n])
    iu, ju = np.triu_indices(n, 1)
    h[iu, ju] = c[n:]
    h[ju, iu] = c[n:]
    return h


def _stratum_inverses(L: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    idx = subset_index_array(L.shape[0], k)
    blocks = L[idx[:, :, None], idx[:, None, :]]
    return idx, np.linalg.inv(blocks)


def trace_terms(l, h, k: int) -> np.ndarray:
    """tr(L_A^{-1} H_A) for every A in X_k."""
    L = as_positive_definite(l)
    H = as_symmetric(h, "direction")
    if k == 0:
        return np.zeros(1)
    idx, inv = _stratum_inverses(L, k)
    hb = H[idx[:, :, None], idx[:, None, :]]
    return np.einsum("aij,aji->a", inv, hb)


def score(l, h, k: int) -> np.ndarray:
    """d/dt log P^k_{L+tH}(A) at t=0 for every A, canonical order."""
    L = as_positive_definite(l)
    tr = trace_terms(L, h, k)
    p = kdpp_distribution(L, k).probs
    return tr - float(p @ tr)


@dataclass(frozen=True)
class PhiMap:
    matrix: np.ndarray
    basis_labels: list[tuple[int, int]]
    subset_order: list[SubsetIndex]


def build_phi(l, k: int) -> PhiMap:
    """Matrix of H -> (tr(L_A^{-1} H_A))_A in the fixed Sym(n) basis."""
    L = as_positive_definite(l)
    n = L.shape[0]
    if not 0 <= k <= n:
        raise DomainError(f"cardinality k={k} outside 0..{n}")
    labels = sym_basis_labels(n)
    phi = np.zeros((comb(n, k), len(labels)))
    if k > 0:
        idx, inv = _stratum_inverses(L, k)
        # full-size inverse pattern: W[a, i, j] = (L_A^{-1}) at global (i, j), zero outside A
        w = np.zeros((idx.shape[0], n, n))
        rows = np.arange(idx.shape[0])[:, None, None]
        w[rows, idx[:, :, None], idx[:, None, :]] = inv
        iu, ju = np.triu_indices(n, 1)
        phi[:, :n] = w[:, np.arange(n), np.arange(n)]
        phi[:, n:] = 2.0 * w[:, iu, ju]
    return PhiMap(phi, labels, enumerate_subsets(n, k))


@dataclass
class IdentifiabilityReport:
    n: int
    k: int
    m: int
    num_subsets: int
    phi_rank: int
    dim_v: int
    lower_bound: int
    exceeds_scale_cone: bool
    basis_v: list[np.ndarray] = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    tolerance_used: float = 0.0

    def summary(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "num_subsets": self.num_subsets,
            "phi_rank": self.phi_rank,
            "dim_v": self.dim_v,
            "lower_bound": self.lower_bound,
            "exceeds_scale_cone": self.exceeds_scale_cone,
        }


def identifiability_report(l, k: int, rel_tol: float = 1e-10) -> IdentifiabilityReport:
    """dim V = m - rank(Phi) + 1 with a basis: Ker(Phi) plus the scale direction L.

    The +1 is exact because Phi(L) = k * 1 puts the constants in the range of Phi.
    """
    L = as_positive_definite(l)
    n = L.shape[0]
    kdpp_distribution(L, k)  # membership in the k-stratum family
    phi = build_phi(L, k)
    rr = rank_and_nullspace(phi.matrix, rel_tol)
    m = n * (n + 1) // 2
    c = comb(n, k)
    basis = [coords_to_sym(v, n) for v in rr.nullspace_basis] + [L.copy()]
    dim_v = m - rr.rank + 1
    return IdentifiabilityReport(
        n=n,
        k=k,
        m=m,
        num_subsets=c,
        phi_rank=rr.rank,
        dim_v=dim_v,
        lower_bound=max(1, m - c + 1),
        exceeds_scale_cone=dim_v >= 2,
        basis_v=basis,
        singular_values=rr.singular_values,
        tolerance_used=rr.tolerance_used,
    )


@dataclass(frozen=True)
class DecayReport:
    steps: tuple[float, ...]
    tvs: tuple[float, ...]
    exponent: float
    exact: bool
    passed: bool


def tv_decay(l, h, k: int, steps=(1e-2, 1e-3, 1e-4), min_exponent: float = 1.9,
             noise: float = 1e-13) -> DecayReport:
    """Fit TV(P^k_L, P^k_{L+tH}) ~ C t^p over the given steps.

    p >= 2 means the direction is flat to first order. A direction whose TV stays at
    rounding level for every step is exactly invisible and passes outright.
    """
    L = as_kernel(l)
    H = as_symmetric(h, "direction")
    base = kdpp_distribution(L, k)
    tvs = [total_variation(base, kdpp_distribution(L + t * H, k)) for t in steps]
    exact = max(tvs) <= noise
    if exact:
        return DecayReport(tuple(steps), tuple(tvs), float("inf"), True, True)
    x = np.log(np.asarray(steps))
    y = np.log(np.maximum(np.asarray(tvs), np.finfo(float).tiny))
    slope = float(np.polyfit(x, y, 1)[0])
    return DecayReport(tuple(steps), tuple(tvs), slope, False, slope >= min_exponent)


def h_rho(n: int, rho: float) -> np.ndarray:
    """-rho I + rho 11^T; I + H_rho has constant k x k principal minors."""
    if n < 2:
        raise DomainError("h_rho needs n >= 2")
    if not -1.0 / (n - 1) < rho < 1.0:
        raise DomainError(f"rho={rho} outside (-1/(n-1), 1); I + H_rho would not be positive definite")
    return rho * (np.ones((n, n)) - np.eye(n))


def h_rho_minor(k: int, rho: float) -> float:
    return (1.0 - rho) ** (k - 1) * (1.0 + (k - 1) * rho)
