"""Maximum likelihood for the diagonal k-DPP in the minimal parameterization.

theta = (theta_tilde, 0): the last coordinate is pinned, which removes the
flat common-shift direction of the log-partition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .combinatorics import SubsetIndex
from .errors import BoundaryMLEError, DomainError
from .identifiability import make_rng
from .kdpp import KDppDistribution, from_minimal, log_partition, mean_parameter

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    max_iters: int = 500
    grad_tol: float = 1e-8
    step_rule: Literal["fixed", "backtracking"] = "backtracking"
    step_size: float = 1.0  # fixed step, or the first trial step for backtracking
    beta: float = 0.5
    c1: float = 1e-4
    init: Literal["zeros", "moment_match"] = "zeros"

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        if not self.grad_tol > 0:
            raise DomainError("grad_tol must be positive")
        if self.step_rule not in ("fixed", "backtracking"):
            raise DomainError(f"unknown step rule {self.step_rule!r}")
        if self.init not in ("zeros", "moment_match"):
            raise DomainError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class FitResult:
    theta_tilde_hat: np.ndarray
    log_likelihood: float
    grad_norm: float
    iters: int
    converged: bool
    eta_hat: np.ndarray
    trace: tuple[float, ...] = ()  # objective after each accepted step, starting point first

    def to_dict(self) -> dict:
        return {
            "theta_tilde_hat": self.theta_tilde_hat.tolist(),
            "log_likelihood": self.log_likelihood,
            "grad_norm": self.grad_norm,
            "iters": self.iters,
            "converged": self.converged,
            "eta_hat": self.eta_hat.tolist(),
        }


def inclusion_counts(data: Sequence[SubsetIndex], k: int, n: int) -> np.ndarray:
    """Sum of T(A) over the data; validates cardinality and range."""
    counts = np.zeros(n)
    for a in data:
        if a.k != k:
            raise DomainError(f"observation {a} has size {a.k}, expected {k}")
        if a.n != n:
            raise DomainError(f"observation {a} is over a ground set of size {a.n}, expected {n}")
        counts[a.indices] += 1.0
    return counts


def log_likelihood(data: Sequence[SubsetIndex], theta_tilde, k: int) -> float:
    theta = from_minimal(theta_tilde)
    counts = inclusion_counts(data, k, theta.size)
    return float(counts @ theta - len(data) * log_partition(theta, k))


def gradient(data: Sequence[SubsetIndex], theta_tilde, k: int) -> np.ndarray:
    """|data| * (empirical inclusion frequency - eta), first n-1 coordinates."""
    theta = from_minimal(theta_tilde)
    counts = inclusion_counts(data, k, theta.size)
    return (counts - len(data) * mean_parameter(theta, k))[:-1]


def _objective(counts: np.ndarray, size: int, x: np.ndarray, k: int) -> float:
    theta = from_minimal(x)
    return float(counts @ theta - size * log_partition(theta, k))


def _grad(counts: np.ndarray, size: int, x: np.ndarray, k: int) -> np.ndarray:
    return (counts - size * mean_parameter(from_minimal(x), k))[:-1]


def check_interior(data: Sequence[SubsetIndex], k: int, n: int) -> np.ndarray:
    counts = inclusion_counts(data, k, n)
    for i, c in enumerate(counts):
        if c == len(data):
            raise BoundaryMLEError(i + 1, "appears in every observation")
        if c == 0:
            raise BoundaryMLEError(i + 1, "appears in no observation")
    return counts


def fit(data: Sequence[SubsetIndex], k: int, config: FitConfig = FitConfig()) -> FitResult:
    """Gradient ascent on the log-likelihood over theta_tilde."""
    if not data:
        raise DomainError("cannot fit an empty data set")
    n = data[0].n
    counts = check_interior(data, k, n)
    if config.init == "moment_match":
        freq = counts / len(data)
        x = np.log(freq[:-1]) - np.log(freq[-1])
    else:
        x = np.zeros(n - 1)

    size = len(data)
    f = _objective(counts, size, x, k)
    g = _grad(counts, size, x, k)
    trace = [f]
    step = config.step_size
    it = 0
    while it < config.max_iters and np.linalg.norm(g) > config.grad_tol:
        it += 1
        if config.step_rule == "fixed":
            x_new = x + config.step_size * g
            f = _objective(counts, size, x_new, k)
        else:
            gg = float(g @ g)
            while True:
                x_new = x + step * g
                f_new = _objective(counts, size, x_new, k)
                if f_new >= f + config.c1 * step * gg:
                    break
                step *= config.beta
                if step < 1e-300:
                    break
            if f_new < f:
                log.warning("line search stalled at iteration %d", it)
                break
            f = f_new
        trace.append(f)
        g_new = _grad(counts, size, x_new, k)
        if config.step_rule == "backtracking":
            # Barzilai-Borwein guess for the next trial step (ascent: curvature is -dg)
            dx, dg = x_new - x, g - g_new
            curv = float(dx @ dg)
            step = float(dx @ dx) / curv if curv > 0 else config.step_size
        x, g = x_new, g_new

    gn = float(np.linalg.norm(g))
    eta = mean_parameter(from_minimal(x), k)
    return FitResult(x, f, gn, it, gn <= config.grad_tol, eta, tuple(trace))


def draw_from_table(dist: KDppDistribution, size: int, seed: int) -> list[SubsetIndex]:
    """Exact inverse-CDF draws from a materialized k-DPP table (test-data generator)."""
    rng = make_rng(seed)
    cdf = np.cumsum(dist.probs)
    pos = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
    pos = np.minimum(pos, len(dist.subsets) - 1)
    return [dist.subsets[i] for i in pos]
