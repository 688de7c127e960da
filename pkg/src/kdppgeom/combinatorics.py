"""Subset enumeration over fixed-cardinality strata and elementary symmetric polynomials."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

MAX_ENUM_N = 64


@dataclass(frozen=True, order=True)
class SubsetIndex:
    """A k-subset of {1..n} together with its lexicographic rank in the stratum.

    `elements` are 1-based and strictly increasing.
    """

    rank: int
    elements: tuple[int, ...]
    n: int

    def __post_init__(self):
        els = self.elements
        if any(b <= a for a, b in zip(els, els[1:])):
            raise DomainError(f"subset elements must be strictly increasing: {els}")
        if els and (els[0] < 1 or els[-1] > self.n):
            raise DomainError(f"subset {els} not within 1..{self.n}")

    @classmethod
    def of(cls, elements: Iterable[int], n: int) -> "SubsetIndex":
        els = tuple(sorted(int(e) for e in elements))
        if len(set(els)) != len(els):
            raise DomainError(f"repeated element in subset {els}")
        if els and (els[0] < 1 or els[-1] > n):
            raise DomainError(f"subset {els} not within 1..{n}")
        return cls(rank_subset(els, n), els, n)

    @property
    def k(self) -> int:
        return len(self.elements)

    @property
    def indices(self) -> list[int]:
        """0-based positions, for array indexing."""
        return [e - 1 for e in self.elements]

    def __str__(self):
        return "{" + ",".join(map(str, self.elements)) + "}"


def _check_nk(n: int, k: int) -> None:
    if n < 0:
        raise DomainError(f"ground set size must be nonnegative, got {n}")
    if k < 0 or k > n:
        raise DomainError(f"cardinality k={k} outside 0..{n}")


def rank_subset(elements: Sequence[int], n: int) -> int:
    """Lexicographic rank of a sorted 1-based k-subset among all k-subsets of {1..n}."""
    k = len(elements)
    r = 0
    prev = 0
    for pos, a in enumerate(elements):
        for x in range(prev + 1, a):
            r += comb(n - x, k - pos - 1)
        prev = a
    return r


def unrank_subset(rank: int, n: int, k: int) -> SubsetIndex:
    _check_nk(n, k)
    total = comb(n, k)
    if not 0 <= rank < total:
        raise DomainError(f"rank {rank} outside 0..{total - 1}")
    els = []
    r = rank
    x = 1
    for pos in range(k):
        while True:
            block = comb(n - x, k - pos - 1)
            if r < block:
                break
            r -= block
            x += 1
        els.append(x)
        x += 1
    return SubsetIndex(rank, tuple(els), n)


def enumerate_subsets(n: int, k: int) -> list[SubsetIndex]:
    """All k-subsets of {1..n} in lexicographic order, ranks 0..C(n,k)-1."""
    _check_nk(n, k)
    return [
        SubsetIndex(r, c, n)
        for r, c in enumerate(itertools.combinations(range(1, n + 1), k))
    ]


def subset_index_array(n: int, k: int) -> np.ndarray:
    """C(n,k) x k integer array of 0-based members, rows in canonical order."""
    _check_nk(n, k)
    combos = list(itertools.combinations(range(n), k))
    return np.array(combos, dtype=np.intp).reshape(len(combos), k)


@dataclass(frozen=True)
class ESPTable:
    """values[m, j] = e_j(lambda_1..lambda_m)."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def k_max(self) -> int:
        return self.values.shape[1] - 1

    def e(self, j: int) -> float:
        if j < 0 or j > self.k_max:
            return 0.0
        return float(self.values[-1, j])


def esp(lambdas, k_max: int) -> ESPTable:
    lam = np.asarray(lambdas, dtype=float).ravel()
    n = lam.size
    if k_max < 0 or k_max > n:
        raise DomainError(f"k_max={k_max} outside 0..{n}")
    if not np.all(np.isfinite(lam)):
        raise DomainError("eigenvalues must be finite")
    table = np.zeros((n + 1, k_max + 1))
    table[:, 0] = 1.0
    for m in range(1, n + 1):
        table[m, 1:] = table[m - 1, 1:] + lam[m - 1] * table[m - 1, :-1]
    return ESPTable(table)


def esp_batch(vectors, k_max: int) -> np.ndarray:
    """Last row of the ESP recurrence for each row of a (B, n) array -> (B, k_max+1).

    Same recurrence as `esp`, run in lockstep over the batch.
    """
    s = np.atleast_2d(np.asarray(vectors, dtype=float))
    out = np.zeros((s.shape[0], k_max + 1))
    out[:, 0] = 1.0
    for m in range(s.shape[1]):
        out[:, 1:] = out[:, 1:] + s[:, m : m + 1] * out[:, :-1]
    return out


def esp_leave_out(lambdas, excluded: Iterable[int], j: int) -> float:
    """e_j of `lambdas` with the (0-based) `excluded` positions removed.

    Recomputed from scratch rather than divided out, so zero entries are safe.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    ex = sorted(set(int(i) for i in excluded))
    if len(ex) > 2:
        raise DomainError("at most two excluded indices are supported")
    if any(i < 0 or i >= lam.size for i in ex):
        raise DomainError(f"excluded index out of range 0..{lam.size - 1}: {ex}")
    rest = np.delete(lam, ex)
    if j < 0 or j > rest.size:
        return 0.0
    return esp(rest, j).e(j)
