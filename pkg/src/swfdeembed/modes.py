"""Hansen (s, m, n) mode indexing and truncation bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import DomainError


def j_from_smn(s: int, m: int, n: int) -> int:
    """Flat index j (1-based) of the mode (s, m, n) in Hansen's ordering."""
    if s not in (1, 2):
        raise DomainError(f"polarization selector s must be 1 or 2, got {s}")
    if n < 1:
        raise DomainError(f"degree n must be >= 1, got {n}")
    if abs(m) > n:
        raise DomainError(f"order m must satisfy |m| <= n, got m={m}, n={n}")
    return 2 * (n * (n + 1) + m - 1) + s


def smn_from_j(j: int) -> tuple[int, int, int]:
    """Inverse of :func:`j_from_smn`."""
    if j < 1:
        raise DomainError(f"flat index j must be >= 1, got {j}")
    s = 2 - (j % 2)
    q = (j - s) // 2 + 1  # n(n+1) + m
    n = math.isqrt(q)
    # n(n+1) - n <= q <= n(n+1) + n  <=>  n^2 <= q < (n+1)^2
    m = q - n * (n + 1)
    return s, m, n


def mode_count(n_max: int) -> int:
    return 2 * n_max * (n_max + 2)


@dataclass(frozen=True)
class ModeIndex:
    s: int
    m: int
    n: int

    def __post_init__(self):
        j_from_smn(self.s, self.m, self.n)

    @property
    def j(self) -> int:
        return j_from_smn(self.s, self.m, self.n)

    @classmethod
    def from_j(cls, j: int) -> "ModeIndex":
        return cls(*smn_from_j(j))

    @property
    def dual(self) -> "ModeIndex":
        """Mode with the other polarization, s -> 3 - s."""
        return ModeIndex(3 - self.s, self.m, self.n)


@dataclass(frozen=True)
class ModeSet:
    """All modes with degree 1 <= n <= n_max, in ascending j."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError(f"n_max must be a positive integer, got {self.n_max}")

    @property
    def count(self) -> int:
        return mode_count(self.n_max)

    def __len__(self) -> int:
        return self.count

    def __iter__(self) -> Iterator[ModeIndex]:
        for j in range(1, self.count + 1):
            yield ModeIndex.from_j(j)

    def degree_counts(self) -> dict[int, int]:
        """Number of modes per degree n, 2(2n+1)."""
        return {n: 2 * (2 * n + 1) for n in range(1, self.n_max + 1)}

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(s, m, n) as integer arrays indexed by j - 1."""
        smn = np.array([smn_from_j(j) for j in range(1, self.count + 1)], dtype=int)
        return smn[:, 0], smn[:, 1], smn[:, 2]

    @cached_property
    def dual_permutation(self) -> np.ndarray:
        """Index array p with p[j-1] = j'(3-s, m, n) - 1."""
        s, _, _ = self.arrays
        idx = np.arange(self.count)
        return np.where(s == 1, idx + 1, idx - 1)
