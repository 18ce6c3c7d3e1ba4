"""Exact permanent oracles: naive expansion and Ryser's formula.

Both are exponential-time reference implementations meant for
cross-checking at desk scale.  The naive expansion is the ground truth
(a direct transcription of the definition, guarded to ``n <= 9``);
Ryser's formula with Gray-code updates covers ``n <= 22``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooLargeError
from .gram import as_complex_matrix

__all__ = ["NAIVE_LIMIT", "RYSER_LIMIT", "ExactResult", "permanent_naive", "permanent_ryser"]

NAIVE_LIMIT = 9
RYSER_LIMIT = 22


@dataclass(frozen=True)
class ExactResult:
    """Exact permanent value with its log magnitude."""

    value: complex
    log_abs: float
    method: str
    n: int


def _result(value: complex, method: str, n: int) -> ExactResult:
    mag = abs(value)
    log_abs = math.log(mag) if mag > 0.0 else float("-inf")
    return ExactResult(value=complex(value), log_abs=log_abs, method=method, n=n)


def permanent_naive(matrix) -> ExactResult:
    """Permanent by recursive Laplace-style expansion, n <= 9.

    Expands along rows, sharing prefixes and skipping exact zero
    entries; the iteration order is fixed, so results are deterministic
    down to the last bit.
    """
    M = as_complex_matrix(matrix)
    n = M.shape[0]
    if n > NAIVE_LIMIT:
        raise TooLargeError(f"naive oracle limited to n <= {NAIVE_LIMIT}, got {n}")
    rows = [[complex(x) for x in row] for row in M]

    def expand(r: int, cols: tuple, acc: complex) -> complex:
        if r == n:
            return acc
        row = rows[r]
        total = 0.0 + 0.0j
        for k, j in enumerate(cols):
            a = row[j]
            if a != 0.0:
                total += expand(r + 1, cols[:k] + cols[k + 1 :], acc * a)
        return total

    value = expand(0, tuple(range(n)), 1.0 + 0.0j)
    return _result(value, "naive", n)


def _gray_sums(block: np.ndarray) -> np.ndarray:
    """Row sums over all subsets of a column block, in Gray-code order.

    ``out[k, i] = sum_{j in subset(k)} block[i, j]`` where ``subset(k)``
    is the Gray code of ``k``; each step updates one column.
    """
    n, b = block.shape
    out = np.zeros((1 << b, n), dtype=complex)
    for k in range(1, 1 << b):
        j = (k & -k).bit_length() - 1
        gray = k ^ (k >> 1)
        if (gray >> j) & 1:
            out[k] = out[k - 1] + block[:, j]
        else:
            out[k] = out[k - 1] - block[:, j]
    return out


def permanent_ryser(matrix, block_bits: int = 11) -> ExactResult:
    """Permanent by Ryser's inclusion-exclusion formula, n <= 22.

        per(M) = (-1)^n * sum_{S != {}} (-1)^{|S|} prod_i sum_{j in S} M_ij

    Subsets are enumerated in Gray-code order so each differs from its
    predecessor by one column.  The low `block_bits` columns are
    precomputed for all of their subsets and swept as a vector block
    against each subset of the remaining columns, keeping the inner
    work in numpy.  `block_bits` only trades memory against speed; the
    result is the same sum.
    """
    M = as_complex_matrix(matrix)
    n = M.shape[0]
    if n > RYSER_LIMIT:
        raise TooLargeError(f"Ryser oracle limited to n <= {RYSER_LIMIT}, got {n}")
    if not 1 <= block_bits <= 20:
        raise ValueError("block_bits must be in [1, 20]")

    b = min(block_bits, n)
    lo = _gray_sums(M[:, :b])
    # parity(popcount(gray(k))) == parity(k), so |S| signs come for free
    lo_sign = np.where(np.arange(1 << b) % 2 == 0, 1.0, -1.0)
    hi_cols = M[:, b:]

    hi_sum = np.zeros(n, dtype=complex)
    total = lo_sign @ np.prod(lo + hi_sum, axis=1)
    for k in range(1, 1 << (n - b)):
        j = (k & -k).bit_length() - 1
        gray = k ^ (k >> 1)
        if (gray >> j) & 1:
            hi_sum = hi_sum + hi_cols[:, j]
        else:
            hi_sum = hi_sum - hi_cols[:, j]
        sign_hi = 1.0 if k % 2 == 0 else -1.0
        total += sign_hi * (lo_sign @ np.prod(lo + hi_sum, axis=1))

    value = ((-1) ** n) * total
    return _result(value, "ryser", n)
