"""Discrepancy between a scaled subsample and a two-level orthogonal array.

For rows ``u, v`` of a matrix scaled to ``[-1, 1]^p`` the pair loss is

    (p - |u|^2 / 2 - |v|^2 / 2 + agree(u, v)) ** exponent

where ``agree`` counts coordinates with strictly same-signed entries. The
total discrepancy sums it over unordered row pairs; with exponent 2 it is
bounded below by ``(k^2 p (p+1) - 4 k p^2) / 8`` and the bound is attained
exactly by orthogonal arrays of strength 2. Exponent 4 targets strength 4.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

EXPONENTS = (2, 4)
DEFAULT_ENUMERATION_CAP = 10**6


def check_exponent(exponent) -> int:
    if exponent not in EXPONENTS:
        raise ValueError(f"exponent must be one of {EXPONENTS}, got {exponent!r}")
    return int(exponent)


def _pair(u, v):
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"rows differ in length: {u.size} vs {v.size}")
    return u, v


def sign_agreement(u, v) -> int:
    """Number of coordinates where ``u`` and ``v`` have strictly the same sign.

    A zero never agrees with anything, including another zero.

    >>> sign_agreement([1, -1, 1], [1, 1, -1])
    1
    """
    u, v = _pair(u, v)
    # Sign product, not u * v: the latter underflows to 0 for tiny entries.
    return int(np.count_nonzero(np.sign(u) * np.sign(v) > 0))


def pair_loss(u, v, exponent: int = 2) -> float:
    """Discrepancy contributed by the pair of scaled rows ``(u, v)``."""
    exponent = check_exponent(exponent)
    u, v = _pair(u, v)
    # Summing the norms first keeps the result exactly symmetric in (u, v).
    base = u.size - (u @ u + v @ v) / 2.0 + sign_agreement(u, v)
    return float(base**exponent)


def _as_matrix(S):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {S.shape}")
    return S


def total_discrepancy(S, exponent: int = 2, block_rows: int = 512) -> float:
    """Sum of :func:`pair_loss` over all unordered row pairs of ``S``.

    Sign agreements are counted with two small matrix products over the
    positive and negative indicator matrices, in row blocks so that memory
    stays ``O(block_rows * k)``. Row sums are reduced in a fixed order, so
    the result is reproducible bit for bit.

    Raises ``ValueError`` when ``S`` has fewer than two rows.
    """
    exponent = check_exponent(exponent)
    S = _as_matrix(S)
    k, p = S.shape
    if k < 2:
        raise ValueError("discrepancy needs at least two rows")
    pos = (S > 0).astype(np.float64)
    neg = (S < 0).astype(np.float64)
    half_sq = np.einsum("ij,ij->i", S, S) / 2.0

    row_sums = np.zeros(k)
    for start in range(0, k - 1, block_rows):
        stop = min(start + block_rows, k - 1)
        agree = pos[start:stop] @ pos.T + neg[start:stop] @ neg.T
        base = p - half_sq[start:stop, None] - half_sq[None, :] + agree
        terms = base**exponent
        for r, i in enumerate(range(start, stop)):
            row_sums[i] = terms[r, i + 1 :].sum()
    return float(row_sums.sum())


def pair_loss_matrix(S, exponent: int = 2) -> np.ndarray:
    """Dense ``k x k`` matrix of pair losses, built elementwise from the definition.

    Intended for small inputs (test oracles, exhaustive search); memory is
    ``O(k^2 p)``. The diagonal holds the self-pair value and is not part of
    any discrepancy.
    """
    exponent = check_exponent(exponent)
    S = _as_matrix(S)
    p = S.shape[1]
    sgn = np.sign(S)
    agree = np.count_nonzero(sgn[:, None, :] * sgn[None, :, :] > 0, axis=2)
    sq = (S**2).sum(axis=1)
    return (p - (sq[:, None] + sq[None, :]) / 2.0 + agree) ** exponent


def discrepancy_lower_bound(k: int, p: int) -> float:
    """Lower bound ``(k^2 p (p+1) - 4 k p^2) / 8`` on the exponent-2 discrepancy.

    The bound is returned as is, even when negative (it is vacuous there).
    It holds for any ``k x p`` matrix in ``[-1, 1]^p`` without exact zeros
    and is attained exactly by two-level orthogonal arrays of strength 2.
    """
    if k < 1 or p < 1:
        raise ValueError("k and p must be positive")
    return (k * k * p * (p + 1) - 4 * k * p * p) / 8


def is_orthogonal_array(S, tol: float = 1e-9) -> bool:
    """Whether ``S`` is a two-level (``+-1``) orthogonal array of strength 2.

    Entries within ``tol`` of ``+-1`` are snapped to the level; then each of
    the four ordered sign pairs must occur exactly ``k / 4`` times in every
    pair of columns. Row counts not divisible by 4 are never arrays.
    """
    S = _as_matrix(S)
    k, p = S.shape
    if k == 0 or k % 4:
        return False
    if np.any(np.abs(np.abs(S) - 1.0) > tol):
        return False
    bits = (S > 0).astype(np.int64)
    target = k // 4
    for a, b in combinations(range(p), 2):
        counts = np.bincount(2 * bits[:, a] + bits[:, b], minlength=4)
        if np.any(counts != target):
            return False
    if p == 1:
        # A single column has no pair; balance of the two levels is the analogue.
        return int(bits.sum()) * 2 == k
    return True


def brute_force_min_discrepancy(
    X, k: int, exponent: int = 2, cap: int = DEFAULT_ENUMERATION_CAP
):
    """Exact minimiser of the discrepancy over every ``k``-subset of rows.

    Enumerates subsets in lexicographic order and keeps the first minimum,
    so ties resolve to the lexicographically smallest index tuple.

    Returns
    -------
    indices : ndarray of shape (k,)
    value : float

    Raises
    ------
    ValueError
        If the number of subsets exceeds ``cap`` or ``k`` is out of range.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    total = math.comb(n, k)
    if total > cap:
        raise ValueError(f"{total} subsets exceed the enumeration cap of {cap}")

    P = pair_loss_matrix(X, exponent)
    subsets = np.array(list(combinations(range(n), k)), dtype=np.intp)
    values = np.zeros(subsets.shape[0])
    for a, b in combinations(range(k), 2):
        values += P[subsets[:, a], subsets[:, b]]
    best = int(np.argmin(values))
    return subsets[best].copy(), float(values[best])
