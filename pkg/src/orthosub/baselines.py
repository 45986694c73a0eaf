"""Comparison subsamplers: uniform random sampling and IBOSS.

IBOSS (information-based optimal subdata selection) sweeps the covariates
and, for each, takes the ``r = k // (2p)`` not-yet-chosen rows with the
smallest values and the ``r`` with the largest. Rows already chosen for an
earlier covariate are skipped, so the next most extreme row is taken
instead. When ``2 p r < k`` the remaining rows are filled one extreme at a
time: a pass over the covariates alternating min, max, min, ... by
covariate position, followed if needed by a pass with the sides swapped.
"""

import numpy as np

from ._selection import smallest_m


def _check(n, k):
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > n:
        raise ValueError(f"k exceeds n ({k} > {n})")
    return int(k)


def uniform_select(n: int, k: int, seed=None) -> np.ndarray:
    """``k`` distinct indices from ``range(n)`` drawn uniformly without replacement."""
    k = _check(n, k)
    return np.random.default_rng(seed).choice(n, size=k, replace=False)


def _take_extreme(column, taken, m, largest):
    """Mark and return the ``m`` most extreme untaken rows of ``column``.

    Ties go to the smaller row index.
    """
    keys = -column if largest else column.copy()
    keys[taken] = np.inf
    chosen = smallest_m(keys, m, np.arange(column.shape[0]))
    chosen = chosen[np.isfinite(keys[chosen])]
    chosen = np.sort(chosen)
    taken[chosen] = True
    return chosen


def iboss_select(X, k: int) -> np.ndarray:
    """Deterministic extreme-value subsample of ``k`` rows.

    Parameters
    ----------
    X : array-like of shape (n, p)
        Covariates on any scale (only their ordering matters).
    k : int
        Subsample size, ``k <= n``. Values below ``2 p`` leave some
        covariates without a dedicated extreme.

    Returns
    -------
    ndarray of int
        Row indices, grouped by covariate in sweep order.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    n, p = X.shape
    k = _check(n, k)
    taken = np.zeros(n, dtype=bool)
    picks = []

    r = k // (2 * p)
    if r:
        for j in range(p):
            picks.append(_take_extreme(X[:, j], taken, r, largest=False))
            picks.append(_take_extreme(X[:, j], taken, r, largest=True))

    remainder = k - sum(len(c) for c in picks)
    sweep = 0
    while remainder > 0:
        for j in range(p):
            if remainder == 0:
                break
            largest = (j + sweep) % 2 == 1
            got = _take_extreme(X[:, j], taken, 1, largest)
            picks.append(got)
            remainder -= got.size
        sweep += 1
    return np.concatenate(picks).astype(np.intp)
