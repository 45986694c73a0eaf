"""Deterministic partial selection.

Every selection in the package (election argmin, elimination cut, IBOSS
extremes) orders candidates by a primary key and breaks exact ties by
secondary keys, so the winner never depends on array order or on how a
scan was partitioned.
"""

import numpy as np


def _order(positions, tiebreak):
    # np.lexsort sorts by the last key first.
    keys = [k[positions] for k in reversed(tiebreak)]
    return positions[np.lexsort(keys)]


def argmin_tiebreak(values, *tiebreak):
    """Position of the smallest entry of ``values``.

    Ties on ``values`` are resolved by the ``tiebreak`` arrays, compared in
    order (each ascending).
    """
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("argmin of an empty array")
    best = values.min()
    tied = np.flatnonzero(values == best)
    if tied.size == 1 or not tiebreak:
        return int(tied[0])
    return int(_order(tied, tiebreak)[0])


def smallest_m(values, m, *tiebreak):
    """Positions of the ``m`` smallest entries of ``values``.

    Runs in expected linear time via ``np.partition``; only entries tied
    with the cut value are sorted, by the ``tiebreak`` arrays. The returned
    positions are in no particular order.

    Parameters
    ----------
    values : ndarray of shape (n,)
    m : int
        Number of positions to keep. ``m >= n`` returns every position.
    *tiebreak : ndarray of shape (n,)
        Secondary keys, most significant first, all ascending.
    """
    values = np.asarray(values)
    n = values.shape[0]
    if m >= n:
        return np.arange(n)
    if m <= 0:
        return np.empty(0, dtype=np.intp)
    cut = np.partition(values, m - 1)[m - 1]
    below = np.flatnonzero(values < cut)
    need = m - below.size
    tied = np.flatnonzero(values == cut)
    if tied.size > need:
        tied = _order(tied, tiebreak)[:need] if tiebreak else tied[:need]
    return np.concatenate([below, tied])
