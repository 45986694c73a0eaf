"""Sequential orthogonal subsampling.

Selection starts from the row of largest norm and then alternates two
phases until ``k`` rows are chosen:

* election: every remaining candidate adds its pair loss against the row
  chosen last to an accumulated loss; the candidate with the smallest
  accumulated loss is chosen next;
* elimination: only the ``t_i`` candidates with the smallest accumulated
  loss survive to the next round.

With ``t_i = n / i`` the total work is ``O(n p log k)``.

Ties anywhere (largest initial norm, election minimum, elimination cut) go
to the larger squared norm and then to the smaller original row index, so
results never depend on array order or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ._selection import argmin_tiebreak, smallest_m
from .discrepancy import check_exponent, total_discrepancy

ELIMINATION_SCHEDULES = ("harmonic", "none")
SCALE_TOLERANCE = 1e-9


@dataclass
class CandidatePool:
    """Mutable selection state over the rows not yet chosen or discarded.

    Arrays are aligned with each other; their order is arbitrary and is
    never used to break ties.

    Attributes
    ----------
    index : ndarray of int
        Original row index of each active candidate.
    signs : ndarray of float32, shape (m, p)
        Entry signs (-1, 0, +1) of the active candidates.
    nonzero : ndarray of float32 or None
        Nonzero indicators, kept only when the data contain exact zeros.
    sq_norms : ndarray of float64
        Squared Euclidean norm of each active candidate.
    loss : ndarray of float64
        Accumulated loss of each active candidate against the chosen rows.
    selected : list of int
        Chosen original row indices, in order.
    step_losses : list of float
        Accumulated loss of each chosen row at the time it was chosen; the
        first row contributes 0. Their sum is the discrepancy of the
        selection.
    visits : int
        Total number of candidate evaluations across all elections.
    """

    index: np.ndarray
    signs: np.ndarray
    nonzero: Optional[np.ndarray]
    sq_norms: np.ndarray
    loss: np.ndarray
    p: int
    selected: List[int] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    visits: int = 0
    _last_sign: Optional[np.ndarray] = None
    _last_nonzero: Optional[np.ndarray] = None
    _last_sq: float = 0.0

    @classmethod
    def from_scaled(cls, X, index=None) -> "CandidatePool":
        X = np.asarray(X, dtype=np.float64)
        n, p = X.shape
        index = np.arange(n) if index is None else np.asarray(index, dtype=np.intp)
        has_zeros = not np.all(X != 0)
        return cls(
            index=index.copy(),
            signs=np.sign(X).astype(np.float32),
            nonzero=(X != 0).astype(np.float32) if has_zeros else None,
            sq_norms=np.einsum("ij,ij->i", X, X),
            loss=np.zeros(n),
            p=p,
        )

    @property
    def size(self) -> int:
        return self.index.shape[0]

    def _take(self, pos):
        """Move the candidate at ``pos`` from the pool to the selection."""
        original = int(self.index[pos])
        self._last_sign = self.signs[pos].copy()
        self._last_nonzero = None if self.nonzero is None else self.nonzero[pos].copy()
        self._last_sq = float(self.sq_norms[pos])
        self.step_losses.append(float(self.loss[pos]))
        self.selected.append(original)

        end = self.size - 1
        arrays = ["index", "signs", "sq_norms", "loss"]
        if self.nonzero is not None:
            arrays.append("nonzero")
        for name in arrays:
            arr = getattr(self, name)
            if pos != end:
                arr[pos] = arr[end]
            setattr(self, name, arr[:end])
        return original

    def _keep(self, positions):
        self.index = self.index[positions]
        self.signs = self.signs[positions]
        self.sq_norms = self.sq_norms[positions]
        self.loss = self.loss[positions]
        if self.nonzero is not None:
            self.nonzero = self.nonzero[positions]


def select_initial(pool: CandidatePool) -> int:
    """Choose the row of largest norm and reset every accumulated loss to 0."""
    if pool.selected:
        raise RuntimeError("the initial row has already been chosen")
    if pool.size == 0:
        raise ValueError("cannot select from an empty pool")
    pos = argmin_tiebreak(-pool.sq_norms, pool.index)
    pool.loss[:] = 0.0
    return pool._take(pos)


def _losses_against_last(pool: CandidatePool, exponent: int) -> np.ndarray:
    # signs @ s = (#agree - #disagree) over coordinates nonzero in both rows;
    # nonzero @ z = (#agree + #disagree).
    signed = pool.signs @ pool._last_sign
    if pool.nonzero is None:
        both = pool.p
    else:
        both = pool.nonzero @ pool._last_nonzero
    agree = (signed.astype(np.float64) + both) / 2.0
    base = pool.p - pool.sq_norms / 2.0 - pool._last_sq / 2.0 + agree
    return base**exponent


def election_step(pool: CandidatePool, exponent: int = 2) -> int:
    """Add each candidate's loss against the last chosen row, then choose the minimum.

    Returns the original index of the chosen row.
    """
    if not pool.selected:
        raise RuntimeError("select_initial must run before election_step")
    if pool.size == 0:
        raise ValueError("no candidates left to elect")
    pool.loss += _losses_against_last(pool, exponent)
    pool.visits += pool.size
    pos = argmin_tiebreak(pool.loss, -pool.sq_norms, pool.index)
    return pool._take(pos)


def elimination_budget(n: int, k: int, i: int) -> int:
    """Number of candidates kept after the ``i``-th election.

    ``n / i`` when ``n >= k^2``, otherwise ``n / i^(r - 1)`` with
    ``r = log n / log k``; floored, and never below ``k - i`` so the
    remaining elections always have candidates.
    """
    if i < 2:
        raise ValueError("elimination starts after the second selection (i >= 2)")
    if n >= k * k:
        value = n / i
    else:
        r = math.log(n) / math.log(k)
        value = n / i ** (r - 1.0)
    # Guards against pow() landing one ulp below an exact integer.
    t = math.floor(value * (1.0 + 1e-12))
    return max(t, k - i)


def eliminate(pool: CandidatePool, t: int) -> None:
    """Keep only the ``t`` candidates with the smallest accumulated loss."""
    if t < 1:
        raise ValueError("elimination must keep at least one candidate")
    if pool.size <= t:
        return
    pool._keep(smallest_m(pool.loss, t, -pool.sq_norms, pool.index))


@dataclass(frozen=True)
class SubsampleResult:
    """Outcome of a subsample selection.

    Attributes
    ----------
    indices : ndarray of int
        Selected original row indices, in selection order (batches
        concatenated in batch order).
    discrepancy : float or None
        Total discrepancy of the selected rows (None for k < 2 or
        non-OSS selectors).
    step_losses : ndarray or None
        Loss each row added when chosen.
    visits : int
        Candidate evaluations performed.
    groups : tuple of ndarray or None
        Per-batch indices for batched selection.
    """

    indices: np.ndarray
    discrepancy: Optional[float] = None
    step_losses: Optional[np.ndarray] = None
    visits: int = 0
    groups: Optional[tuple] = None

    @property
    def k(self) -> int:
        return int(self.indices.shape[0])


def check_scaled(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    if X.size and np.max(np.abs(X)) > 1.0 + SCALE_TOLERANCE:
        raise ValueError("input is not scaled to [-1, 1]; scale covariates first")
    return X


def _check_k(k, n):
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > n:
        raise ValueError(f"k exceeds n ({k} > {n})")
    return int(k)


def _run(X, k, exponent, elimination, index=None):
    n = X.shape[0]
    pool = CandidatePool.from_scaled(X, index)
    select_initial(pool)
    for i in range(2, k + 1):
        election_step(pool, exponent)
        if elimination == "harmonic" and i < k:
            eliminate(pool, elimination_budget(n, k, i))
    return pool


def oss_select(X, k: int, exponent: int = 2, elimination: str = "harmonic") -> SubsampleResult:
    """Select ``k`` rows of a scaled matrix that approximate an orthogonal array.

    Parameters
    ----------
    X : array-like of shape (n, p)
        Covariates already scaled to ``[-1, 1]``.
    k : int
        Subsample size, ``1 <= k <= n``.
    exponent : {2, 4}
        Power in the pair loss; 4 targets arrays of strength 4.
    elimination : {"harmonic", "none"}
        ``"harmonic"`` prunes candidates with the ``n / i`` style schedule of
        :func:`elimination_budget`, so total work grows like ``n H(k)``;
        ``"none"`` keeps every candidate.

    Returns
    -------
    SubsampleResult
    """
    X = check_scaled(X)
    k = _check_k(k, X.shape[0])
    exponent = check_exponent(exponent)
    if elimination not in ELIMINATION_SCHEDULES:
        raise ValueError(f"elimination must be one of {ELIMINATION_SCHEDULES}")
    pool = _run(X, k, exponent, elimination)
    indices = np.asarray(pool.selected, dtype=np.intp)
    disc = total_discrepancy(X[indices], exponent) if k >= 2 else None
    return SubsampleResult(indices, disc, np.asarray(pool.step_losses), pool.visits)


def batch_partition(n: int, n_batches: int, seed=None) -> List[np.ndarray]:
    """Split ``range(n)`` into contiguous blocks of a seeded shuffle.

    Block sizes differ by at most one; each block is returned sorted.
    """
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(block) for block in np.array_split(perm, n_batches)]


def oss_select_batched(
    X,
    k: int,
    n_batches: int,
    exponent: int = 2,
    elimination: str = "harmonic",
    seed=None,
    n_jobs: Optional[int] = None,
) -> SubsampleResult:
    """Run :func:`oss_select` independently on ``n_batches`` disjoint row blocks.

    Batch ``b`` contributes ``k // n_batches`` rows, plus one for the first
    ``k % n_batches`` batches. Batches may run concurrently (``n_jobs``
    threads); results are merged in batch order, so the output does not
    depend on scheduling.
    """
    X = check_scaled(X)
    n = X.shape[0]
    k = _check_k(k, n)
    exponent = check_exponent(exponent)
    if elimination not in ELIMINATION_SCHEDULES:
        raise ValueError(f"elimination must be one of {ELIMINATION_SCHEDULES}")
    if n_batches < 1:
        raise ValueError("n_batches must be at least 1")
    if n_batches > k:
        raise ValueError(f"more batches than rows to select ({n_batches} > {k})")
    if n_batches == 1:
        return oss_select(X, k, exponent, elimination)

    blocks = batch_partition(n, n_batches, seed)
    sizes = [k // n_batches + (b < k % n_batches) for b in range(n_batches)]
    for block, size in zip(blocks, sizes):
        if block.size < size:
            raise ValueError(f"a batch of {block.size} rows cannot supply {size} selections")

    def work(b):
        return _run(X[blocks[b]], sizes[b], exponent, elimination, index=blocks[b])

    workers = n_jobs if n_jobs and n_jobs > 0 else 1
    if workers == 1:
        pools = [work(b) for b in range(n_batches)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            pools = list(ex.map(work, range(n_batches)))

    groups = tuple(np.asarray(pl.selected, dtype=np.intp) for pl in pools)
    indices = np.concatenate(groups)
    disc = total_discrepancy(X[indices], exponent) if k >= 2 else None
    return SubsampleResult(
        indices,
        disc,
        np.concatenate([pl.step_losses for pl in pools]),
        sum(pl.visits for pl in pools),
        groups,
    )
