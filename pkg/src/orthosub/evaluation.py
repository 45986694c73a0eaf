"""Least-squares fitting on subsamples and the quality measures used to compare subsamplers."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .baselines import iboss_select, uniform_select
from .dataio import (
    DataMatrix,
    SyntheticSpec,
    expand_interactions,
    generate_covariates,
    generate_response,
    interaction_names,
    scale_to_unit,
)
from .oss import oss_select_batched

METHODS = ("uni", "iboss", "oss")
TABLE_COLUMNS = (
    "n", "p", "k", "method",
    "mse_slopes", "mse_intercept", "d_eff_mean", "a_eff_mean", "wall_time",
)
# Extra columns reported when the fitted model includes interactions.
INTERACTION_COLUMNS = ("mse_main", "mse_interaction")


class RankDeficiencyError(ValueError):
    """The design matrix does not have full column rank."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


@dataclass(frozen=True)
class FitResult:
    intercept: float
    slopes: np.ndarray
    used_adjusted_intercept: bool = False
    terms: tuple = ()

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([[self.intercept], self.slopes])


@dataclass(frozen=True)
class EfficiencyReport:
    d_eff: float
    a_eff: float
    log_det_Ms: float
    trace_Ms_inv: float

    def to_dict(self) -> dict:
        return {
            "d_eff": self.d_eff,
            "a_eff": self.a_eff,
            "log_det_Ms": self.log_det_Ms,
            "trace_Ms_inv": self.trace_Ms_inv,
        }


def model_terms(columns: Sequence[str], with_interactions: bool = False) -> list:
    """Coefficient names: ``intercept``, the covariates, then ``a:b`` products."""
    terms = ["intercept", *columns]
    if with_interactions:
        terms += interaction_names(columns)
    return terms


def design(X, with_interactions: bool = False) -> np.ndarray:
    """Covariate columns, with pairwise products appended when requested (no intercept)."""
    X = np.asarray(X, dtype=np.float64)
    if with_interactions:
        return np.hstack([X, expand_interactions(X)])
    return X


def _first_dependent_column(A) -> int:
    """Position of the first column lying in the span of the columns before it."""
    for j in range(1, A.shape[1]):
        if np.linalg.matrix_rank(A[:, : j + 1]) <= j:
            return j
    return A.shape[1] - 1


def ols_fit(X_s, y_s, with_interactions: bool = False, columns=None) -> FitResult:
    """Least squares with an intercept, solved by column-pivoted QR.

    Parameters
    ----------
    X_s : array-like of shape (k, p)
    y_s : array-like of shape (k,)
    with_interactions : bool
        Append all pairwise products of covariates to the design.
    columns : sequence of str, optional
        Covariate names used in error messages and ``FitResult.terms``.

    Raises
    ------
    RankDeficiencyError
        If the design is rank deficient; ``.term`` names the first design
        column (intercept, covariates, products) that is a linear
        combination of those before it.
    ValueError
        If there are not more rows than design columns.
    """
    X_s = np.asarray(X_s, dtype=np.float64)
    y_s = np.asarray(y_s, dtype=np.float64).ravel()
    if X_s.ndim != 2 or X_s.shape[0] != y_s.shape[0]:
        raise ValueError(f"X_s {X_s.shape} and y_s {y_s.shape} do not align")
    columns = list(columns) if columns is not None else [f"x{j + 1}" for j in range(X_s.shape[1])]
    terms = model_terms(columns, with_interactions)
    A = np.column_stack([np.ones(X_s.shape[0]), design(X_s, with_interactions)])
    rows, cols = A.shape
    if rows <= cols:
        raise ValueError(f"underdetermined fit: {rows} rows for {cols} coefficients")

    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(rows, cols) * np.finfo(float).eps
    rank = int(np.count_nonzero(diag > tol))
    if rank < cols:
        term = terms[_first_dependent_column(A)]
        raise RankDeficiencyError(
            f"design is rank deficient ({rank} < {cols}): term {term!r} is linearly dependent",
            term,
        )
    coef = np.empty(cols)
    coef[piv] = linalg.solve_triangular(R, Q.T @ y_s)
    return FitResult(float(coef[0]), coef[1:], False, tuple(terms))


def adjusted_intercept(y_bar, x_bar, slopes) -> float:
    """Intercept recovered from full-sample means: ``y_bar - x_bar . slopes``."""
    x_bar = np.asarray(x_bar, dtype=np.float64).ravel()
    slopes = np.asarray(slopes, dtype=np.float64).ravel()
    if x_bar.shape != slopes.shape:
        raise ValueError(f"means ({x_bar.size}) and slopes ({slopes.size}) differ in length")
    return float(y_bar - x_bar @ slopes)


def information_matrix(X_s) -> np.ndarray:
    """``A^T A`` for the intercept-augmented design ``A = [1, X_s]``, exactly symmetric."""
    X_s = np.asarray(X_s, dtype=np.float64)
    if X_s.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X_s.shape}")
    A = np.column_stack([np.ones(X_s.shape[0]), X_s])
    M = A.T @ A
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def _spectrum(M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"information matrix must be square, got shape {M.shape}")
    scale = max(np.max(np.abs(M)), 1.0)
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("information matrix is not symmetric")
    eig = linalg.eigvalsh(M)
    singular = eig[0] <= eig[-1] * M.shape[0] * np.finfo(float).eps * 10
    return eig, singular


def _dim(M, p):
    q = M.shape[0]
    if p is not None and p + 1 != q:
        raise ValueError(f"p={p} does not match a {q}x{q} information matrix")
    return q


def d_efficiency(M, k: int, p: Optional[int] = None) -> float:
    """``det(M)^(1/(p+1)) / k``; 0 for a singular matrix."""
    eig, singular = _spectrum(M)
    q = _dim(np.asarray(M), p)
    if singular:
        return 0.0
    return float(np.exp(np.sum(np.log(eig)) / q) / k)


def a_efficiency(M, k: int, p: Optional[int] = None) -> float:
    """``(p+1) / (k * trace(M^-1))``; 0 for a singular matrix."""
    eig, singular = _spectrum(M)
    q = _dim(np.asarray(M), p)
    if singular:
        return 0.0
    return float(q / (k * np.sum(1.0 / eig)))


def efficiency_report(X_s_scaled, with_interactions: bool = False) -> EfficiencyReport:
    """D- and A-efficiency of a scaled subsample relative to an orthogonal array."""
    Z = design(X_s_scaled, with_interactions)
    M = information_matrix(Z)
    k = Z.shape[0]
    eig, singular = _spectrum(M)
    if singular:
        return EfficiencyReport(0.0, 0.0, -np.inf, np.inf)
    q = M.shape[0]
    log_det = float(np.sum(np.log(eig)))
    trace_inv = float(np.sum(1.0 / eig))
    return EfficiencyReport(
        float(np.exp(log_det / q) / k), float(q / (k * trace_inv)), log_det, trace_inv
    )


def empirical_mse(estimates, truth) -> float:
    """Mean over repetitions of the squared Euclidean error."""
    truth = np.atleast_1d(np.asarray(truth, dtype=np.float64))
    est = np.asarray(estimates, dtype=np.float64)
    if est.ndim == 1 and truth.size == 1:
        est = est[:, None]
    if est.ndim != 2 or est.shape[0] == 0:
        raise ValueError("need at least one estimate vector")
    if est.shape[1] != truth.size:
        raise ValueError(f"estimates have dimension {est.shape[1]}, truth has {truth.size}")
    return float(np.mean(np.sum((est - truth) ** 2, axis=1)))


# ---------------------------------------------------------------------------
# Simulation and bootstrap drivers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkSpec:
    """A grid of simulated comparisons.

    ``fit_model`` defaults to ``model``; setting it to ``"first-order"`` on
    interaction data fits a deliberately mis-specified model.
    ``adjusted_intercept=False`` reports the raw least-squares intercept.
    """

    case: str = "uniform"
    n_grid: Sequence[int] = (5000, 10_000, 100_000)
    p: int = 50
    k: int = 1000
    T: int = 50
    methods: Sequence[str] = METHODS
    model: str = "first-order"
    fit_model: Optional[str] = None
    seed: int = 0
    exponent: int = 2
    n_batches: int = 1
    elimination: str = "harmonic"
    adjusted_intercept: bool = True
    beta0: float = 1.0
    noise_variance: float = 9.0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not len(self.n_grid):
            raise ValueError("n_grid must not be empty")
        if not len(self.methods):
            raise ValueError("methods must not be empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if any(self.k > n for n in self.n_grid):
            raise ValueError("k exceeds n for part of the grid")
        if self.fit_model is None:
            object.__setattr__(self, "fit_model", self.model)
        if self.fit_model == "interaction" and self.model != "interaction":
            raise ValueError("an interaction fit needs interaction data")
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "methods", tuple(self.methods))


def _stream(seed, *key):
    return np.random.SeedSequence([int(seed), *map(int, key)])


def select_indices(
    method, X, X_scaled, k, *, seed=None, exponent=2, n_batches=1,
    elimination="harmonic", iboss_design=None,
):
    """Dispatch to one of the subsamplers by name.

    IBOSS runs on ``iboss_design`` when given (the expanded design for
    interaction fits); OSS always runs on the scaled covariates alone.
    """
    if method == "uni":
        return uniform_select(X.shape[0], k, seed)
    if method == "iboss":
        return iboss_select(X if iboss_design is None else iboss_design, k)
    if method == "oss":
        return oss_select_batched(
            X_scaled, k, n_batches, exponent, elimination=elimination, seed=seed
        ).indices
    raise ValueError(f"unknown method {method!r}")


@dataclass
class _Record:
    coefs: list = field(default_factory=list)
    d_eff: list = field(default_factory=list)
    a_eff: list = field(default_factory=list)
    seconds: float = 0.0


def _evaluate_subsample(X, y, X_scaled, idx, fit_interactions, adjust, x_bar, y_bar):
    fit = ols_fit(X[idx], y[idx], fit_interactions)
    intercept = fit.intercept
    if adjust:
        intercept = adjusted_intercept(y_bar, x_bar, fit.slopes)
    eff = efficiency_report(X_scaled[idx], fit_interactions)
    return np.concatenate([[intercept], fit.slopes]), eff


def _one_repetition(spec: BenchmarkSpec, n: int, rep: int):
    data_seed = int(_stream(spec.seed, n, rep).generate_state(1)[0])
    syn = SyntheticSpec(
        case=spec.case, n=n, p=spec.p, seed=data_seed, model=spec.model,
        beta0=spec.beta0, noise_variance=spec.noise_variance,
    )
    X = generate_covariates(syn).values
    y = generate_response(X, syn)
    X_scaled, _ = scale_to_unit(X)
    fit_int = spec.fit_model == "interaction"
    x_bar = design(X, fit_int).mean(axis=0) if spec.adjusted_intercept else None
    y_bar = float(y.mean())
    iboss_design = design(X, True) if fit_int and "iboss" in spec.methods else None

    out = {}
    for m_id, method in enumerate(spec.methods):
        start = time.perf_counter()
        idx = select_indices(
            method, X, X_scaled, spec.k,
            seed=_stream(spec.seed, n, rep, 1000 + m_id),
            exponent=spec.exponent, n_batches=spec.n_batches,
            elimination=spec.elimination, iboss_design=iboss_design,
        )
        coef, eff = _evaluate_subsample(
            X, y, X_scaled, idx, fit_int, spec.adjusted_intercept, x_bar, y_bar
        )
        out[method] = (coef, eff, time.perf_counter() - start)
    return out


def _summarize(n, p, k, method, rec, truth, n_main):
    est = np.asarray(rec.coefs)
    row = {
        "n": n, "p": p, "k": k, "method": method,
        "mse_slopes": empirical_mse(est[:, 1:], truth[1:]),
        "mse_intercept": empirical_mse(est[:, 0], truth[:1]),
        "d_eff_mean": float(np.mean(rec.d_eff)),
        "a_eff_mean": float(np.mean(rec.a_eff)),
        "wall_time": rec.seconds / len(rec.coefs),
    }
    if est.shape[1] > 1 + n_main:
        row["mse_main"] = empirical_mse(est[:, 1 : 1 + n_main], truth[1 : 1 + n_main])
        row["mse_interaction"] = empirical_mse(est[:, 1 + n_main :], truth[1 + n_main :])
    return row


def run_benchmark(spec: BenchmarkSpec, n_jobs: Optional[int] = None) -> list:
    """Simulated comparison of subsamplers over ``spec.n_grid``.

    For every ``n`` and repetition a fresh dataset is drawn from the
    stream ``(seed, n, repetition)``; all methods see the same data. Fits
    use original-scale covariates, efficiencies the ``[-1, 1]`` scaled copy.

    Returns
    -------
    list of dict
        One row per ``(n, method)`` with the keys of ``TABLE_COLUMNS``
        (plus ``INTERACTION_COLUMNS`` when the fit includes interactions).
    """
    syn = SyntheticSpec(p=spec.p, model=spec.model, beta0=spec.beta0)
    truth = syn.coefficients
    if spec.fit_model == "first-order":
        truth = truth[: 1 + spec.p]

    rows = []
    for n in spec.n_grid:
        records = {m: _Record() for m in spec.methods}

        def rep_fn(rep, n=n):
            return _one_repetition(spec, n, rep)

        if n_jobs and n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as ex:
                results = list(ex.map(rep_fn, range(spec.T)))
        else:
            results = [rep_fn(rep) for rep in range(spec.T)]
        for res in results:
            for method, (coef, eff, seconds) in res.items():
                rec = records[method]
                rec.coefs.append(coef)
                rec.d_eff.append(eff.d_eff)
                rec.a_eff.append(eff.a_eff)
                rec.seconds += seconds
        for method in spec.methods:
            rows.append(_summarize(n, spec.p, spec.k, method, records[method], truth, spec.p))
    return rows


def run_bootstrap(
    data: DataMatrix,
    k,
    B: int = 100,
    methods: Sequence[str] = METHODS,
    seed: int = 0,
    exponent: int = 2,
) -> list:
    """Bootstrap MSE of subsample slope estimates on a real dataset.

    Each of the ``B`` bootstrap samples draws ``n`` rows with replacement;
    every method then selects ``k`` of them and fits least squares. The
    reference is the least-squares fit on the full data, since the true
    coefficients are unknown.

    Parameters
    ----------
    data : DataMatrix
        Must carry a response.
    k : int or sequence of int
        One or more subsample sizes.
    """
    if data.response is None:
        raise ValueError("bootstrap needs a response column")
    if B < 2:
        raise ValueError("bootstrap needs B >= 2 resamples")
    ks = [int(k)] if np.isscalar(k) else [int(v) for v in k]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
    X, y = data.values, data.response
    n, p = X.shape
    for kk in ks:
        if kk > n:
            raise ValueError(f"k exceeds n ({kk} > {n})")

    ref = ols_fit(X, y, columns=data.columns)
    truth = ref.coefficients
    records = {(kk, m): _Record() for kk in ks for m in methods}
    for b in range(B):
        rows = np.random.default_rng(_stream(seed, b)).integers(0, n, size=n)
        Xb, yb = X[rows], y[rows]
        Xb_scaled, _ = scale_to_unit(Xb)
        x_bar, y_bar = Xb.mean(axis=0), float(yb.mean())
        for kk in ks:
            for m_id, method in enumerate(methods):
                start = time.perf_counter()
                idx = select_indices(
                    method, Xb, Xb_scaled, kk,
                    seed=_stream(seed, b, kk, 1000 + m_id), exponent=exponent,
                )
                coef, eff = _evaluate_subsample(Xb, yb, Xb_scaled, idx, False, True, x_bar, y_bar)
                rec = records[(kk, method)]
                rec.coefs.append(coef)
                rec.d_eff.append(eff.d_eff)
                rec.a_eff.append(eff.a_eff)
                rec.seconds += time.perf_counter() - start
    return [
        _summarize(n, p, kk, method, records[(kk, method)], truth, p)
        for kk in ks
        for method in methods
    ]


def write_table(rows, path, fmt: str = "csv", timing: bool = True) -> None:
    """Write benchmark or bootstrap rows as CSV or JSON.

    With ``timing=False`` the ``wall_time`` column is written as 0 so that
    output files are byte-identical across runs with the same seed.
    """
    if not rows:
        raise ValueError("no rows to write")
    columns = list(TABLE_COLUMNS) + [c for c in INTERACTION_COLUMNS if c in rows[0]]
    clean = []
    for row in rows:
        rec = {c: row[c] for c in columns}
        if not timing:
            rec["wall_time"] = 0.0
        clean.append(rec)
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(clean, indent=2) + "\n", encoding="utf-8")
    elif fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for rec in clean:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in rec.values()])
    else:
        raise ValueError(f"unknown table format {fmt!r}")
