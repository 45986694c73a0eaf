"""scikit-learn compatible wrappers around the subsamplers and the subsample regression."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import iboss_select, uniform_select
from .dataio import UnitScaler
from .evaluation import adjusted_intercept, design, efficiency_report, ols_fit
from .oss import oss_select_batched


class _BaseSubsampler(BaseEstimator):
    """Row selector: ``fit`` chooses ``indices_``; the other methods apply them."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.n_samples_fit_ = X.shape[0]
        self.indices_ = np.asarray(self._select(X), dtype=np.intp)
        return self

    def get_support(self, indices: bool = False):
        """Boolean mask over the fitted rows, or the selected indices."""
        check_is_fitted(self, "indices_")
        if indices:
            return self.indices_.copy()
        mask = np.zeros(self.n_samples_fit_, dtype=bool)
        mask[self.indices_] = True
        return mask

    def transform(self, X):
        """Selected rows of ``X`` (which must be the data passed to ``fit``)."""
        check_is_fitted(self, "indices_")
        X = check_array(X, dtype=np.float64)
        if X.shape[0] != self.n_samples_fit_:
            raise ValueError(
                f"X has {X.shape[0]} rows; the subsample was fitted on {self.n_samples_fit_}"
            )
        return X[self.indices_]

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

    def fit_resample(self, X, y):
        """Fit on ``X`` and return the selected ``(X, y)`` rows."""
        X, y = check_X_y(X, y, dtype=np.float64)
        self.fit(X)
        return X[self.indices_], y[self.indices_]


class OrthogonalSubsampler(_BaseSubsampler):
    """Select ``k`` rows that best approximate a two-level orthogonal array.

    Covariates are scaled to ``[-1, 1]`` with their sample ranges before
    selection, unless ``scale=False`` (data already scaled).

    Parameters
    ----------
    k : int
        Subsample size.
    exponent : {2, 4}, default=2
        Pair-loss power; 4 targets models with two-factor interactions.
    elimination : {"harmonic", "none"}, default="harmonic"
        Candidate pruning schedule.
    n_batches : int, default=1
        Number of disjoint row batches processed independently.
    random_state : int, optional
        Seed for the batch partition (unused when ``n_batches == 1``).
    n_jobs : int, optional
        Threads used for batches.
    scale : bool, default=True

    Attributes
    ----------
    indices_ : ndarray of int
        Selected rows in selection order.
    discrepancy_ : float or None
    result_ : SubsampleResult
    scaler_ : UnitScaler or None
    """

    def __init__(
        self,
        k=100,
        exponent=2,
        elimination="harmonic",
        n_batches=1,
        random_state=None,
        n_jobs=None,
        scale=True,
    ):
        self.k = k
        self.exponent = exponent
        self.elimination = elimination
        self.n_batches = n_batches
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.scale = scale

    def _select(self, X):
        if self.scale:
            self.scaler_ = UnitScaler().fit(X)
            Z = self.scaler_.transform(X)
        else:
            self.scaler_ = None
            Z = X
        self.result_ = oss_select_batched(
            Z, self.k, self.n_batches, self.exponent,
            elimination=self.elimination, seed=self.random_state, n_jobs=self.n_jobs,
        )
        self.discrepancy_ = self.result_.discrepancy
        return self.result_.indices


class UniformSubsampler(_BaseSubsampler):
    """``k`` rows drawn uniformly at random without replacement."""

    def __init__(self, k=100, random_state=None):
        self.k = k
        self.random_state = random_state

    def _select(self, X):
        return uniform_select(X.shape[0], self.k, self.random_state)


class IBOSSSubsampler(_BaseSubsampler):
    """``k`` rows with extreme covariate values, ``k // (2p)`` per side per covariate."""

    def __init__(self, k=100):
        self.k = k

    def _select(self, X):
        return iboss_select(X, self.k)


class SubsampleRegressor(RegressorMixin, BaseEstimator):
    """Linear regression fitted on a subsample chosen by ``subsampler``.

    Slopes come from least squares on the selected rows. The intercept is
    by default recovered from full-sample means, ``mean(y) - mean(X) @ coef_``,
    which is far more accurate than the subsample intercept for selectors
    that favour extreme rows.

    Parameters
    ----------
    subsampler : estimator, default=None
        Any of the subsamplers in this module; ``None`` means
        ``OrthogonalSubsampler(k=100)``.
    interactions : bool, default=False
        Include all pairwise covariate products as regressors.
    adjust_intercept : bool, default=True

    Attributes
    ----------
    coef_ : ndarray
        Slopes, main effects first then products in lexicographic pair order.
    intercept_ : float
    subsample_indices_ : ndarray of int
    efficiency_ : EfficiencyReport
        D/A-efficiency of the subsample on the ``[-1, 1]`` scaled covariates.
    """

    def __init__(self, subsampler=None, interactions=False, adjust_intercept=True):
        self.subsampler = subsampler
        self.interactions = interactions
        self.adjust_intercept = adjust_intercept

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        sub = OrthogonalSubsampler() if self.subsampler is None else self.subsampler
        self.subsampler_ = clone(sub).fit(X)
        idx = self.subsampler_.indices_
        fit = ols_fit(X[idx], y[idx], self.interactions)
        self.coef_ = fit.slopes
        if self.adjust_intercept:
            x_bar = design(X, self.interactions).mean(axis=0)
            self.intercept_ = adjusted_intercept(float(y.mean()), x_bar, fit.slopes)
        else:
            self.intercept_ = fit.intercept
        self.subsample_indices_ = idx
        Z = UnitScaler().fit_transform(X)
        self.efficiency_ = efficiency_report(Z[idx], self.interactions)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return design(X, self.interactions) @ self.coef_ + self.intercept_
