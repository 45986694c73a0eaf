"""Loading, validating, scaling and synthesizing covariate data."""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator, OneToOneFeatureMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

CASES = ("uniform", "normal", "truncated-normal")
MODELS = ("first-order", "interaction")

# Correlation between every pair of covariates in the normal cases.
NORMAL_CORRELATION = 0.5
TRUNCATION_BOUND = 5.0


@dataclass(frozen=True)
class DataMatrix:
    """An n x p covariate table with an optional response vector.

    Attributes
    ----------
    values : ndarray of shape (n, p)
    response : ndarray of shape (n,) or None
    columns : tuple of str
        Covariate names; defaults to ``x1 .. xp``.
    response_name : str or None
    """

    values: np.ndarray
    response: Optional[np.ndarray] = None
    columns: tuple = ()
    response_name: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        n, p = values.shape
        if n < 1 or p < 1:
            raise ValueError(f"need at least one row and one column, got {values.shape}")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise ValueError(f"non-finite value at row {i}, column {j}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

        if self.response is not None:
            y = np.array(self.response, dtype=np.float64, copy=True).ravel()
            if y.shape[0] != n:
                raise ValueError(f"response has length {y.shape[0]}, expected {n}")
            if not np.all(np.isfinite(y)):
                raise ValueError(f"non-finite response at row {int(np.argmin(np.isfinite(y)))}")
            y.flags.writeable = False
            object.__setattr__(self, "response", y)

        columns = tuple(self.columns) or tuple(f"x{j + 1}" for j in range(p))
        if len(columns) != p:
            raise ValueError(f"{len(columns)} column names for {p} columns")
        object.__setattr__(self, "columns", columns)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def take(self, indices) -> "DataMatrix":
        """Rows ``indices`` as a new DataMatrix."""
        indices = np.asarray(indices, dtype=np.intp)
        y = None if self.response is None else self.response[indices]
        return DataMatrix(self.values[indices], y, self.columns, self.response_name)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _resolve_column(response_col, header, width):
    if response_col is None:
        return None
    if isinstance(response_col, str) and header is not None and response_col in header:
        return header.index(response_col)
    try:
        j = int(response_col)
    except (TypeError, ValueError):
        raise ValueError(f"response column {response_col!r} not found") from None
    if not -width <= j < width:
        raise ValueError(f"response column index {j} out of range for {width} columns")
    return j % width


def load_csv(path, has_header: bool = False, response_col=None) -> DataMatrix:
    """Read a comma-delimited numeric table.

    Parameters
    ----------
    path : str or Path
    has_header : bool
        Whether the first line holds column names.
    response_col : str or int, optional
        Name (requires a header) or 0-based position of the response column.
        Negative positions count from the end.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    ValueError
        On an empty file, ragged rows, or a cell that is not a finite number.
        The message names the offending line and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    header = None
    if has_header and rows:
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    width = len(header) if header is not None else len(rows[0])
    first_line = 2 if has_header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: line {i + first_line} has {len(row)} fields, expected {width}"
            )
    names = header or [f"x{j + 1}" for j in range(width)]

    try:
        table = np.array(rows, dtype=np.float64)
        bad = np.argwhere(~np.isfinite(table))
    except ValueError:
        table = None
        bad = None
    if table is None or bad.size:
        for i, row in enumerate(rows):
            for j, cell in enumerate(row):
                try:
                    ok = math.isfinite(float(cell))
                except ValueError:
                    ok = False
                if not ok:
                    raise ValueError(
                        f"{path}: line {i + first_line}, column {names[j]!r}: "
                        f"{cell!r} is not a finite number"
                    )

    j_resp = _resolve_column(response_col, header, width)
    if j_resp is None:
        return DataMatrix(table, None, tuple(names))
    keep = [j for j in range(width) if j != j_resp]
    if not keep:
        raise ValueError(f"{path}: no covariate columns besides the response")
    return DataMatrix(
        table[:, keep],
        table[:, j_resp],
        tuple(names[j] for j in keep),
        names[j_resp],
    )


def write_csv(path, data: Union[DataMatrix, np.ndarray], header: bool = True) -> None:
    """Write covariates (and the response, last) as CSV with full float precision."""
    if not isinstance(data, DataMatrix):
        data = DataMatrix(np.asarray(data))
    table = data.values
    names = list(data.columns)
    if data.response is not None:
        table = np.column_stack([table, data.response])
        names.append(data.response_name or "y")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(names)
        for row in table:
            writer.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingTransform:
    """Per-column affine map of ``[min_j, max_j]`` onto ``[-1, 1]``."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D arrays of equal length")
        if np.any(mins > maxs):
            raise ValueError("every column needs min <= max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @classmethod
    def from_data(cls, X, columns: Optional[Sequence[str]] = None) -> "ScalingTransform":
        X = np.asarray(X, dtype=np.float64)
        mins, maxs = X.min(axis=0), X.max(axis=0)
        constant = np.flatnonzero(maxs <= mins)
        if constant.size:
            j = int(constant[0])
            name = columns[j] if columns is not None else f"index {j}"
            raise ValueError(f"constant column {name}: cannot scale to [-1, 1]")
        return cls(mins, maxs)

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return 2.0 * (X - self.mins) / (self.maxs - self.mins) - 1.0

    def invert(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        return self.mins + (Z + 1.0) / 2.0 * (self.maxs - self.mins)

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d) -> "ScalingTransform":
        return cls(np.asarray(d["mins"]), np.asarray(d["maxs"]))


def scale_to_unit(X):
    """Scale every covariate to ``[-1, 1]``.

    Returns ``(scaled, transform)``; ``scaled`` is a DataMatrix when ``X`` is
    one (response carried through unchanged) and an ndarray otherwise.
    Constant columns raise ``ValueError``.
    """
    if isinstance(X, DataMatrix):
        tf = ScalingTransform.from_data(X.values, X.columns)
        scaled = DataMatrix(tf.apply(X.values), X.response, X.columns, X.response_name)
        return scaled, tf
    tf = ScalingTransform.from_data(X)
    return tf.apply(X), tf


class UnitScaler(OneToOneFeatureMixin, TransformerMixin, BaseEstimator):
    """Min-max scaler onto ``[-1, 1]`` that refuses constant columns.

    Unlike ``sklearn.preprocessing.MinMaxScaler`` a constant column is an
    error rather than silently mapped to a fixed value, since it would carry
    no regression information.

    Attributes
    ----------
    transform_ : ScalingTransform
    n_features_in_ : int
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.transform_ = ScalingTransform.from_data(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "transform_")
        X = check_array(X, dtype=np.float64)
        return self.transform_.apply(X)

    def inverse_transform(self, X):
        check_is_fitted(self, "transform_")
        X = check_array(X, dtype=np.float64)
        return self.transform_.invert(X)


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------


def n_interactions(p: int) -> int:
    return p * (p - 1) // 2


def interaction_names(columns: Sequence[str]) -> list:
    return [f"{a}:{b}" for a, b in combinations(columns, 2)]


def expand_interactions(X):
    """All pairwise products of columns, pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    values = np.asarray(X, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValueError("interactions need at least two columns")
    i, j = np.triu_indices(values.shape[1], k=1)
    products = values[:, i] * values[:, j]
    if isinstance(X, DataMatrix):
        return DataMatrix(products, None, tuple(interaction_names(X.columns)))
    return products


@dataclass(frozen=True)
class SyntheticSpec:
    """Settings for a simulated regression dataset.

    ``slopes`` and ``interaction_effects`` default to vectors of ones, the
    setting used for all simulated comparisons.
    """

    case: str = "uniform"
    n: int = 1000
    p: int = 2
    seed: int = 0
    model: str = "first-order"
    beta0: float = 1.0
    slopes: Optional[Sequence[float]] = None
    interaction_effects: Optional[Sequence[float]] = None
    noise_variance: float = 9.0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}, got {self.case!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")
        slopes = np.ones(self.p) if self.slopes is None else np.asarray(self.slopes, float)
        if slopes.shape != (self.p,):
            raise ValueError(f"slopes must have length p={self.p}, got {slopes.shape}")
        object.__setattr__(self, "slopes", slopes)

        effects = self.interaction_effects
        if self.model == "interaction":
            if self.p < 2:
                raise ValueError("the interaction model needs p >= 2")
            m = n_interactions(self.p)
            effects = np.ones(m) if effects is None else np.asarray(effects, float)
            if effects.shape != (m,):
                raise ValueError(f"interaction_effects must have length {m}, got {effects.shape}")
        elif effects is not None:
            raise ValueError("interaction_effects given for a first-order model")
        object.__setattr__(self, "interaction_effects", effects)

    @property
    def coefficients(self) -> np.ndarray:
        """True ``(intercept, slopes[, interaction effects])``."""
        parts = [[self.beta0], self.slopes]
        if self.interaction_effects is not None:
            parts.append(self.interaction_effects)
        return np.concatenate(parts)


def normal_covariance(p: int) -> np.ndarray:
    """Unit variances with a common off-diagonal correlation."""
    cov = np.full((p, p), NORMAL_CORRELATION)
    np.fill_diagonal(cov, 1.0)
    return cov


def _normal_rows(rng, m, chol):
    return rng.standard_normal((m, chol.shape[0])) @ chol.T


def generate_covariates(spec: SyntheticSpec) -> DataMatrix:
    """Draw ``spec.n`` covariate rows; bitwise reproducible per ``spec.seed``."""
    rng = np.random.default_rng([spec.seed, 0])
    n, p = spec.n, spec.p
    if spec.case == "uniform":
        return DataMatrix(rng.uniform(-1.0, 1.0, size=(n, p)))

    chol = np.linalg.cholesky(normal_covariance(p))
    if spec.case == "normal":
        return DataMatrix(_normal_rows(rng, n, chol))

    # Whole rows are redrawn so the within-row correlation is kept.
    kept = []
    have = 0
    while have < n:
        block = _normal_rows(rng, max(n - have, 64), chol)
        block = block[np.all(np.abs(block) <= TRUNCATION_BOUND, axis=1)]
        kept.append(block)
        have += block.shape[0]
    return DataMatrix(np.concatenate(kept)[:n])


def generate_response(X, spec: SyntheticSpec) -> np.ndarray:
    """Response from the linear model (with pairwise interactions when requested)."""
    values = np.asarray(X, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != spec.p:
        raise ValueError(f"X must have p={spec.p} columns, got shape {values.shape}")
    rng = np.random.default_rng([spec.seed, 1])
    mean = spec.beta0 + values @ spec.slopes
    if spec.model == "interaction":
        mean = mean + expand_interactions(values) @ spec.interaction_effects
    noise = rng.standard_normal(values.shape[0]) * math.sqrt(spec.noise_variance)
    return mean + noise


def make_dataset(spec: SyntheticSpec) -> DataMatrix:
    """Covariates plus response for ``spec``."""
    X = generate_covariates(spec)
    return DataMatrix(X.values, generate_response(X, spec), X.columns, "y")


_SPEC_KEYS = {
    "case": str,
    "n": int,
    "p": int,
    "seed": int,
    "model": str,
    "beta0": float,
    "sigma2": float,
    "slopes": str,
    "interactions": str,
}


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def load_spec_file(path) -> SyntheticSpec:
    """Parse a flat ``key = value`` file into a SyntheticSpec.

    Recognised keys: case, n, p, seed, model, beta0, sigma2, slopes,
    interactions. Vectors are comma or space separated. Lines starting with
    ``#`` are comments.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string("[spec]\n" + Path(path).read_text(encoding="utf-8"))
    raw = dict(parser["spec"])
    unknown = set(raw) - set(_SPEC_KEYS)
    if unknown:
        raise ValueError(f"unknown synthetic-spec keys: {sorted(unknown)}")
    kw = {}
    for key, value in raw.items():
        if key == "sigma2":
            kw["noise_variance"] = float(value)
        elif key == "slopes":
            kw["slopes"] = _floats(value)
        elif key == "interactions":
            kw["interaction_effects"] = _floats(value)
        else:
            kw[key] = _SPEC_KEYS[key](value)
    return SyntheticSpec(**kw)
