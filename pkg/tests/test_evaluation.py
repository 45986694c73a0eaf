import csv
import json

import numpy as np
import pytest
from conftest import OA_4x3, oa_8x4
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orthosub.dataio import DataMatrix, SyntheticSpec, make_dataset
from orthosub.evaluation import (
    TABLE_COLUMNS,
    BenchmarkSpec,
    RankDeficiencyError,
    a_efficiency,
    adjusted_intercept,
    d_efficiency,
    efficiency_report,
    empirical_mse,
    information_matrix,
    ols_fit,
    run_benchmark,
    run_bootstrap,
    write_table,
)


class TestOls:
    def test_noiseless_interpolation(self):
        X = np.random.default_rng(0).normal(size=(10, 2))
        fit = ols_fit(X, 1 + X[:, 0] + X[:, 1])
        assert fit.intercept == pytest.approx(1, abs=1e-10)
        np.testing.assert_allclose(fit.slopes, [1, 1], atol=1e-10)
        assert fit.terms == ("intercept", "x1", "x2")

    def test_matches_lstsq(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(40, 5))
        y = rng.normal(size=40)
        A = np.column_stack([np.ones(40), X])
        ref = np.linalg.lstsq(A, y, rcond=None)[0]
        np.testing.assert_allclose(ols_fit(X, y).coefficients, ref, rtol=1e-10, atol=1e-12)

    def test_interactions(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(-1, 1, size=(30, 3))
        y = 2 + X @ [1, 2, 3] + 0.5 * X[:, 0] * X[:, 1] - X[:, 1] * X[:, 2]
        fit = ols_fit(X, y, with_interactions=True, columns=["a", "b", "c"])
        np.testing.assert_allclose(fit.coefficients, [2, 1, 2, 3, 0.5, 0, -1], atol=1e-10)
        assert fit.terms[-3:] == ("a:b", "a:c", "b:c")

    def test_duplicated_column(self):
        X = np.random.default_rng(3).normal(size=(10, 2))
        X = np.column_stack([X, X[:, 0]])
        with pytest.raises(RankDeficiencyError) as info:
            ols_fit(X, np.ones(10))
        assert info.value.term == "x3"

    def test_constant_covariate_collides_with_intercept(self):
        X = np.column_stack([np.full(8, 2.0), np.arange(8.0)])
        with pytest.raises(RankDeficiencyError, match="linearly dependent") as info:
            ols_fit(X, np.arange(8.0), columns=["c", "t"])
        assert info.value.term == "c"

    def test_underdetermined(self):
        with pytest.raises(ValueError, match="underdetermined"):
            ols_fit(np.ones((3, 3)), np.ones(3))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 6), st.floats(-100, 100))
    def test_residuals_orthogonal_and_translation(self, seed, p, shift):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-3, 3, size=(p + 12, p))
        y = rng.normal(size=p + 12)
        fit = ols_fit(X, y)
        A = np.column_stack([np.ones(len(y)), X])
        r = y - A @ fit.coefficients
        assert np.all(np.abs(A.T @ r) <= 1e-8 * np.linalg.norm(A, axis=0) * np.linalg.norm(y))
        shifted = X.copy()
        shifted[:, 0] += shift
        np.testing.assert_allclose(ols_fit(shifted, y).slopes, fit.slopes, rtol=1e-7, atol=1e-9)


class TestAdjustedIntercept:
    def test_centered(self):
        assert adjusted_intercept(3.5, [0, 0], [4, 7]) == 3.5

    def test_arithmetic(self):
        assert adjusted_intercept(5, [1, 1], [2, 2]) == 1

    def test_mismatch(self):
        with pytest.raises(ValueError):
            adjusted_intercept(1, [1, 2], [1])


class TestInformationMatrix:
    @pytest.mark.parametrize("S", [OA_4x3, oa_8x4()], ids=["4x3", "8x4"])
    def test_orthogonal_array(self, S):
        k, p = S.shape
        M = information_matrix(S)
        assert np.array_equal(M, k * np.eye(p + 1))
        assert d_efficiency(M, k, p) == pytest.approx(1, abs=1e-12)
        assert a_efficiency(M, k, p) == pytest.approx(1, abs=1e-12)

    def test_single_row(self):
        np.testing.assert_array_equal(information_matrix([[1.0, 1.0]]), np.ones((3, 3)))

    def test_exact_symmetry(self):
        M = information_matrix(np.random.default_rng(0).uniform(-1, 1, size=(57, 9)))
        assert np.array_equal(M, M.T)


class TestEfficiency:
    def test_diagonal_example(self):
        M = np.diag([4.0, 4.0, 1.0])
        assert d_efficiency(M, 4, 2) == pytest.approx(16 ** (1 / 3) / 4, rel=1e-12)
        assert round(d_efficiency(M, 4, 2), 2) == 0.63
        assert a_efficiency(M, 4, 2) == pytest.approx(0.5, rel=1e-12)

    def test_singular(self):
        M = information_matrix(np.array([[1.0, 1.0], [-1.0, -1.0], [0.5, 0.5]]))
        assert d_efficiency(M, 3) == 0.0 and a_efficiency(M, 3) == 0.0
        rep = efficiency_report(np.array([[1.0, 1.0], [-1.0, -1.0], [0.5, 0.5]]))
        assert rep.d_eff == 0.0 and rep.a_eff == 0.0

    def test_not_symmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            d_efficiency(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            d_efficiency(np.eye(3), 1, p=5)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 6), st.integers(0, 30))
    def test_bounds_and_oracle(self, seed, p, extra):
        S = np.random.default_rng(seed).uniform(-1, 1, size=(p + 2 + extra, p))
        k = S.shape[0]
        rep = efficiency_report(S)
        A = np.column_stack([np.ones(k), S])
        M = A.T @ A
        d_ref = np.linalg.det(M) ** (1 / (p + 1)) / k
        a_ref = (p + 1) / (k * np.trace(np.linalg.inv(M)))
        assert rep.d_eff == pytest.approx(d_ref, rel=1e-8)
        assert rep.a_eff == pytest.approx(a_ref, rel=1e-8)
        assert 0 < rep.d_eff <= 1 + 1e-12
        assert 0 < rep.a_eff <= 1 + 1e-12
        assert rep.a_eff <= rep.d_eff + 1e-12  # harmonic mean <= geometric mean

    def test_report_interactions_use_scaled_products(self):
        S = oa_8x4()[:, :3]
        rep = efficiency_report(S, with_interactions=True)
        # The full 2^3 factorial is orthogonal for main effects plus interactions.
        assert rep.d_eff == pytest.approx(1, abs=1e-12)
        assert rep.a_eff == pytest.approx(1, abs=1e-12)


class TestMse:
    def test_examples(self):
        assert empirical_mse([[1.0, 2.0]], [1.0, 2.0]) == 0
        assert empirical_mse([[3.0, 0.0]], [0.0, 0.0]) == 9
        assert empirical_mse([[1.0], [2.0]], [0.0]) == 2.5
        assert empirical_mse([1.0, 2.0], 0.0) == 2.5

    def test_errors(self):
        with pytest.raises(ValueError):
            empirical_mse([[1.0, 2.0]], [1.0])
        with pytest.raises(ValueError):
            empirical_mse(np.empty((0, 2)), [1.0, 2.0])

    @given(arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(1, 4)),
                  elements=st.floats(-100, 100)), st.randoms())
    def test_permutation_invariant(self, est, rnd):
        truth = np.zeros(est.shape[1])
        perm = list(range(est.shape[0]))
        rnd.shuffle(perm)
        assert empirical_mse(est[perm], truth) == pytest.approx(empirical_mse(est, truth), rel=1e-12)


class TestBenchmark:
    spec = BenchmarkSpec(case="uniform", n_grid=(300, 600), p=3, k=40, T=3, seed=4)

    def test_shape_and_columns(self):
        rows = run_benchmark(self.spec)
        assert len(rows) == 6
        assert [r["method"] for r in rows[:3]] == ["uni", "iboss", "oss"]
        for r in rows:
            assert set(TABLE_COLUMNS) <= set(r)
            assert 0 < r["d_eff_mean"] <= 1 and 0 < r["a_eff_mean"] <= 1

    def test_deterministic_and_thread_independent(self):
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]
        a = strip(run_benchmark(self.spec))
        b = strip(run_benchmark(self.spec, n_jobs=3))
        assert a == b

    def test_method_filter(self):
        spec = BenchmarkSpec(case="normal", n_grid=(300,), p=3, k=40, T=2, methods=("oss", "uni"))
        assert [r["method"] for r in run_benchmark(spec)] == ["oss", "uni"]

    def test_interaction_columns(self):
        spec = BenchmarkSpec(
            case="normal", n_grid=(500,), p=3, k=60, T=2, model="interaction", methods=("oss",)
        )
        (row,) = run_benchmark(spec)
        assert {"mse_main", "mse_interaction"} <= set(row)

    def test_validation(self):
        with pytest.raises(ValueError):
            BenchmarkSpec(T=0)
        with pytest.raises(ValueError):
            BenchmarkSpec(n_grid=())
        with pytest.raises(ValueError):
            BenchmarkSpec(methods=("wys",))
        with pytest.raises(ValueError):
            BenchmarkSpec(n_grid=(500,), k=1000)

    def test_write_table(self, tmp_path):
        rows = run_benchmark(self.spec)
        write_table(rows, tmp_path / "t.csv", timing=False)
        write_table(rows, tmp_path / "t.json", fmt="json", timing=False)
        with open(tmp_path / "t.csv", newline="") as fh:
            read = list(csv.DictReader(fh))
        assert list(read[0]) == list(TABLE_COLUMNS)
        assert all(float(r["wall_time"]) == 0 for r in read)
        js = json.loads((tmp_path / "t.json").read_text())
        assert [list(r) for r in js] == [list(TABLE_COLUMNS)] * 6


class TestBootstrap:
    data = make_dataset(SyntheticSpec("uniform", 800, 3, seed=2))

    def test_rows_and_determinism(self):
        a = run_bootstrap(self.data, [20, 40], B=3, seed=1)
        b = run_bootstrap(self.data, [20, 40], B=3, seed=1)
        assert len(a) == 6
        strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]
        assert strip(a) == strip(b)

    def test_b_one(self):
        with pytest.raises(ValueError):
            run_bootstrap(self.data, 20, B=1)

    def test_needs_response(self):
        with pytest.raises(ValueError):
            run_bootstrap(DataMatrix(self.data.values), 20, B=2)
