import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orthosub.baselines import iboss_select, uniform_select


class TestUniform:
    def test_k_equals_n(self):
        assert sorted(uniform_select(7, 7, seed=0).tolist()) == list(range(7))

    def test_seeded(self):
        np.testing.assert_array_equal(uniform_select(1000, 50, 3), uniform_select(1000, 50, 3))

    def test_inclusion_frequency(self):
        counts = np.zeros(100)
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            counts[uniform_select(100, 10, rng)] += 1
        freq = counts / 10_000
        assert np.all(np.abs(freq - 0.10) <= 0.01)

    def test_exchangeable_positions(self):
        # The first draw is uniform over indices: chi-square against 10 bins.
        rng = np.random.default_rng(1)
        first = np.array([uniform_select(10, 3, rng)[0] for _ in range(5000)])
        counts = np.bincount(first, minlength=10)
        chi2 = ((counts - 500) ** 2 / 500).sum()
        assert chi2 < 27.9  # 0.999 quantile, 9 degrees of freedom

    def test_errors(self):
        with pytest.raises(ValueError, match="k exceeds n"):
            uniform_select(5, 6)
        with pytest.raises(ValueError):
            uniform_select(5, 0)


class TestIboss:
    def test_single_covariate(self):
        X = np.arange(1.0, 11.0)[:, None]
        idx = iboss_select(X, 4)
        assert sorted(X[idx, 0].tolist()) == [1, 2, 9, 10]

    def test_k_equals_2p(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(50, 3))
        idx = iboss_select(X, 6)
        expected = []
        taken = set()
        for j in range(3):
            for pick in (np.argsort(X[:, j]), np.argsort(-X[:, j])):
                row = next(int(r) for r in pick if int(r) not in taken)
                taken.add(row)
                expected.append(row)
        assert idx.tolist() == expected

    def test_collision_advances(self):
        # Row 0 is the minimum of both columns; the second covariate takes
        # its next smallest instead.
        X = np.array([[0.0, 0.0], [5.0, 1.0], [9.0, 9.0], [3.0, 4.0], [4.0, 2.0]])
        idx = iboss_select(X, 4)
        assert idx.tolist() == [0, 2, 1, 3]

    def test_remainder_alternates(self):
        X = np.arange(20.0).reshape(10, 2) * np.array([1.0, -1.0])
        idx = iboss_select(X, 5)
        assert len(set(idx.tolist())) == 5

    def test_boundary_points(self):
        X = np.random.default_rng(3).uniform(-1, 1, size=(1000, 2))
        idx = iboss_select(X, 20)
        # Each chosen row is among the 10 most extreme values of some covariate.
        ranks = np.argsort(np.argsort(X, axis=0), axis=0)[idx]
        assert np.all(np.any((ranks < 10) | (ranks >= 990), axis=1))

    def test_errors(self):
        with pytest.raises(ValueError, match="k exceeds n"):
            iboss_select(np.ones((3, 1)), 4)

    @settings(max_examples=60, deadline=None)
    @given(
        arrays(
            np.float64, st.tuples(st.integers(1, 40), st.integers(1, 5)),
            elements=st.floats(-5, 5, allow_nan=False),
        ),
        st.data(),
    )
    def test_distinct_and_deterministic(self, X, data):
        k = data.draw(st.integers(1, X.shape[0]))
        a = iboss_select(X, k)
        assert len(a) == k and len(set(a.tolist())) == k
        assert np.all((a >= 0) & (a < X.shape[0]))
        np.testing.assert_array_equal(a, iboss_select(X.copy(), k))
