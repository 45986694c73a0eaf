import numpy as np
import pytest
from sklearn.base import clone

from orthosub.estimators import (
    IBOSSSubsampler,
    OrthogonalSubsampler,
    SubsampleRegressor,
    UniformSubsampler,
)
from orthosub.oss import oss_select
from orthosub.dataio import scale_to_unit


@pytest.fixture
def data():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(2000, 4)) * [1, 10, 100, 0.1] + 5
    y = 1 + X @ [1, -1, 0.5, 2] + rng.normal(size=2000)
    return X, y


class TestSubsamplers:
    def test_params_and_clone(self):
        est = OrthogonalSubsampler(k=30, exponent=4, n_batches=3, random_state=1)
        params = est.get_params()
        assert params["k"] == 30 and params["exponent"] == 4
        assert clone(est).get_params() == params

    def test_matches_functional_api(self, data):
        X, _ = data
        est = OrthogonalSubsampler(k=40).fit(X)
        scaled, _ = scale_to_unit(X)
        ref = oss_select(scaled, 40)
        np.testing.assert_array_equal(est.indices_, ref.indices)
        assert est.discrepancy_ == ref.discrepancy

    def test_support_and_transform(self, data):
        X, y = data
        est = OrthogonalSubsampler(k=25, n_batches=5, random_state=3)
        Xs = est.fit_transform(X)
        assert Xs.shape == (25, 4)
        mask = est.get_support()
        assert mask.sum() == 25
        np.testing.assert_array_equal(np.flatnonzero(mask), np.sort(est.get_support(indices=True)))
        Xr, yr = est.fit_resample(X, y)
        np.testing.assert_array_equal(yr, y[est.indices_])
        with pytest.raises(ValueError):
            est.transform(X[:10])

    def test_unscaled_input_without_scaling(self, data):
        with pytest.raises(ValueError, match="not scaled"):
            OrthogonalSubsampler(k=5, scale=False).fit(data[0])

    @pytest.mark.parametrize("est", [UniformSubsampler(k=30, random_state=0), IBOSSSubsampler(k=30)])
    def test_baselines(self, data, est):
        idx = est.fit(data[0]).indices_
        assert len(set(idx.tolist())) == 30


class TestRegressor:
    def test_fit_predict(self, data):
        X, y = data
        reg = SubsampleRegressor(OrthogonalSubsampler(k=200)).fit(X, y)
        np.testing.assert_allclose(reg.coef_, [1, -1, 0.5, 2], atol=0.3)
        assert reg.intercept_ == pytest.approx(y.mean() - X.mean(axis=0) @ reg.coef_)
        assert reg.predict(X[:5]).shape == (5,)
        assert reg.score(X, y) > 0.99
        assert 0 < reg.efficiency_.d_eff <= 1

    def test_raw_intercept(self, data):
        X, y = data
        reg = SubsampleRegressor(UniformSubsampler(k=300, random_state=0), adjust_intercept=False)
        reg.fit(X, y)
        assert reg.intercept_ != pytest.approx(y.mean() - X.mean(axis=0) @ reg.coef_)

    def test_interactions(self, data):
        X, y = data
        reg = SubsampleRegressor(IBOSSSubsampler(k=200), interactions=True).fit(X, y)
        assert reg.coef_.shape == (4 + 6,)

    def test_default_subsampler_is_not_mutated(self, data):
        X, y = data
        sub = OrthogonalSubsampler(k=50)
        SubsampleRegressor(sub).fit(X, y)
        assert not hasattr(sub, "indices_")
