import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kirchsolve import PowerLawRate, SolverOptions, TruncatedKirchhoffSolver, default_spec


class TestTruncatedKirchhoffSolver:
    def test_params(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=100)
        params = est.get_params()
        assert params["eps"] == 1e-2 and params["n_cells"] == 100
        assert set(params) == {"problem", "eps", "n_cells", "options"}

    def test_clone_is_unfitted(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=100).fit()
        twin = clone(est)
        assert twin.get_params()["eps"] == 1e-2
        assert not hasattr(twin, "profile_")

    def test_predict_interpolates_nodes(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=100).fit()
        nodes = est.profile_.grid.nodes
        np.testing.assert_array_equal(est.predict(nodes), est.profile_.u.values)
        assert est.predict([[0.5]]).shape == (1,)
        assert est.transform([0.25, 0.5]).shape == (2, 1)

    def test_fitted_attributes(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=100).fit()
        assert est.kirchhoff_constant_ == est.profile_.K_p > 1.0
        assert est.n_iter_ >= 1 and est.continuation_ is None

    def test_schedule_keeps_last_profile(self):
        est = TruncatedKirchhoffSolver(eps=[1e-1, 1e-2], n_cells=100).fit()
        assert est.profile_.eps == 1e-2
        assert len(est.continuation_.profiles) == 2

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            TruncatedKirchhoffSolver().predict([0.5])

    def test_points_outside_domain(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=50).fit()
        with pytest.raises(ValueError):
            est.predict([1.5])

    def test_set_params_changes_solution(self):
        est = TruncatedKirchhoffSolver(eps=1e-2, n_cells=100).fit()
        peak = est.predict([0.5])[0]
        est.set_params(problem=default_spec().replace(lam=0.0), options=SolverOptions()).fit()
        assert est.predict([0.5])[0] < peak


class TestPowerLawRate:
    def test_exact(self):
        eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        est = PowerLawRate().fit(eps, 2 * eps**0.3)
        assert est.rate_ == pytest.approx(0.3, abs=1e-12)
        assert est.intercept_ == pytest.approx(np.log10(2), abs=1e-12)
        np.testing.assert_allclose(est.predict([1e-5]), 2 * 1e-5**0.3, rtol=1e-10)

    def test_score_on_exact_data(self):
        eps = np.array([1e-1, 1e-2, 1e-3])
        est = PowerLawRate().fit(eps, eps)
        assert est.score(eps, eps) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            PowerLawRate().fit([1e-1, 1e-2], [1e-1])

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            PowerLawRate().predict([1e-2])
