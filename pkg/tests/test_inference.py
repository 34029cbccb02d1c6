import math

import numpy as np
import pytest
from scipy.optimize import brentq

from nmcopula import kernels
from nmcopula.core import CopulaModel, Family, sample
from nmcopula.empirical import PseudoSample, loo_pseudo_all, pseudo_observations
from nmcopula.exceptions import DimensionMismatch, InvalidParameter
from nmcopula.inference import (FamilySpec, _coordinates, aic, cic, compare_models,
                                cvm_criterion, evaluate, fit_mple, rank_reports,
                                standard_specs)

# Fisher information of theta at independence, E[score^2] under the product copula
NULL_INFO = {"normal_mode(1,1)": 1 / 4, "fgm": 1 / 9, "amh": 1 / 9, "frank": 1 / 36,
             "gaussian": 1.0, "clayton": 1.0}


@pytest.fixture(scope="module")
def nm21_data():
    return pseudo_observations(sample(CopulaModel.normal_mode(1.0, (2, 1)), 2000, 0))


@pytest.fixture(scope="module")
def null_data():
    return pseudo_observations(sample(CopulaModel(Family.PRODUCT), 1000, 5))


class TestSpec:
    def test_bounds(self):
        assert FamilySpec("clayton").bounds == (1e-6, 50.0)
        assert FamilySpec("nm", (2, 1)).name == "normal_mode(2,1)"
        with pytest.raises(InvalidParameter):
            FamilySpec("gaussian", bounds=(-2.0, 0.5))
        with pytest.raises(InvalidParameter):
            FamilySpec("product")
        with pytest.raises(InvalidParameter):
            FamilySpec("normal_mode")


class TestFit:
    def test_single_point_goes_to_boundary(self):
        ps = PseudoSample(np.array([[0.1, 0.2]]))
        fit = fit_mple(FamilySpec("normal_mode", (1, 1)), ps)
        assert fit.theta_hat == 1.0 and "boundary" in fit.flags

    def test_flat_likelihood(self):
        ps = pseudo_observations(np.column_stack([np.ones(30), np.arange(30.0)]))
        fit = fit_mple(FamilySpec("normal_mode", (1, 1)), ps)
        assert fit.theta_hat == 0.0 and "flat_likelihood" in fit.flags

    def test_null_estimates_near_independence(self):
        n = 5000
        for seed in range(20):
            ps = pseudo_observations(sample(CopulaModel(Family.PRODUCT), n, seed))
            for spec in standard_specs((1, 1)):
                theta = fit_mple(spec, ps).theta_hat
                tol = max(0.1, 4.0 / math.sqrt(n * NULL_INFO[spec.name]))
                assert abs(theta) <= tol, (seed, spec.name, theta)

    def test_matches_dense_grid_search(self, nm21_data):
        for spec in standard_specs((2, 1)):
            code, x, y = _coordinates(spec, nm21_data.u)
            fit = fit_mple(spec, nm21_data)
            lo, hi = spec.bounds
            grid = np.linspace(max(lo, fit.theta_hat - 0.05), min(hi, fit.theta_hat + 0.05), 401)
            vals = [kernels.loglik(code, t, x, y) for t in grid]
            assert fit.loglik >= max(vals) - 1e-9

    def test_score_vanishes_at_interior_optimum(self):
        ps = pseudo_observations(sample(CopulaModel.normal_mode(0.6, (1, 1)), 3000, 2))
        spec = FamilySpec("normal_mode", (1, 1))
        fit = fit_mple(spec, ps)
        code, x, y = _coordinates(spec, ps.u)
        assert not fit.flags
        # root of the score by an independent bracketing solver
        root = brentq(lambda t: float(np.sum(x / (1 + t * x))), -0.999, 0.999, xtol=1e-14)
        assert fit.theta_hat == pytest.approx(root, abs=1e-8)

    def test_permutation_invariant(self, nm21_data):
        perm = np.random.default_rng(0).permutation(nm21_data.n)
        shuffled = PseudoSample(nm21_data.u[perm])
        for spec in standard_specs((2, 1)):
            a = fit_mple(spec, nm21_data).theta_hat
            b = fit_mple(spec, shuffled).theta_hat
            assert a == pytest.approx(b, abs=1e-8)

    def test_normal_mode_loglik_concave(self):
        ps = pseudo_observations(np.random.default_rng(9).random((300, 2)))
        code, x, y = _coordinates(FamilySpec("normal_mode", (2, 3)), ps.u)
        grid = np.linspace(-0.999, 0.999, 1000)
        ll = np.array([kernels.loglik(code, t, x, y) for t in grid])
        assert np.all(np.diff(ll, 2) <= 1e-9)


class TestCriteria:
    def test_aic(self):
        assert aic(0.0) == 2.0
        assert aic(100.0) == -198.0
        assert aic(5.0) < aic(4.0)

    def test_cvm_null(self, null_data):
        prod = cvm_criterion(CopulaModel(Family.PRODUCT), null_data)
        upper = cvm_criterion(CopulaModel(Family.FRECHET_UPPER), null_data)
        assert 0.0 <= prod < 0.5
        assert upper > prod

    def test_cvm_tie_relabeling(self):
        x = np.round(np.random.default_rng(1).random((200, 2)) * 8)
        ps = pseudo_observations(x)
        perm = np.random.default_rng(2).permutation(200)
        model = CopulaModel.normal_mode(0.4, (1, 1))
        assert cvm_criterion(model, ps) == pytest.approx(
            cvm_criterion(model, PseudoSample(ps.u[perm])), abs=1e-12)

    def test_cic_is_zero_for_product_density(self):
        ps = pseudo_observations(np.column_stack([np.ones(30), np.arange(30.0)]))
        assert cic(FamilySpec("normal_mode", (1, 1)), ps).cic == 0.0

    def test_cic_folds_against_independent_refits(self, nm21_data):
        sub = PseudoSample(nm21_data.u[:150])
        for spec in (FamilySpec("normal_mode", (2, 1)), FamilySpec("frank"),
                     FamilySpec("gaussian")):
            res = cic(spec, sub)
            code, x, y = _coordinates(spec, sub.u)
            lo, hi = spec.bounds
            for i in (0, 17, 149):
                keep = np.arange(sub.n) != i

                def fold_score(t):
                    return kernels.score_sum(code, t, x[keep], y[keep])

                if fold_score(lo) <= 0:
                    ref = lo
                elif fold_score(hi) >= 0:
                    ref = hi
                else:
                    ref = brentq(fold_score, lo, hi, xtol=1e-13)
                assert res.fold_thetas[i] == pytest.approx(ref, abs=1e-8)
            # the criterion is the mean log density at the leave-one-out points
            _, lx, ly = _coordinates(spec, loo_pseudo_all(sub))
            vals = kernels.logdens_at(code, res.fold_thetas, lx, ly)
            assert res.cic == pytest.approx(float(np.mean(vals)), abs=1e-13)

    def test_cic_deterministic(self, nm21_data):
        spec = FamilySpec("clayton")
        assert cic(spec, nm21_data).cic == cic(spec, nm21_data).cic

    def test_cic_order_independent(self, nm21_data):
        spec = FamilySpec("normal_mode", (2, 1))
        sub = PseudoSample(nm21_data.u[:300])
        perm = np.random.default_rng(4).permutation(300)
        a = cic(spec, sub).cic
        b = cic(spec, PseudoSample(sub.u[perm])).cic
        assert a == pytest.approx(b, abs=1e-12)

    def test_aic_and_cic_same_order(self, nm21_data):
        rep = evaluate(FamilySpec("normal_mode", (2, 1)), nm21_data)
        assert np.isfinite(rep.aic) and np.isfinite(rep.neg2n_cic)
        assert 0.3 <= rep.aic / rep.neg2n_cic <= 3.0


class TestCompare:
    def test_normal_mode_first(self, nm21_data):
        reports = compare_models(standard_specs((2, 1)), nm21_data)
        for c in ("cvmc", "aic", "neg2n_cic"):
            assert rank_reports(reports, c)[0].family == "normal_mode"
        r = reports[0]
        assert r.aic == pytest.approx(2 - 2 * r.loglik)
        assert r.neg2n_cic == pytest.approx(-2 * r.n * r.cic)
        assert r.cvmc >= 0

    def test_null_reports(self, null_data):
        reports = compare_models(standard_specs((1, 1)), null_data)
        cv = [r.cvmc for r in reports]
        assert max(cv) <= 2 * min(cv)

    def test_preconditions(self, nm21_data):
        with pytest.raises(InvalidParameter):
            compare_models([FamilySpec("fgm")], nm21_data)
        with pytest.raises(InvalidParameter):
            rank_reports([], "bic")
        with pytest.raises(DimensionMismatch):
            PseudoSample(np.empty((0, 2)))
