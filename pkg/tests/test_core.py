import math

import numpy as np
import pytest
from scipy.stats import kstest, spearmanr

from nmcopula.core import (CopulaModel, Family, Verdict, cdf, check_copula_axioms,
                           concordance_compare, conditional_cdf, conditional_quantile,
                           copula_volume, density, sample)
from nmcopula.exceptions import DimensionMismatch, InvalidParameter, NoDensity
from nmcopula.oracle import _tensor

PI = math.pi
ALL = [
    CopulaModel.normal_mode(0.7, (2, 3)),
    CopulaModel(Family.AMH, -0.6),
    CopulaModel(Family.CLAYTON, 3.0),
    CopulaModel(Family.FRANK, -5.0),
    CopulaModel(Family.FGM, 0.4),
    CopulaModel(Family.GAUSSIAN, 0.8),
    CopulaModel(Family.PRODUCT),
    CopulaModel(Family.FRECHET_LOWER),
    CopulaModel(Family.FRECHET_UPPER),
]
SMOOTH = [m for m in ALL if m.has_density]


class TestModel:
    def test_aliases(self):
        assert Family.parse("NM") is Family.NORMAL_MODE
        assert Family.parse("independence") is Family.PRODUCT
        assert CopulaModel(Family.FRANK, 0.0).family is Family.PRODUCT

    @pytest.mark.parametrize("fam,theta", [("amh", 1.2), ("clayton", 0.0), ("clayton", -0.5),
                                           ("fgm", -1.5), ("gaussian", 1.01), ("frank", math.inf)])
    def test_domains(self, fam, theta):
        with pytest.raises(InvalidParameter):
            CopulaModel(fam, theta)

    def test_bivariate_only(self):
        with pytest.raises((InvalidParameter, DimensionMismatch)):
            CopulaModel(Family.CLAYTON, 1.0, dim=3)

    def test_nm_rejected_before_axiom_check(self):
        with pytest.raises(InvalidParameter):
            CopulaModel.normal_mode(1.5, (1, 1))


class TestCdf:
    def test_references(self):
        assert cdf(CopulaModel(Family.PRODUCT), (0.3, 0.4)) == pytest.approx(0.12)
        assert cdf(CopulaModel(Family.FRECHET_LOWER), (0.3, 0.4)) == 0.0
        assert cdf(CopulaModel(Family.FRECHET_UPPER), (0.3, 0.4)) == pytest.approx(0.3)

    @pytest.mark.parametrize("model", ALL, ids=lambda m: m.label())
    def test_boundaries(self, model):
        for v in (0.0, 0.13, 0.5, 0.97, 1.0):
            assert cdf(model, (v, 1.0)) == pytest.approx(v, abs=1e-15)
            assert cdf(model, (1.0, v)) == pytest.approx(v, abs=1e-15)
            assert cdf(model, (0.0, v)) == 0.0

    def test_outside_domain(self):
        with pytest.raises(InvalidParameter):
            cdf(CopulaModel(Family.PRODUCT), (1.2, 0.5))
        with pytest.raises(DimensionMismatch):
            cdf(CopulaModel(Family.PRODUCT), (0.2, 0.5, 0.5))

    def test_high_dimensional_margin(self):
        m = CopulaModel.normal_mode(0.9, (1, 2, 1))
        u = np.array([0.3, 1.0, 0.6])
        expected = cdf(CopulaModel.normal_mode(0.9, (1, 1)), (0.3, 0.6))
        # sin(2 pi) = 0 removes the trig term entirely when a coordinate is 1
        assert cdf(m, u) == pytest.approx(0.18, abs=1e-15)
        assert expected != pytest.approx(0.18)


class TestDensity:
    def test_references(self):
        assert density(CopulaModel(Family.PRODUCT), (0.2, 0.9)) == 1.0
        assert density(CopulaModel(Family.GAUSSIAN, 0.0), (0.2, 0.9)) == pytest.approx(1.0)
        assert density(CopulaModel(Family.FGM, 1.0), (0.5, 0.5)) == pytest.approx(1.0)

    def test_singular(self):
        with pytest.raises(NoDensity):
            density(CopulaModel(Family.FRECHET_UPPER), (0.2, 0.3))

    @pytest.mark.parametrize("model", SMOOTH, ids=lambda m: m.label())
    def test_integral_matches_volume(self, model):
        # the rectangle stays clear of the corners where Clayton's density is unbounded
        lo, hi = 0.02, 0.97
        uu, vv, w = _tensor(256)
        pts = np.stack([lo + (hi - lo) * uu, lo + (hi - lo) * vv], -1)
        integral = float(np.sum(w * density(model, pts))) * (hi - lo) ** 2
        assert integral == pytest.approx(copula_volume(model, (lo, lo), (hi, hi)), abs=1e-9)

    @pytest.mark.parametrize("model", [m for m in SMOOTH if m.family is not Family.CLAYTON],
                             ids=lambda m: m.label())
    def test_integrates_to_one(self, model):
        uu, vv, w = _tensor(256)
        assert float(np.sum(w * density(model, np.stack([uu, vv], -1)))) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("model", SMOOTH, ids=lambda m: m.label())
    def test_density_is_mixed_derivative(self, model):
        h = 1e-4
        for x, y in [(0.3, 0.6), (0.72, 0.41)]:
            num = (cdf(model, (x + h, y + h)) - cdf(model, (x + h, y - h))
                   - cdf(model, (x - h, y + h)) + cdf(model, (x - h, y - h))) / (4 * h * h)
            assert density(model, (x, y)) == pytest.approx(num, rel=1e-5, abs=1e-6)


class TestConditional:
    def test_references(self):
        assert conditional_cdf(CopulaModel(Family.PRODUCT), 2, (0.3, 0.7)) == pytest.approx(0.7)
        assert conditional_cdf(CopulaModel(Family.GAUSSIAN, 0.0), 2, (0.3, 0.7)) == pytest.approx(0.7)
        assert conditional_cdf(CopulaModel(Family.FGM, 1.0), 2, (0.0, 0.5)) == pytest.approx(0.75)
        assert conditional_quantile(CopulaModel(Family.PRODUCT), 1, 0.9, 0.42) == pytest.approx(0.42)
        assert conditional_quantile(CopulaModel.normal_mode(1.0, (1, 1)), 2, 0.5, 0.3) == \
            pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("model", SMOOTH, ids=lambda m: m.label())
    def test_conditional_is_partial_derivative(self, model):
        h = 1e-6
        x, y = 0.35, 0.62
        d2 = (cdf(model, (x + h, y)) - cdf(model, (x - h, y))) / (2 * h)
        d1 = (cdf(model, (x, y + h)) - cdf(model, (x, y - h))) / (2 * h)
        assert conditional_cdf(model, 2, (x, y)) == pytest.approx(d2, abs=1e-7)
        assert conditional_cdf(model, 1, (x, y)) == pytest.approx(d1, abs=1e-7)

    @pytest.mark.parametrize("model", SMOOTH, ids=lambda m: m.label())
    def test_round_trip(self, model):
        g = np.linspace(0.05, 0.95, 19)
        x = np.linspace(0.03, 0.97, 19)
        gg, xx = np.meshgrid(g, x, indexing="ij")
        for d in (1, 2):
            pts = np.stack([xx, gg], -1) if d == 1 else np.stack([gg, xx], -1)
            prob = conditional_cdf(model, d, pts)
            back = conditional_quantile(model, d, gg, prob)
            pts_back = np.stack([back, gg], -1) if d == 1 else np.stack([gg, back], -1)
            assert np.max(np.abs(conditional_cdf(model, d, pts_back) - prob)) <= 1e-12
            # x is recovered to 1e-10 wherever the inversion is well conditioned
            ok = density(model, pts) >= 1e-2
            assert np.max(np.abs(back - xx)[ok]) <= 1e-10


class TestSample:
    def test_deterministic(self):
        m = CopulaModel(Family.CLAYTON, 2.0)
        assert np.array_equal(sample(m, 100, 3), sample(m, 100, 3))
        assert not np.array_equal(sample(m, 100, 3), sample(m, 100, 4))

    def test_product_margins_uniform(self):
        u = sample(CopulaModel(Family.PRODUCT), 100_000, 0)
        for d in range(2):
            assert kstest(u[:, d], "uniform").statistic < 0.006

    def test_singular_rejected(self):
        with pytest.raises(NoDensity):
            sample(CopulaModel(Family.FRECHET_UPPER), 10, 0)
        with pytest.raises(InvalidParameter):
            sample(CopulaModel(Family.PRODUCT), 0, 0)

    @pytest.mark.parametrize("model", SMOOTH, ids=lambda m: m.label())
    def test_open_unit_interval(self, model):
        u = sample(model, 2000, 1)
        assert u.shape == (2000, model.dim)
        assert np.all((u > 0) & (u < 1))

    def test_three_dimensional_normal_mode(self):
        m = CopulaModel.normal_mode(1.0, (1, 1, 1))
        u = sample(m, 200_000, 2)
        for q in [(0.3, 0.5, 0.7), (0.8, 0.2, 0.6)]:
            emp = np.mean(np.all(u <= np.array(q), axis=1))
            assert emp == pytest.approx(cdf(m, q), abs=0.004)

    def test_spearman(self):
        u = sample(CopulaModel.normal_mode(1.0, (1, 1)), 100_000, 0)
        assert spearmanr(u[:, 0], u[:, 1])[0] == pytest.approx(48 / PI**4, abs=0.01)


class TestAxioms:
    def test_volume_of_unit_square(self):
        for m in ALL:
            assert copula_volume(m, (0, 0), (1, 1)) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("model", [
        CopulaModel(Family.PRODUCT),
        CopulaModel.normal_mode(-1.0, (3, 2)),
        CopulaModel.normal_mode(1.0, (1, 2, 2)),
        CopulaModel(Family.CLAYTON, 50.0),
        CopulaModel(Family.CLAYTON, 1e-6),
        CopulaModel(Family.FRANK, 50.0),
        CopulaModel(Family.FRANK, -50.0),
        CopulaModel(Family.FRANK, 1e-7),
        CopulaModel(Family.AMH, 1.0),
        CopulaModel(Family.AMH, -1.0),
        CopulaModel(Family.GAUSSIAN, 0.999999),
    ], ids=lambda m: m.label())
    def test_passes(self, model):
        rep = check_copula_axioms(model, n_rectangles=2000, seed=0)
        assert rep.passed, rep


class TestConcordance:
    def test_references(self):
        assert concordance_compare(CopulaModel(Family.FRECHET_LOWER),
                                   CopulaModel(Family.FRECHET_UPPER)).verdict is Verdict.A_BELOW_B
        assert concordance_compare(CopulaModel(Family.PRODUCT),
                                   CopulaModel(Family.PRODUCT)).verdict is Verdict.EQUAL

    def test_fgm_dominates_normal_mode_above_threshold(self):
        theta = 0.3
        threshold = abs(theta) * PI**2 / 4
        res = concordance_compare(CopulaModel.normal_mode(theta, (1, 1)),
                                  CopulaModel(Family.FGM, 1.01 * threshold))
        assert res.verdict is Verdict.A_BELOW_B

    def test_reversed(self):
        res = concordance_compare(CopulaModel.normal_mode(1.0, (1, 1)),
                                  CopulaModel.normal_mode(-1.0, (1, 1)))
        assert res.verdict is Verdict.B_BELOW_A
