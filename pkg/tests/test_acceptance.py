"""Acceptance suite: one test per criterion, summarized at the end of the run.

Reference values are exact expressions rather than rounded decimals.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from nmcopula.cli import main as cli_main
from nmcopula.core import (CopulaModel, Family, Verdict, cdf, check_copula_axioms,
                           concordance_compare, interior_lattice, sample)
from nmcopula.empirical import empirical_copula, pseudo_observations
from nmcopula.inference import CRITERIA, FamilySpec, compare_models, fit_mple, standard_specs
from nmcopula.normal_dist import bvn_cdf, inv_norm_cdf, norm_cdf
from nmcopula.normal_mode import NormalModeParams, nm_associated, nm_cdf, nm_measures
from nmcopula.oracle import measures_numeric, tail_dependence_profile

PI = math.pi
RHO_11 = 48.0 / PI**4
# 4 C(1/2, 1/2) - 1 at theta=1, kappa=(1,1), from a brute-force double integral
# of the density computed before any closed form was written
BLOMQVIST_BRUTE_FORCE = 0.4052847345693511
README = Path(__file__).resolve().parents[1] / "README.md"


def nm(theta, kappa):
    return CopulaModel.normal_mode(theta, kappa)


@pytest.mark.criterion(1, "closed-form vs quadrature measures, 64 models, <= 1e-6, < 60 s")
def test_closed_form_matches_quadrature(detail):
    t0 = time.perf_counter()
    worst = 0.0
    for theta in (-1.0, -0.5, 0.3, 1.0):
        for k1 in range(1, 5):
            for k2 in range(1, 5):
                model = nm(theta, (k1, k2))
                gap = nm_measures(model.nm_params).max_abs_diff(measures_numeric(model))
                worst = max(worst, gap)
    elapsed = time.perf_counter() - t0
    detail(f"worst gap {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-6
    assert elapsed < 60.0


@pytest.mark.criterion(2, "Spearman rho at theta=1, kappa=(1,1) equals 48/pi^4 by quadrature")
def test_spearman_reference_value(detail):
    rho = measures_numeric(nm(1.0, (1, 1))).rho
    detail(f"rho={rho:.10f}, 48/pi^4={RHO_11:.10f}")
    assert abs(rho - RHO_11) <= 1e-6


@pytest.mark.criterion(3, "tau/rho = 2/3 and sigma/|rho| = k1 k2 for odd mode numbers")
def test_ratio_identities(detail):
    worst_tau = worst_sigma = 0.0
    for theta in (-1.0, -0.5, 0.3, 1.0):
        for k1 in (1, 3, 5):
            for k2 in (1, 3, 5):
                m = measures_numeric(nm(theta, (k1, k2)))
                worst_tau = max(worst_tau, abs(m.tau / m.rho - 2.0 / 3.0))
                worst_sigma = max(worst_sigma, abs(m.sigma / abs(m.rho) - k1 * k2))
    detail(f"tau/rho err {worst_tau:.1e}, sigma/|rho| err {worst_sigma:.1e}")
    assert worst_tau <= 1e-6
    assert worst_sigma <= 1e-6


@pytest.mark.criterion(4, "uncorrelated but dependent: kappa=(2,1), theta=0.8")
def test_uncorrelated_dependent(detail):
    m = measures_numeric(nm(0.8, (2, 1)))
    detail(f"|rho|={abs(m.rho):.1e}, |tau|={abs(m.tau):.1e}, sigma={m.sigma:.6f}")
    assert abs(m.rho) <= 1e-8
    assert abs(m.tau) <= 1e-8
    assert m.sigma >= 0.19


def _axiom_models(rng):
    out = []
    for _ in range(5):
        out.append(nm(rng.uniform(-1, 1), tuple(int(k) for k in rng.integers(1, 5, size=2))))
        out.append(CopulaModel(Family.AMH, rng.uniform(-1, 1)))
        out.append(CopulaModel(Family.CLAYTON, math.exp(rng.uniform(math.log(1e-3), math.log(20)))))
        out.append(CopulaModel(Family.FRANK, rng.uniform(-30, 30)))
        out.append(CopulaModel(Family.FGM, rng.uniform(-1, 1)))
        out.append(CopulaModel(Family.GAUSSIAN, rng.uniform(-0.99, 0.99)))
        out.append(CopulaModel(Family.PRODUCT))
        out.append(CopulaModel(Family.FRECHET_LOWER))
        out.append(CopulaModel(Family.FRECHET_UPPER))
    return out


@pytest.mark.criterion(5, "copula axioms for 9 families x 5 parameter draws, < 120 s")
def test_copula_axioms(detail):
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    worst_edge, worst_vol, failed = 0.0, 0.0, []
    for i, model in enumerate(_axiom_models(rng)):
        rep = check_copula_axioms(model, n_rectangles=10_000, seed=i)
        worst_edge = max(worst_edge, rep.max_boundary_error)
        worst_vol = min(worst_vol, rep.min_volume)
        if not (rep.max_boundary_error <= 1e-12 and rep.min_volume >= -1e-12):
            failed.append(model.label())
    elapsed = time.perf_counter() - t0
    detail(f"max edge err {worst_edge:.1e}, min volume {worst_vol:.1e}, {elapsed:.1f} s")
    assert not failed, failed
    assert elapsed < 120.0


_ASSOCIATED = {
    "flip1": lambda C, a, b: b - C(1 - a, b),
    "flip2": lambda C, a, b: a - C(a, 1 - b),
    "survival": lambda C, a, b: a + b - 1 + C(1 - a, 1 - b),
}


@pytest.mark.criterion(6, "associated copulas stay in the family, 50x50 lattice, <= 1e-12")
def test_associated_identities(detail):
    grid = interior_lattice(50)
    a, b = grid[..., 0], grid[..., 1]
    worst = 0.0
    for kappa in ((1, 1), (2, 1), (2, 2), (3, 1)):
        for theta in (-1.0, 0.7):
            params = NormalModeParams(theta, kappa)

            def C(x, y, params=params):
                return nm_cdf(params, np.stack([x, y], axis=-1))

            for which, transform in _ASSOCIATED.items():
                direct = transform(C, a, b)
                predicted = nm_cdf(nm_associated(params, which), grid)
                worst = max(worst, float(np.max(np.abs(direct - predicted))))
    detail(f"max deviation {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(7, "tail independence: profiles at u=1e-4 below 0.05 and decreasing")
def test_tail_independence(detail):
    worst = 0.0
    for theta in (1.0, -1.0):
        for kappa in ((1, 1), (2, 1)):
            prof = tail_dependence_profile(nm(theta, kappa), (1e-2, 1e-3, 1e-4))
            _, lam_l, lam_u = prof.rows[-1]
            worst = max(worst, lam_l, lam_u)
            assert lam_l < 0.05 and lam_u < 0.05
            assert prof.lower_decreasing and prof.upper_decreasing
    detail(f"largest profile value at 1e-4: {worst:.2e}")


@pytest.mark.criterion(8, "normal mode (2,1) wins CvMC, AIC and -2N CIC in >= 18/20 seeds, < 10 min")
def test_family_ordering(detail):
    truth = nm(1.0, (2, 1))
    specs = standard_specs((2, 1))
    t0 = time.perf_counter()
    wins = 0
    for seed in range(20):
        ps = pseudo_observations(sample(truth, 2000, seed))
        reports = compare_models(specs, ps)
        nm_rep = next(r for r in reports if r.family == "normal_mode")
        others = [r for r in reports if r is not nm_rep]
        if all(getattr(nm_rep, c) < min(getattr(r, c) for r in others) for c in CRITERIA):
            wins += 1
    elapsed = time.perf_counter() - t0
    detail(f"{wins}/20 seeds, {elapsed:.0f} s")
    assert wins >= 18
    assert elapsed < 600.0


@pytest.mark.criterion(9, "recovery of theta*=0.8 within 0.15 in >= 90%; boundary rate >= 50% at theta*=1")
def test_estimator_recovery(detail):
    spec = FamilySpec(Family.NORMAL_MODE, (2, 1))
    close = boundary = 0
    for seed in range(20):
        fit = fit_mple(spec, pseudo_observations(sample(nm(0.8, (2, 1)), 5000, seed)))
        close += abs(fit.theta_hat - 0.8) <= 0.15
        fit1 = fit_mple(spec, pseudo_observations(sample(nm(1.0, (2, 1)), 5000, seed)))
        boundary += "boundary" in fit1.flags
    detail(f"within 0.15: {close}/20, boundary at theta*=1: {boundary}/20")
    assert close >= 18
    assert boundary >= 10


@pytest.mark.criterion(10, "sampler fidelity with 1e5 draws")
def test_sampler_fidelity(detail):
    u11 = sample(nm(1.0, (1, 1)), 100_000, 11)
    u21 = sample(nm(1.0, (2, 1)), 100_000, 21)
    rho11 = spearmanr(u11[:, 0], u11[:, 1])[0]
    rho21 = spearmanr(u21[:, 0], u21[:, 1])[0]
    grid = np.stack(np.meshgrid(np.arange(1, 21) / 21, np.arange(1, 21) / 21,
                                indexing="ij"), axis=-1)
    gaps = []
    for u, model in ((u11, nm(1.0, (1, 1))), (u21, nm(1.0, (2, 1)))):
        emp = empirical_copula(pseudo_observations(u), grid)
        gaps.append(float(np.max(np.abs(emp - cdf(model, grid)))))
    detail(f"rho(1,1)={rho11:.4f}, rho(2,1)={rho21:.4f}, max CDF gap {max(gaps):.4f}")
    assert abs(rho11 - RHO_11) <= 0.01
    assert abs(rho21) <= 0.01
    assert max(gaps) <= 0.01


@pytest.mark.criterion(11, "bivariate normal CDF at the origin and normal quantile round trip")
def test_gaussian_kernels(detail):
    err_bvn = max(abs(bvn_cdf(0.0, 0.0, r) - (0.25 + math.asin(r) / (2 * PI)))
                  for r in (-0.99, -0.5, 0.0, 0.5, 0.99))
    p = np.random.default_rng(5).random(10_000)
    err_q = float(np.max(np.abs(norm_cdf(inv_norm_cdf(p)) - p)))
    detail(f"bvn err {err_bvn:.1e}, quantile round trip {err_q:.1e}")
    assert err_bvn <= 1e-10
    assert err_q <= 1e-13


@pytest.mark.criterion(12, "Blomqvist beta equals the brute-force value; README documents it")
def test_blomqvist(detail):
    beta = nm_measures(NormalModeParams(1.0, (1, 1))).beta
    detail(f"beta={beta:.16f}, brute force={BLOMQVIST_BRUTE_FORCE:.16f}")
    assert abs(beta - BLOMQVIST_BRUTE_FORCE) <= 1e-12
    text = README.read_text(encoding="utf-8")
    assert "Blomqvist" in text and "0.405285" in text and "0.1013" in text


@pytest.mark.criterion(13, "concordance: kappa=(1,1) totally ordered in theta, kappa=(1,2) incomparable pair")
def test_concordance_ordering(detail):
    thetas = (-1.0, -0.5, 0.0, 0.5, 1.0)
    for i, lo in enumerate(thetas):
        for hi in thetas[i + 1:]:
            res = concordance_compare(nm(lo, (1, 1)), nm(hi, (1, 1)), grid_n=20)
            assert res.verdict is Verdict.A_BELOW_B, (lo, hi, res)
    res = concordance_compare(nm(0.5, (1, 2)), nm(-0.5, (1, 2)), grid_n=20)
    detail(f"10 ordered pairs; (1,2) pair verdict {res.verdict.value}")
    assert res.verdict is Verdict.INCOMPARABLE


@pytest.mark.criterion(14, "fit command writes byte-identical report.json on repeat runs")
def test_cli_determinism(tmp_path, detail):
    u = sample(nm(1.0, (2, 1)), 300, 14)
    csv = tmp_path / "data.csv"
    csv.write_text("x,y\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in u), encoding="utf-8")
    outs = []
    for run in ("a", "b"):
        assert cli_main(["fit", "--input", str(csv), "--kappa", "2,1", "--seed", "3",
                         "--out", str(tmp_path / run)]) == 0
        outs.append((tmp_path / run / "report.json").read_bytes())
    detail(f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}")
    assert outs[0] == outs[1]
