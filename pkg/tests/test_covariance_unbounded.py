import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privest.covariance_unbounded import (BIG_XI, BUCKET_BASE, FLOOR_COEFF,
                                          XI, _norm_bucket, p_estimate_trace,
                                          pgce_no_bound, ppc_range,
                                          weak_ppc_no_bound)
from privest.errors import EstimationFailedError, InvalidParameterError
from privest.linalg import GaussianParams, sample_gaussian
from privest.noise import NoiseSource
from privest.privacy import zcdp_to_approx_dp


def gaussian_rows(diagv, n, seed):
    d = len(diagv)
    p = GaussianParams(np.zeros(d), np.diag(np.asarray(diagv, float)))
    return sample_gaussian(p, n, NoiseSource(seed))


def rows_with_sq_norms(sq_norms, d=3):
    out = np.zeros((len(sq_norms), d))
    out[:, 0] = np.sqrt(np.asarray(sq_norms, float))
    return out


class TestNormBucket:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-6, max_value=1e18))
    def test_bucket_brackets_value(self, v):
        r = _norm_bucket(v, r_min=-100)
        assert BUCKET_BASE ** (r - 1) * (1 - 1e-9) < v <= BUCKET_BASE ** r * (1 + 1e-9)

    def test_exact_powers_go_to_own_bucket(self):
        for r in range(1, 6):
            assert _norm_bucket(BUCKET_BASE ** r, r_min=-100) == r

    def test_floor_cutoff(self):
        assert _norm_bucket(0.5, r_min=1) is None
        assert _norm_bucket(-1.0, r_min=-100) is None


class TestPEstimateTrace:
    def test_single_bucket_zero_noise(self):
        c = BUCKET_BASE
        x = rows_with_sq_norms([c * c * 1.5, c * c * 3.0, c ** 3] * 10)
        est = p_estimate_trace(x, 1.0, 1e-3, 0.05, NoiseSource.zero())
        assert est is not None
        assert est.r == 3
        assert est.T == pytest.approx(c ** 3)
        lo, hi = est.certificate
        assert lo == pytest.approx(XI * est.T / x.shape[1])
        assert hi == pytest.approx(BIG_XI * x.shape[1] * est.T)

    def test_spread_data_bottom(self):
        c = BUCKET_BASE
        sq = []
        for r in range(1, 6):  # five buckets at 20% each
            sq.extend([c ** r * 0.9] * 20)
        x = rows_with_sq_norms(sq)
        est = p_estimate_trace(x, 1.0, 1e-3, 0.05, NoiseSource.zero())
        assert est is None

    def test_identity_cov_monte_carlo(self):
        # Sigma = I, d=16, n=5000: the trace 16 lies in [T/C, C*T]
        d, n = 16, 5000
        good = bottom = 0
        for seed in range(20):
            x = gaussian_rows([1.0] * d, n, 1000 + seed)
            est = p_estimate_trace(x, 1.0, 1e-5, 0.05, NoiseSource(seed))
            if est is None:
                bottom += 1
                continue
            good += est.T / est.C <= d <= est.C * est.T
        assert bottom <= 2
        assert good >= 18


class TestWeakPpcNoBound:
    def test_floor_precondition(self):
        x = np.ones((10, 2))
        with pytest.raises(InvalidParameterError):
            weak_ppc_no_bound(x, 1.0, 0.05, (100.0, 200.0), NoiseSource(0))

    def test_empty_interval(self):
        d = 2
        floor = FLOOR_COEFF * d ** 3
        with pytest.raises(InvalidParameterError):
            weak_ppc_no_bound(np.ones((10, d)), 1.0, 0.05,
                              (4 * floor, 2 * floor), NoiseSource(0))

    def test_zero_noise_detects_top_direction(self):
        d = 2
        lam1 = 10.0 * FLOOR_COEFF * d ** 3
        x = gaussian_rows([lam1, 1.0], 50_000, 3)
        out = weak_ppc_no_bound(x, 1.0, 0.05, (lam1 / 2.0, 2.0 * lam1),
                                NoiseSource.zero())
        assert out is not None
        v, a = out
        assert v.shape[1] == 1
        assert abs(v[0, 0]) > 0.999
        # the detection happens at the first kappa with kappa/2 <= lambda_top
        evals = np.linalg.eigvalsh(a)
        assert evals[-1] == pytest.approx(1.0)
        assert 0.0 < evals[0] < 1.0

    def test_spectrum_below_interval_returns_none(self):
        d = 2
        floor = FLOOR_COEFF * d ** 3
        a_lo = 8.0 * floor
        x = gaussian_rows([a_lo / 8.0, 1.0], 50_000, 4)  # top eigenvalue << a/2
        out = weak_ppc_no_bound(x, 1.0, 0.05, (a_lo, 4.0 * a_lo),
                                NoiseSource.zero())
        assert out is None

    def test_certificate_monte_carlo(self):
        # high-accuracy operating point; the transformed spectrum stays in
        # [0.5, 5d^2 + (3/4) lambda_top] in every seed
        d = 4
        lam1 = 10.0 * FLOOR_COEFF * d ** 3
        diagv = [lam1] + [1.0] * (d - 1)
        sigma = np.diag(diagv)
        good = 0
        for seed in range(10):
            x = gaussian_rows(diagv, 1_000_000, 700 + seed)
            out = weak_ppc_no_bound(x, 20.0, 0.05, (lam1 / 4.0, 4.0 * lam1),
                                    NoiseSource(seed))
            assert out is not None
            v, a = out
            ev = np.linalg.eigvalsh(a @ sigma @ a.T)
            good += (ev[0] >= 0.5) and (ev[-1] <= 5 * d ** 2 + 0.75 * lam1)
        assert good >= 9


class TestPpcRange:
    def test_small_spectrum_immediate_break(self):
        d = 4
        x = gaussian_rows([1.0] * d, 20_000, 5)
        pre = ppc_range(x, 1.0, 1e-6, 0.05, NoiseSource.zero())
        assert np.array_equal(pre.A, 2.0 * np.eye(d))
        assert pre.round_log == []
        assert pre.kappa_star == FLOOR_COEFF * BIG_XI * d ** 4

    def test_one_dominant_direction_zero_noise(self):
        d = 6
        diagv = [1e6] + [1.0] * (d - 1)
        sigma = np.diag(diagv)
        x = gaussian_rows(diagv, 100_000, 6)
        pre = ppc_range(x, 1.0, 1e-6, 0.05, NoiseSource.zero())
        assert len(pre.round_log) >= 1
        assert pre.round_log[0].subspace_dim == 1
        evals = np.linalg.eigvalsh(pre.A @ sigma @ pre.A.T)
        assert evals[-1] <= pre.kappa_star
        assert evals[0] >= 1.0

    def test_bottom_vote_raises(self):
        c = BUCKET_BASE
        sq = []
        for r in range(3, 8):  # spread over five large buckets, 20% each
            sq.extend([c ** r * 0.9] * 20)
        x = rows_with_sq_norms(sq)
        with pytest.raises(EstimationFailedError):
            ppc_range(x, 1.0, 1e-6, 0.05, NoiseSource.zero())

    def test_budget_is_basic_composition(self):
        d = 6
        diagv = [1e6] + [1.0] * (d - 1)
        x = gaussian_rows(diagv, 100_000, 7)
        eps, delta = 1.0, 1e-6
        pre = ppc_range(x, eps, delta, 0.05, NoiseSource.zero())
        eps_r = eps / math.sqrt(d * math.log(1.0 / delta))
        delta_r = delta / d
        rho_r = eps_r ** 2 / math.log(1.0 / delta)
        j = len(pre.round_log)
        sweep_eps, _ = zcdp_to_approx_dp(rho_r, delta_r)
        votes = j + 1  # one more vote hits the break rule
        want_eps = votes * eps_r + j * sweep_eps
        want_delta = votes * delta_r + j * delta_r
        assert pre.budget_spent.regime == "approx"
        assert pre.budget_spent.eps == pytest.approx(want_eps, rel=1e-12)
        assert pre.budget_spent.delta == pytest.approx(want_delta, rel=1e-12)


class TestPgceNoBound:
    def test_zero_noise_exact(self):
        d = 4
        diagv = [1.0, 50.0, 1e4, 1e7]
        x = gaussian_rows(diagv, 50_000, 8)
        est = pgce_no_bound(x, 1.0, 1e-6, 0.05, NoiseSource.zero())
        emp = x.T @ x / x.shape[0]
        rel = np.linalg.norm(est.sigma_hat - emp) / np.linalg.norm(emp)
        assert rel < 1e-10
        assert est.budget_spent.regime == "approx"

    def test_noisy_accuracy(self):
        # feasible operating point for the full noisy pipeline
        from privest.linalg import mahalanobis_mat
        d = 2
        diagv = [1.0, 5e4]
        sigma = np.diag(diagv)
        errs = []
        for seed in range(3):
            x = gaussian_rows(diagv, 2_000_000, 500 + seed)
            est = pgce_no_bound(x, 4.0, 1e-8, 0.05, NoiseSource(seed))
            errs.append(mahalanobis_mat(est.sigma_hat - sigma, sigma))
        assert float(np.median(errs)) <= 0.5

    def test_budget_composes_preconditioner_and_estimator(self):
        d = 4
        diagv = [1.0, 50.0, 1e4, 1e7]
        x = gaussian_rows(diagv, 50_000, 9)
        eps, delta = 1.0, 1e-6
        est = pgce_no_bound(x, eps, delta, 0.05, NoiseSource.zero())
        rho_final = eps ** 2 / (8.0 * math.log(1.0 / delta))
        final_eps, _ = zcdp_to_approx_dp(rho_final, delta)
        # preconditioner budget recomputed the same way as in TestPpcRange
        eps_r = eps / math.sqrt(d * math.log(1.0 / delta))
        delta_r = delta / d
        rho_r = eps_r ** 2 / math.log(1.0 / delta)
        j = len(est.diagnostics["preconditioner_rounds"])
        sweep_eps, _ = zcdp_to_approx_dp(rho_r, delta_r)
        want_eps = (j + 1) * eps_r + j * sweep_eps + final_eps
        want_delta = (j + 1) * delta_r + j * delta_r + delta
        assert est.budget_spent.eps == pytest.approx(want_eps, rel=1e-12)
        assert est.budget_spent.delta == pytest.approx(want_delta, rel=1e-12)
