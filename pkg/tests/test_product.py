import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privest.errors import (EmptyInputError, InsufficientSamplesError,
                            InvalidParameterError)
from privest.metrics import tv_product_exact
from privest.noise import NoiseSource
from privest.product import (ProductModel, num_rounds, ppde,
                             required_block_size, sample_product, tmean,
                             trunc)


class TestTrunc:
    def test_inside_ball_unchanged(self):
        x = np.array([0.3, 0.4])
        assert np.array_equal(trunc(x, 1.0), x)

    def test_known_projection(self):
        out = trunc(np.ones(4), 1.0)
        assert np.allclose(out, np.full(4, 0.5))

    def test_direction_preserved(self):
        x = np.array([3.0, 4.0])
        out = trunc(x, 1.0)
        assert np.allclose(out / np.linalg.norm(out),
                           x / np.linalg.norm(x))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-10, max_value=10), min_size=1,
                    max_size=6),
           st.floats(min_value=0.0, max_value=5.0))
    def test_idempotent_and_bounded(self, vals, b):
        x = np.array(vals)
        once = trunc(x, b)
        assert np.linalg.norm(once) <= b + 1e-9
        assert np.allclose(trunc(once, b), once, atol=1e-12)

    def test_negative_radius(self):
        with pytest.raises(InvalidParameterError):
            trunc(np.ones(2), -1.0)


class TestTmean:
    def test_plain_mean_when_inside(self):
        x = np.array([[0.1, 0.2], [0.3, 0.0]])
        assert np.allclose(tmean(x, 10.0), x.mean(axis=0))

    def test_single_zero_row(self):
        assert np.array_equal(tmean(np.zeros((1, 3)), 1.0), np.zeros(3))

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            tmean(np.zeros((0, 2)), 1.0)

    def test_sensitivity_adversarial_pairs(self):
        # replacing one row moves tmean by <= 2B/m in general; for 0/1-valued
        # rows (nonnegative orthant) the worst case is sqrt(2)*B/m
        rng = np.random.default_rng(0)
        m, d, b = 10, 4, 1.5
        worst_general = 0.0
        for _ in range(300):
            x = rng.normal(size=(m, d)) * rng.choice([0.2, 1.0, 5.0])
            y = x.copy()
            y[0] = rng.normal(size=d) * rng.choice([0.2, 1.0, 5.0])
            change = np.linalg.norm(tmean(x, b) - tmean(y, b))
            worst_general = max(worst_general, change)
            assert change <= 2.0 * b / m + 1e-12
        # the opposing pair achieves 2B/m exactly
        x = np.zeros((m, d))
        x[0, 0] = b
        y = x.copy()
        y[0, 0] = -b
        assert np.linalg.norm(tmean(x, b) - tmean(y, b)) == \
            pytest.approx(2.0 * b / m)
        # binary rows stay under sqrt(2)*B/m
        bb = 1.0
        worst_binary = 0.0
        for _ in range(300):
            x = rng.integers(0, 2, size=(m, d)).astype(float)
            y = x.copy()
            y[0] = rng.integers(0, 2, size=d)
            worst_binary = max(worst_binary,
                               np.linalg.norm(tmean(x, bb) - tmean(y, bb)))
        assert worst_binary <= math.sqrt(2.0) * bb / m + 1e-12


class TestProductModel:
    def test_valid(self):
        m = ProductModel(p=[0.0, 0.5, 1.0])
        assert m.dim == 3

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            ProductModel(p=[0.5, 1.2])

    def test_sampling_frequencies(self):
        model = ProductModel(p=[0.1, 0.7])
        x = sample_product(model, 50_000, NoiseSource(1))
        assert set(np.unique(x)) <= {0, 1}
        assert np.all(np.abs(x.mean(axis=0) - model.p) < 0.01)


class TestRounds:
    def test_num_rounds(self):
        assert num_rounds(2) == 1
        assert num_rounds(4) == 1
        assert num_rounds(8) == 2
        assert num_rounds(12) == 3
        assert num_rounds(64) == 5

    def test_required_block_size_is_conservative(self):
        # the analysis constant is astronomically larger than desk scale
        assert required_block_size(12, 1.0, 0.15, 0.05, 3) > 1_000_000


class TestPpde:
    def test_threshold_logic_small(self):
        # d=2, p=(0.4, 0.01): round 1 freezes coordinate 0 (0.4 >= 3/16),
        # coordinate 1 descends to the final round
        model = ProductModel(p=[0.4, 0.01])
        x = sample_product(model, 40_000, NoiseSource(2))
        diag = {}
        est = ppde(x, 1.0, 0.2, 0.05, NoiseSource.zero(), m=20_000,
                   diagnostics=diag)
        r1 = diag["rounds"][0]
        assert r1.frozen == [0]
        assert r1.tau == pytest.approx(3.0 / 16.0)
        assert est.p[0] == pytest.approx(0.4, abs=0.02)
        assert est.p[1] == pytest.approx(0.01, abs=0.005)
        final = diag["rounds"][-1]
        assert final.active == [1]

    def test_all_zero_data(self):
        x = np.zeros((200, 4), dtype=int)
        est = ppde(x, 1.0, 0.2, 0.05, NoiseSource.zero(), m=50)
        assert np.array_equal(est.p, np.zeros(4))

    def test_rejects_non_binary(self):
        with pytest.raises(InvalidParameterError):
            ppde(np.full((10, 2), 0.5), 1.0, 0.2, 0.05, NoiseSource(0), m=5)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            ppde(np.zeros((10, 8), dtype=int), 1.0, 0.2, 0.05, NoiseSource(0),
                 m=100)

    def test_disjoint_blocks(self):
        # every row index is read by exactly one round
        model = ProductModel(p=[0.4, 0.1, 0.05, 0.3, 0.02, 0.25, 0.15, 0.01])
        x = sample_product(model, 6000, NoiseSource(3))
        diag = {}
        ppde(x, 1.0, 0.2, 0.05, NoiseSource(4), m=1500, diagnostics=diag)
        seen = []
        for r in diag["rounds"]:
            seen.append(r.rows)
        starts = [a for a, _ in seen]
        stops = [b for _, b in seen]
        assert starts == sorted(starts)
        for (a1, b1), (a2, b2) in zip(seen, seen[1:]):
            assert b1 <= a2  # no overlap
        assert max(stops) <= x.shape[0]

    def test_state_transitions(self):
        model = ProductModel(p=[0.3] * 16)
        x = sample_product(model, 5000, NoiseSource(5))
        diag = {}
        ppde(x, 1.0, 0.2, 0.05, NoiseSource(6), m=1000, diagnostics=diag)
        rounds = diag["rounds"]
        partition_rounds = rounds[:-1] if rounds[-1].frozen == rounds[-1].active else rounds
        for prev, cur in zip(partition_rounds, partition_rounds[1:]):
            assert cur.u == pytest.approx(prev.u / 2.0)
            assert cur.tau == pytest.approx(prev.tau / 2.0)
            assert set(cur.active) <= set(prev.active)
        for r in partition_rounds:
            # tau_r = (3/4) * u_{r+1} at every round
            assert r.tau == pytest.approx(0.75 * (r.u / 2.0))

    def test_output_in_unit_cube_every_seed(self):
        model = ProductModel(p=[0.4, 0.05, 0.2, 0.01])
        x = sample_product(model, 400, NoiseSource(7))
        for seed in range(30):
            est = ppde(x, 0.5, 0.3, 0.1, NoiseSource(seed), m=80)
            assert np.all(est.p >= 0.0) and np.all(est.p <= 1.0)

    def test_frozen_chi2_zero_noise_exact_means(self):
        # with zero noise and population means injected as data, frozen
        # coordinates carry their exact mean: the chi-squared gap is 0
        p = np.array([0.4, 0.3, 0.25, 0.2])
        # build a block whose empirical mean is exactly p
        m = 20
        x = np.zeros((m * 4, 4), dtype=int)
        for j, pj in enumerate(p):
            k = int(round(pj * m * 4))
            x[:k, j] = 1
        rng = np.random.default_rng(8)
        for j in range(4):
            rng.shuffle(x[:, j])
        est = ppde(x, 1.0, 0.2, 0.05, NoiseSource.zero(), m=40)
        assert np.allclose(np.sort(est.p), np.sort(p), atol=0.1)

    def test_accuracy_mixed_bias(self):
        # d=12 mixed-bias model at desk-scale m; quick 5-seed version of the
        # acceptance sweep
        d = 12
        p = np.array([0.4] * 4 + [0.05] * 4 + [1.0 / d] * 4)
        model = ProductModel(p=p)
        good = 0
        for seed in range(5):
            x = sample_product(model, 80_000, NoiseSource(900 + seed))
            est = ppde(x, 1.0, 0.15, 0.05, NoiseSource(seed), m=20_000)
            good += tv_product_exact(p, est.p) <= 0.15
        assert good >= 4
