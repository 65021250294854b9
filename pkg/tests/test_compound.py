import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from capx import streams
from capx.compound import (CompoundModel, Estimate, McConfig, Method, annual_loss_sample,
                           exact_tail_poisson_ig, exact_var_poisson_ig, mc_es, mc_srm, mc_tail,
                           mc_var, sample_annual_loss, simulate_annual_losses)
from capx.errors import AtomError, DomainError, InsufficientTailSamplesError, ParameterError
from capx.frequency import Poisson
from capx.severity import InverseGaussian, LogNormal, Pareto
from capx.spectral import SpectralWeight

from conftest import binomial_se

CFG = McConfig(n_samples=1_000_000, seed=42)
POI_IG = CompoundModel(Poisson(5), InverseGaussian(1, 1))
POI_LN = CompoundModel(Poisson(5), LogNormal(0, 1))
POI_PARETO = CompoundModel(Poisson(5), Pareto(1, 2))


class TestSimulation:
    def test_empty_year(self):
        model = CompoundModel(Poisson(1e-12), LogNormal(0, 1))
        assert sample_annual_loss(model, np.random.default_rng(0)) == 0.0

    @pytest.mark.parametrize("model,mean", [(POI_LN, 5 * math.exp(0.5)), (POI_IG, 5.0)])
    def test_wald_identity(self, model, mean):
        z = simulate_annual_losses(model, CFG)
        assert abs(z.mean() - mean) < 3 * z.std() / math.sqrt(len(z))

    def test_sample_size(self):
        assert len(simulate_annual_losses(POI_IG, McConfig(n_samples=70_001))) == 70_001

    def test_worker_count_does_not_change_draws(self):
        a = simulate_annual_losses(POI_LN, McConfig(n_samples=300_000, n_workers=1))
        b = simulate_annual_losses(POI_LN, McConfig(n_samples=300_000, n_workers=4))
        np.testing.assert_array_equal(a, b)

    def test_thread_cap_does_not_change_draws(self, monkeypatch):
        cfg = McConfig(n_samples=200_000, n_workers=8)
        a = simulate_annual_losses(POI_IG, cfg)
        monkeypatch.setenv("CAPX_THREADS", "1")
        assert streams.effective_workers(8) == 1
        np.testing.assert_array_equal(a, simulate_annual_losses(POI_IG, cfg))

    def test_seed_changes_draws(self):
        a = simulate_annual_losses(POI_IG, McConfig(n_samples=10_000, seed=1))
        b = simulate_annual_losses(POI_IG, McConfig(n_samples=10_000, seed=2))
        assert not np.array_equal(a, b)

    def test_prefix_stable_across_sample_sizes(self):
        # blocks are addressed by index, so a longer run extends a shorter one
        n = 2 * streams.BLOCK_SIZE
        a = simulate_annual_losses(POI_IG, McConfig(n_samples=n))
        b = simulate_annual_losses(POI_IG, McConfig(n_samples=n + 12_345))
        np.testing.assert_array_equal(a, b[:n])

    def test_block_streams_distinct(self):
        u = streams.block_rng(7, 0).random(4)
        v = streams.block_rng(7, 1).random(4)
        w = streams.block_rng(7, 0, streams.BOOTSTRAP).random(4)
        assert not np.array_equal(u, v) and not np.array_equal(u, w)


class TestTail:
    def test_zero_threshold_is_claim_probability(self):
        est = mc_tail(POI_IG, 0.0, CFG)
        want = -math.expm1(-5)
        assert abs(est.value - want) < 3 * binomial_se(want, CFG.n_samples)

    def test_negative_threshold_rejected(self):
        with pytest.raises(DomainError):
            mc_tail(POI_IG, -1.0, CFG)

    @pytest.mark.parametrize("x", [5.0, 20.0])
    def test_matches_exact_series(self, x):
        est = mc_tail(POI_IG, x, CFG)
        exact = exact_tail_poisson_ig(5, 1, 1, x)
        assert abs(est.value - exact) < 3 * binomial_se(exact, CFG.n_samples)

    def test_interval_is_plain_float(self):
        est = mc_tail(POI_IG, 10.0, CFG)
        assert type(est.ci_low) is float and type(est.ci_high) is float


class TestVar:
    def test_unit_losses_give_poisson_median(self, unit_loss):
        model = CompoundModel(Poisson(5), unit_loss)
        assert mc_var(model, 0.5, CFG).value == stats.poisson(5).median()

    def test_matches_exact_quantile(self):
        est = mc_var(POI_IG, 0.999, CFG)
        assert est.ci_low <= exact_var_poisson_ig(5, 1, 1, 0.999) <= est.ci_high

    def test_ln_single_claim_rate(self):
        est = mc_var(CompoundModel(Poisson(1), LogNormal(0, 1)), 0.999, CFG)
        # compound quantile sits above the single-loss quantile 21.982
        assert est.value > 21.982

    def test_workers_give_identical_estimate(self):
        a = mc_var(POI_LN, 0.99, McConfig(n_samples=200_000, n_workers=1))
        b = mc_var(POI_LN, 0.99, McConfig(n_samples=200_000, n_workers=3))
        assert a == b

    def test_too_few_tail_samples(self):
        with pytest.raises(InsufficientTailSamplesError):
            mc_var(POI_IG, 0.9999, McConfig(n_samples=100_000))

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_level_rejected(self, alpha):
        with pytest.raises(DomainError):
            mc_var(POI_IG, alpha, CFG)


class TestShortfall:
    def test_es_dominates_var_for_counts(self, unit_loss):
        model = CompoundModel(Poisson(3), unit_loss)
        for a in (0.5, 0.9, 0.99):
            assert mc_es(model, a, CFG).value >= mc_var(model, a, CFG).value

    def test_es_of_counts_by_direct_sum(self, unit_loss):
        # Z = N, so ES is an explicit functional of the Poisson law
        model = CompoundModel(Poisson(3), unit_loss)
        alpha = 0.9
        p = stats.poisson(3)
        k = np.arange(60)
        s = np.clip((p.cdf(k) - alpha), 0, None) - np.clip((p.cdf(k - 1) - alpha), 0, None)
        want = float(np.sum(k * s) / (1 - alpha))
        est = mc_es(model, alpha, CFG)
        assert est.ci_low <= want <= est.ci_high

    def test_pareto_es_over_var_near_two(self):
        ratio = mc_es(POI_PARETO, 0.999, CFG).value / mc_var(POI_PARETO, 0.999, CFG).value
        assert 1.6 <= ratio <= 2.4

    def test_flat_srm_equals_es(self):
        es = mc_es(POI_PARETO, 0.99, CFG).value
        srm = mc_srm(POI_PARETO, 0.99, SpectralWeight.flat(), CFG).value
        assert srm == pytest.approx(es, rel=0.005)

    def test_cara_weight_exceeds_flat(self):
        # CARA shifts weight toward the highest levels
        flat = mc_srm(POI_IG, 0.95, SpectralWeight.flat(), CFG).value
        cara = mc_srm(POI_IG, 0.95, SpectralWeight.cara(2.0), CFG).value
        assert cara > flat

    def test_intervals_contain_point(self):
        for est in (mc_es(POI_IG, 0.99, CFG), mc_srm(POI_IG, 0.99, SpectralWeight.cara(1), CFG)):
            assert est.ci_low <= est.value <= est.ci_high
            assert est.ci_high > est.ci_low


class TestExactSeries:
    def test_zero_threshold(self):
        assert exact_tail_poisson_ig(5, 1, 1, 0.0) == pytest.approx(1 - math.exp(-5), rel=1e-15)

    def test_truncation_point_near_thirty(self):
        assert 25 <= Poisson(5).truncation_point(1e-12) <= 32

    def test_decreasing_in_x(self):
        xs = np.linspace(0.01, 40, 50)
        vals = [exact_tail_poisson_ig(5, 1, 1, x) for x in xs]
        assert np.all(np.diff(vals) < 0)

    def test_var_inverts_tail(self):
        x = exact_var_poisson_ig(5, 1, 1, 0.99)
        assert exact_tail_poisson_ig(5, 1, 1, x) == pytest.approx(0.01, rel=1e-8)

    def test_var_near_atom(self):
        # the IG left tail is so thin that P(0 < Z <= x) reaches 1e-9 only near x = 0.027
        alpha = math.exp(-1) + 1e-9
        x = exact_var_poisson_ig(1, 1, 1, alpha)
        assert 0 < x < 0.05
        assert 1 - exact_tail_poisson_ig(1, 1, 1, x) == pytest.approx(alpha, abs=1e-12)

    def test_atom_rejected(self):
        with pytest.raises(AtomError):
            exact_var_poisson_ig(1, 1, 1, 0.3)

    def test_var_monotone_on_regulatory_grid(self):
        grid = (0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99, 0.995, 0.9995)
        vals = [exact_var_poisson_ig(5, 1, 1, a) for a in grid]
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("tol", [0.0, 1e-3])
    def test_tolerance_range(self, tol):
        with pytest.raises(DomainError):
            exact_tail_poisson_ig(5, 1, 1, 1.0, tol)


class TestContracts:
    def test_estimate_requires_interval_for_mc(self):
        with pytest.raises(ValueError):
            Estimate(1.0, Method.MONTE_CARLO)
        with pytest.raises(ValueError):
            Estimate(1.0, Method.SLA1, 0.5, 1.5)
        with pytest.raises(ValueError):
            Estimate(1.0, Method.MONTE_CARLO, 1.1, 1.5)

    @pytest.mark.parametrize("kw", [dict(n_samples=9_999), dict(seed=-1), dict(seed=2**64),
                                    dict(n_workers=0), dict(ci_level=1.0)])
    def test_mc_config_validation(self, kw):
        with pytest.raises(ParameterError):
            McConfig(**kw)


@given(a=st.floats(0.5, 0.999), b=st.floats(0.5, 0.999))
def test_empirical_var_monotone(a, b):
    sample = annual_loss_sample(POI_LN, CFG)
    lo, hi = sorted((a, b))
    assert sample.var(lo).value <= sample.var(hi).value


@given(x=st.floats(0, 60))
def test_wilson_interval_contains_point(x):
    est = annual_loss_sample(POI_IG, CFG).tail(x)
    assert 0.0 <= est.ci_low <= est.value <= est.ci_high <= 1.0
