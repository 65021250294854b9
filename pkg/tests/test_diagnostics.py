import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from capx.compound import CompoundModel, McConfig
from capx.diagnostics import (DiagnosticReport, big_jump_check, default_grid, rv_index_estimate,
                              subexp_ratio, two_fold_sf)
from capx.errors import DomainError
from capx.frequency import Poisson
from capx.severity import HeavyWeibull, InverseGaussian, LogNormal, Pareto

CFG = McConfig(n_samples=1_000_000, seed=42)


class TestReport:
    def test_converged_uses_last_decile(self):
        xs = np.arange(1, 21.0)
        vals = [5.0] * 18 + [2.001, 1.999]
        rep = DiagnosticReport.build("r", xs, vals, 2.0, 1e-3)
        assert rep.converged and rep.max_deviation_at_tail == pytest.approx(5e-4)

    def test_nan_target_never_converges(self):
        rep = DiagnosticReport.build("r", [1.0, 2.0], [1.0, 1.0], math.nan, 1.0)
        assert not rep.converged

    def test_empty(self):
        assert not DiagnosticReport.build("r", [], [], 1.0, 0.1).converged


class TestTwoFold:
    def test_ig_closed_form_matches_quadrature(self):
        ig = InverseGaussian(1, 1)
        for x in (0.5, 3.0, 12.0):
            closed = two_fold_sf(ig, x, "closed_form")
            assert two_fold_sf(ig, x, "quadrature") == pytest.approx(closed, rel=1e-8)

    def test_pareto_quadrature_against_monte_carlo(self):
        sev, x = Pareto(1, 2), 20.0
        rng = np.random.default_rng(9)
        s = sev.sample(rng, 2_000_000) + sev.sample(rng, 2_000_000)
        p = two_fold_sf(sev, x)
        assert abs(np.mean(s > x) - p) < 4 * math.sqrt(p / 2e6)

    def test_closed_form_only_for_ig(self):
        with pytest.raises(DomainError):
            two_fold_sf(LogNormal(0, 1), 3.0, "closed_form")


class TestSubexpRatio:
    def test_ig_limit_is_not_two(self):
        # IG(mu, lam) sums have tail ratio tending to 2 exp(lam/mu), not 2
        ig = InverseGaussian(1, 1)
        x = ig.quantile(1 - 1e-6)
        far = float(two_fold_sf(ig, 400.0) / ig.sf(400.0))
        assert far == pytest.approx(2 * math.e, rel=0.005)
        rep = subexp_ratio(ig, [x / 2, x])
        assert rep.grid[-1][1] == pytest.approx(5.071, abs=1e-3)
        assert not rep.converged

    def test_pareto_near_two(self):
        rep = subexp_ratio(Pareto(1, 2), [10.0, 100.0, 1000.0])
        assert abs(rep.grid[-1][1] / 2 - 1) < 0.02
        assert rep.converged

    def test_light_tail_control(self):
        rep = subexp_ratio(Pareto(1, 200), [0.01, 0.02, 0.05])
        assert all(v > 2.5 for _, v in rep.grid)
        assert not rep.converged

    def test_weibull_drifts_down_to_two(self):
        rep = subexp_ratio(HeavyWeibull(1, 0.3), default_grid(HeavyWeibull(1, 0.3), 6, 1e-6))
        vals = np.array([v for _, v in rep.grid])
        # overshoot near the bulk, then a slow descent toward the limit
        assert np.all(np.diff(vals[1:]) < 0) and np.all(vals > 2)

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            subexp_ratio(Pareto(1, 2), [10.0, 5.0])


class TestRvIndex:
    @pytest.mark.parametrize("a", [2.0, 0.5])
    def test_pareto_index_recovered(self, a):
        rep = rv_index_estimate(Pareto(1, a), [10.0, 100.0, 1e3, 1e4])
        assert rep.grid[-1][1] == pytest.approx(a, rel=1e-3)
        assert rep.converged and rep.limit_target == a

    def test_pareto_analytic_ratio(self):
        x = 1e4
        want = 2 * math.log((1 + 2 * x) / (1 + x)) / math.log(2)
        assert rv_index_estimate(Pareto(1, 2), [x]).grid[0][1] == pytest.approx(want, rel=1e-12)

    def test_lognormal_escapes(self):
        rep = rv_index_estimate(LogNormal(0, 1), [10.0, 100.0])
        assert rep.grid[1][1] > rep.grid[0][1]
        assert not rep.converged and math.isnan(rep.limit_target)

    def test_underflow_truncates_with_warning(self, unit_loss):
        with pytest.warns(UserWarning, match="underflows"):
            rep = rv_index_estimate(unit_loss, [0.1, 0.2, 0.6], target=1.0)
        assert len(rep.grid) == 2


class TestBigJump:
    def test_single_summand_exact(self):
        rep, = big_jump_check(CompoundModel(Poisson(1), Pareto(1, 2)), [1.0, 10.0], CFG, (1,))
        assert [v for _, v in rep.grid] == [1.0, 1.0] and rep.converged

    def test_pareto_pair_at_high_quantile(self):
        sev = Pareto(1, 2)
        rng = np.random.default_rng(3)
        x = float(np.quantile(sev.sample(rng, 4_000_000) + sev.sample(rng, 4_000_000), 0.9999))
        rep, = big_jump_check(CompoundModel(Poisson(1), sev), [x], CFG, (2,))
        assert 0.9 <= rep.grid[0][1] <= 1.3

    def test_heavier_lognormal_converges_faster(self):
        ratios = []
        for sigma in (1.0, 3.0):
            sev = LogNormal(0, sigma)
            x = float(sev.isf(1e-3))
            rep, = big_jump_check(CompoundModel(Poisson(1), sev), [x], CFG, (2,))
            ratios.append(rep.grid[0][1])
        assert abs(ratios[1] - 1) < abs(ratios[0] - 1)

    def test_deterministic_and_worker_free(self):
        model = CompoundModel(Poisson(1), LogNormal(0, 2))
        a = big_jump_check(model, [5.0, 50.0], McConfig(n_samples=200_000, n_workers=1))
        b = big_jump_check(model, [5.0, 50.0], McConfig(n_samples=200_000, n_workers=4))
        assert a == b

    def test_sparse_tail_truncated(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rep, = big_jump_check(CompoundModel(Poisson(1), Pareto(1, 2)), [10.0, 1e6],
                                  McConfig(n_samples=20_000), (2,))
        assert len(rep.grid) == 1 and caught


@given(a=st.floats(0.3, 8), c=st.floats(0.1, 10))
def test_rv_index_approaches_alpha(a, c):
    rep = rv_index_estimate(Pareto(c, a), [1e6 * c])
    assert rep.grid[0][1] == pytest.approx(a, rel=1e-5)


@given(sigma=st.floats(0.5, 3), q=st.floats(1e-7, 1e-2))
def test_default_grid_matches_tail_levels(sigma, q):
    sev = LogNormal(0, sigma)
    grid = default_grid(sev, n_points=5, min_tail=q)
    assert np.all(np.diff(grid) > 0)
    assert sev.sf(grid[-1]) == pytest.approx(q, rel=1e-9)
