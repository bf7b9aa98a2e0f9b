"""Tests for app/services/analytic.py."""
import math

import numpy as np
import pytest

from app.models import ProductSnrParams, QSeriesCoeffs, SnrDistribution
from app.services.analytic import LN2, Q_SERIES_ERROR_BOUND, AnalyticService
from app.services.geometry import GeometryService
from app.services.validation import ERGODIC_GRID_A, ERGODIC_GRID_B, ValidationService
from shared.common.errors import DomainError, InfeasibleUsersError


class TestSnrMoments:
    """Gamma moment matching and the log-normal fit."""

    def test_single_bs_first_moment(self, budget):
        beta1, _ = AnalyticService.snr_moments([100.0], budget)
        expected = budget.snr_scale * math.exp(budget.sigma_z ** 2 / 2) * 100.0 ** -budget.alpha
        assert beta1 == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("antennas,expected", [(1, 2.60183), (2, 2.31414), (4, 2.13182)])
    def test_single_bs_variance(self, antennas, expected, budget_factory):
        fit = AnalyticService.snr_lognormal_fit([250.0], budget_factory(antennas_per_bs=antennas))
        assert fit.sigma ** 2 == pytest.approx(expected, abs=1e-5)

    @pytest.mark.parametrize("distances", [[225.0], [50.0, 400.0], [225.2, 225.2, 225.2], [10.0, 900.0, 3000.0]])
    def test_moment_identity(self, distances, budget):
        fit = AnalyticService.snr_lognormal_fit(distances, budget)
        beta1, beta2 = AnalyticService.snr_moments(distances, budget)
        assert math.exp(fit.mu + fit.sigma ** 2 / 2) == pytest.approx(beta1, rel=1e-10)
        assert math.exp(2 * fit.mu + 2 * fit.sigma ** 2) == pytest.approx(beta2, rel=1e-10)

    @pytest.mark.parametrize("factor", [0.5, 2.0, 10.0])
    def test_scale_law(self, factor, budget):
        distances = [225.0, 260.0, 310.0]
        base = AnalyticService.snr_lognormal_fit(distances, budget)
        scaled = AnalyticService.snr_lognormal_fit([factor * d for d in distances], budget)
        assert scaled.sigma == pytest.approx(base.sigma, rel=1e-9)
        assert scaled.mu == pytest.approx(base.mu - budget.alpha * math.log(factor), rel=1e-9)

    def test_far_spacing_stays_finite(self, budget):
        log_beta1, log_beta2 = AnalyticService.log_moments(np.array([1e6, 1.2e6, 2e6]), budget)
        assert np.isfinite(log_beta1) and np.isfinite(log_beta2)

    def test_cooperation_narrows_spread(self, budget):
        alone = AnalyticService.snr_lognormal_fit([225.0], budget)
        together = AnalyticService.snr_lognormal_fit([225.0, 225.0, 225.0], budget)
        assert together.sigma < alone.sigma
        assert together.mu > alone.mu

    def test_vectorised_fit_matches_scalar(self, triangle, budget):
        points = np.array([[20.0, 10.0], [195.0, 112.58], [300.0, 40.0]])
        mu, sigma = AnalyticService.fit_lognormal_arrays(GeometryService.distance_matrix(points, triangle), budget)
        for k, (x, y) in enumerate(points):
            d = np.hypot([b.x - x for b in triangle.bs_positions], [b.y - y for b in triangle.bs_positions])
            fit = AnalyticService.snr_lognormal_fit(list(d), budget)
            assert mu[k] == pytest.approx(fit.mu, rel=1e-12)
            assert sigma[k] == pytest.approx(fit.sigma, rel=1e-12)

    def test_empty_distances(self, budget):
        with pytest.raises(DomainError):
            AnalyticService.snr_lognormal_fit([], budget)


class TestProductSnr:
    """Sum of log-normal exponents."""

    def test_single_user_identity(self):
        p = AnalyticService.product_snr([SnrDistribution(mu=3.5, sigma=1.2)])
        assert p.a_bar == 3.5
        assert p.b_bar == pytest.approx(1.2)

    def test_sums(self):
        p = AnalyticService.product_snr([SnrDistribution(mu=1.0, sigma=3.0), SnrDistribution(mu=2.0, sigma=4.0)])
        assert p.a_bar == 3.0
        assert p.b_bar == pytest.approx(5.0)

    def test_empty(self):
        with pytest.raises(DomainError):
            AnalyticService.product_snr([])


class TestQFunction:
    """Exact Q and the exponential-polynomial series."""

    def test_exact_reference_values(self):
        assert AnalyticService.q_exact(0.0) == 0.5
        assert AnalyticService.q_exact(1.2815516) == pytest.approx(0.1, abs=1e-7)
        assert AnalyticService.q_exact(8.0) == pytest.approx(6.22096e-16, rel=1e-4)

    def test_exact_reflection(self):
        x = np.linspace(-5.0, 5.0, 41)
        assert np.allclose(AnalyticService.q_exact(x) + AnalyticService.q_exact(-x), 1.0, atol=1e-15)

    def test_series_at_zero(self):
        assert AnalyticService.q_series(0.0) == pytest.approx(0.492113, abs=1e-6)

    def test_first_coefficient(self):
        coeffs = QSeriesCoeffs()
        assert coeffs.a_j[0] == pytest.approx(1.98 / (1.135 * math.sqrt(math.pi) * 2.0), rel=1e-14)
        assert len(coeffs.a_j) == 10
        assert all(np.sign(c) == (-1) ** j for j, c in enumerate(coeffs.a_j))

    def test_max_error(self):
        err, where = AnalyticService.q_series_max_error()
        assert err == pytest.approx(0.00788751, abs=1e-6)
        assert where == 0.0
        assert err < Q_SERIES_ERROR_BOUND < 1e-2

    def test_series_stays_in_unit_interval(self):
        values = AnalyticService.q_series(np.linspace(-10.0, 10.0, 2001))
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_series_reflection(self):
        assert AnalyticService.q_series(-1.5) == pytest.approx(1.0 - AnalyticService.q_series(1.5), abs=1e-15)


class TestRcp:
    """Rate coverage probability of the log-normal product."""

    def test_median(self):
        p = ProductSnrParams(a_bar=20.0, b_bar=3.0)
        assert AnalyticService.rcp(20.0 / LN2, p) == pytest.approx(0.5, abs=1e-15)

    def test_one_sigma(self):
        p = ProductSnrParams(a_bar=20.0, b_bar=3.0)
        assert AnalyticService.rcp((20.0 + 3.0) / LN2, p) == pytest.approx(AnalyticService.q_exact(1.0), rel=1e-12)

    def test_deep_tail(self):
        p = ProductSnrParams(a_bar=0.0, b_bar=1.0)
        value = AnalyticService.rcp(40.0 / LN2, p)
        assert 0.0 <= value < 1e-300

    def test_deterministic_step(self):
        p = ProductSnrParams(a_bar=2.0, b_bar=0.0)
        assert AnalyticService.rcp(2.0, p) == 1.0
        assert AnalyticService.rcp(3.0, p) == 0.0

    def test_decreasing_in_threshold(self):
        values = AnalyticService.rcp_array(np.linspace(0.0, 60.0, 121), 25.0, 4.0)
        assert np.all(np.diff(values) <= 0)

    def test_non_positive_threshold_is_near_certain(self):
        p = ProductSnrParams(a_bar=30.0, b_bar=3.0)
        assert AnalyticService.rcp(0.0, p) > 1.0 - 1e-15


class TestErgodicSumRate:
    """Closed-form ergodic sum-rate against quadrature."""

    def test_deterministic(self):
        assert AnalyticService.ergodic_sum_rate(ProductSnrParams(a_bar=LN2, b_bar=0.0)) == pytest.approx(1.0)
        assert AnalyticService.ergodic_sum_rate(ProductSnrParams(a_bar=-1.0, b_bar=0.0)) == 0.0

    @pytest.mark.parametrize("b_bar", [1e-2, 1e-3, 1e-4])
    def test_small_spread_converges(self, b_bar):
        value = AnalyticService.ergodic_sum_rate(ProductSnrParams(a_bar=2.0, b_bar=b_bar))
        assert value == pytest.approx(2.0 / LN2, abs=10 * b_bar)

    def test_grid_against_quadrature(self):
        for a_bar in ERGODIC_GRID_A:
            for b_bar in ERGODIC_GRID_B:
                p = ProductSnrParams(a_bar=a_bar, b_bar=b_bar)
                gap = abs(AnalyticService.ergodic_sum_rate(p) - AnalyticService.ergodic_by_quadrature(p))
                assert gap <= ValidationService.ergodic_tolerance(b_bar), (a_bar, b_bar)

    def test_negative_mean_uses_quadrature(self):
        p = ProductSnrParams(a_bar=-2.0, b_bar=1.5)
        assert AnalyticService.ergodic_sum_rate(p) == AnalyticService.ergodic_by_quadrature(p)

    def test_quadrature_tail_only_when_negative(self):
        p = ProductSnrParams(a_bar=-2.0, b_bar=1.5)
        assert 0.0 < AnalyticService.ergodic_by_quadrature(p) < 1.0

    def test_increasing_in_mean(self):
        values = [AnalyticService.ergodic_sum_rate(ProductSnrParams(a_bar=a, b_bar=2.0)) for a in (5.0, 10.0, 20.0)]
        assert values == sorted(values)


class TestWorstPointMetrics:
    """Worst-user RCP and ergodic rate for the canonical regions."""

    def test_reference_rcp_at_390m(self, triangle, budget):
        assert AnalyticService.worst_user_rcp(1.0, triangle, 3, budget) == pytest.approx(0.8768, abs=5e-4)

    def test_planned_spacing_meets_target(self, planned_triangle, budget):
        assert AnalyticService.worst_user_rcp(1.0, planned_triangle, 3, budget) == pytest.approx(0.7, abs=1e-3)

    def test_decreasing_in_spacing(self, budget):
        values = [
            AnalyticService.worst_user_rcp(1.0, GeometryService.build_coop_region(3, d), 3, budget)
            for d in (200.0, 300.0, 390.0, 500.0, 700.0)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_ergodic_is_per_user(self, triangle, budget):
        product = AnalyticService.worst_point_product(triangle, 3, budget)
        assert AnalyticService.worst_user_ergodic(triangle, 3, budget) == pytest.approx(
            AnalyticService.ergodic_sum_rate(product) / 3, rel=1e-14
        )

    def test_sum_rcp_at_worst_point_matches(self, triangle, budget):
        worst = GeometryService.worst_point(triangle)
        assert AnalyticService.sum_rcp_at(triangle, [worst] * 3, 3.0, budget) == pytest.approx(
            AnalyticService.worst_user_rcp(1.0, triangle, 3, budget), rel=1e-12
        )

    def test_ergodic_at_matches_worst(self, triangle, budget):
        worst = GeometryService.worst_point(triangle)
        assert AnalyticService.ergodic_at(triangle, [worst] * 2, budget) == pytest.approx(
            2 * AnalyticService.worst_user_ergodic(triangle, 2, budget), rel=1e-12
        )

    def test_too_many_users(self, triangle, budget):
        with pytest.raises(InfeasibleUsersError):
            AnalyticService.worst_user_rcp(1.0, triangle, 4, budget)

    def test_more_antennas_help(self, planned_triangle, budget_factory):
        values = [
            AnalyticService.worst_user_rcp(1.0, planned_triangle, 3, budget_factory(antennas_per_bs=m))
            for m in (1, 2, 4)
        ]
        assert values[0] < values[1] < values[2]

    def test_grid_at_worst_point(self, triangle, budget):
        worst = GeometryService.worst_point(triangle)
        value = AnalyticService.user_rcp_grid(triangle, np.array([[worst.x, worst.y]]), 3, 3.0, budget)[0]
        assert value == pytest.approx(AnalyticService.worst_user_rcp(1.0, triangle, 3, budget), rel=1e-12)
