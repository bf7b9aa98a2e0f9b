"""
Closed-form rate coverage probability and ergodic sum-rate
"""
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from app.models import (
    CoopRegion,
    LinkBudget,
    Point2D,
    ProductSnrParams,
    QSeriesCoeffs,
    SnrDistribution,
    check_users,
)
from app.services.geometry import GeometryService
from shared.common.errors import DomainError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Largest |q_series - q_exact| on [0, 8] for the standard coefficients, attained at x = 0
Q_SERIES_ERROR_BOUND = 7.9e-3

ArrayLike = Union[float, np.ndarray]


def _scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


class AnalyticService:
    """Gamma/log-normal SNR moment matching and the rate expressions built on it"""

    @staticmethod
    def log_moments(distances: np.ndarray, budget: LinkBudget) -> Tuple[np.ndarray, np.ndarray]:
        """
        (ln beta1, ln beta2) for distance arrays of shape (..., N).

        Distances are factored by their minimum so the sums stay in range
        for any spacing.
        """
        d = np.asarray(distances, dtype=float)
        if d.shape[-1] == 0:
            raise DomainError("distance list is empty", error_code="domain")

        m = budget.antennas_per_bs
        alpha = budget.alpha
        var_z = budget.sigma_z ** 2
        log_scale = math.log(budget.snr_scale)

        log_d = np.log(d)
        log_d_min = log_d.min(axis=-1)
        weights = np.exp(-alpha * (log_d - log_d_min[..., None]))
        s1 = weights.sum(axis=-1)
        s2 = (weights * weights).sum(axis=-1)
        cross = np.maximum(s1 * s1 - s2, 0.0)

        log_beta1 = math.log(m) + log_scale + 0.5 * var_z + np.log(s1) - alpha * log_d_min
        log_beta2 = (
            math.log(m) + 2.0 * log_scale + var_z
            + np.log((m + 1) * math.exp(var_z) * s2 + m * cross)
            - 2.0 * alpha * log_d_min
        )
        return log_beta1, log_beta2

    @staticmethod
    def snr_moments(distances: Sequence[float], budget: LinkBudget) -> Tuple[float, float]:
        """E[SNR] and E[SNR^2] of one user served by BSs at the given distances"""
        log_beta1, log_beta2 = AnalyticService.log_moments(np.asarray(distances, dtype=float), budget)
        return math.exp(float(log_beta1)), math.exp(float(log_beta2))

    @staticmethod
    def fit_lognormal_arrays(distance_matrix: np.ndarray, budget: LinkBudget) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorised snr_lognormal_fit; returns (mu, sigma) arrays over the leading axes"""
        log_beta1, log_beta2 = AnalyticService.log_moments(distance_matrix, budget)
        mu = 2.0 * log_beta1 - 0.5 * log_beta2
        var = np.maximum(log_beta2 - 2.0 * log_beta1, 0.0)
        return mu, np.sqrt(var)

    @staticmethod
    def snr_lognormal_fit(distances: Sequence[float], budget: LinkBudget) -> SnrDistribution:
        """Log-normal matching the first two moments of one user's SNR"""
        if len(distances) == 0:
            raise DomainError("distance list is empty", error_code="domain")
        mu, sigma = AnalyticService.fit_lognormal_arrays(np.asarray(distances, dtype=float), budget)
        return SnrDistribution(mu=float(mu), sigma=float(sigma))

    @staticmethod
    def product_snr(params: Sequence[SnrDistribution]) -> ProductSnrParams:
        """Log-normal parameters of the product of independent user SNRs"""
        if len(params) == 0:
            raise DomainError("no SNR distributions given", error_code="domain")
        return ProductSnrParams(
            a_bar=math.fsum(p.mu for p in params),
            b_bar=math.sqrt(math.fsum(p.sigma ** 2 for p in params)),
        )

    @staticmethod
    def q_exact(x: ArrayLike) -> ArrayLike:
        """Standard normal tail Q(x) = erfc(x / sqrt(2)) / 2"""
        return _scalar_or_array(0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)))

    @staticmethod
    def q_series(x: ArrayLike, coeffs: Optional[QSeriesCoeffs] = None) -> ArrayLike:
        """
        Exponential-polynomial approximation of Q, clamped to [0, 1].

        Negative arguments use the reflection 1 - q_series(-x).
        """
        coeffs = coeffs or QSeriesCoeffs.from_settings()
        x_arr = np.asarray(x, dtype=float)
        ax = np.abs(x_arr)
        raw = np.exp(-0.5 * ax * ax) * np.polynomial.polynomial.polyval(ax, coeffs.a_j)
        value = np.clip(raw, 0.0, 1.0)
        return _scalar_or_array(np.where(x_arr < 0, 1.0 - value, value))

    @staticmethod
    def q_series_max_error(coeffs: Optional[QSeriesCoeffs] = None, upper: float = 8.0, step: float = 1e-3) -> Tuple[float, float]:
        """(max |q_series - q_exact|, argmax) on [0, upper]"""
        grid = np.linspace(0.0, upper, int(round(upper / step)) + 1)
        err = np.abs(AnalyticService.q_series(grid, coeffs) - AnalyticService.q_exact(grid))
        k = int(np.argmax(err))
        return float(err[k]), float(grid[k])

    @staticmethod
    def rcp_array(threshold_T: ArrayLike, a_bar: ArrayLike, b_bar: ArrayLike) -> ArrayLike:
        """Elementwise P(R'' > T); b_bar = 0 gives the deterministic step"""
        t = np.asarray(threshold_T, dtype=float)
        a = np.asarray(a_bar, dtype=float)
        b = np.asarray(b_bar, dtype=float)
        shift = t * LN2 - a
        safe_b = np.where(b > 0, b, 1.0)
        smooth = 0.5 * special.erfc(shift / safe_b / math.sqrt(2.0))
        step = np.where(shift < 0, 1.0, 0.0)
        return _scalar_or_array(np.where(b > 0, smooth, step))

    @staticmethod
    def rcp(threshold_T: float, p: ProductSnrParams) -> float:
        """P(R'' > T) with R'' log-normal in 2^R'' (natural-log parameters a_bar, b_bar)"""
        return float(AnalyticService.rcp_array(threshold_T, p.a_bar, p.b_bar))

    @staticmethod
    def ergodic_by_quadrature(p: ProductSnrParams) -> float:
        """Integral of rcp(T) over T >= 0, split at T = a_bar / ln 2"""
        if p.b_bar == 0:
            return max(p.a_bar, 0.0) / LN2

        def coverage(t: float) -> float:
            return float(0.5 * special.erfc((t * LN2 - p.a_bar) / p.b_bar / math.sqrt(2.0)))

        split = max(p.a_bar / LN2, 0.0)
        head = integrate.quad(coverage, 0.0, split, limit=200, epsabs=1e-11)[0] if split > 0 else 0.0
        tail = integrate.quad(coverage, split, np.inf, limit=200, epsabs=1e-11)[0]
        return head + tail

    @staticmethod
    def ergodic_sum_rate(p: ProductSnrParams, coeffs: Optional[QSeriesCoeffs] = None) -> float:
        """
        Closed-form ergodic sum-rate from the Q series.

        a/ln2 + (b/ln2) * sum_j 2^(j/2 - 1) a_j Gamma(j/2, (a/b)^2 / 2), with the
        upper incomplete gamma function. Falls back to quadrature for a < 0.
        """
        if p.b_bar == 0:
            return max(p.a_bar, 0.0) / LN2
        if p.a_bar < 0:
            logger.debug(f"Negative a_bar={p.a_bar:.4f}; using quadrature")
            return AnalyticService.ergodic_by_quadrature(p)

        coeffs = coeffs or QSeriesCoeffs.from_settings()
        y0 = 0.5 * (p.a_bar / p.b_bar) ** 2
        total = 0.0
        for j, a_j in enumerate(coeffs.a_j, start=1):
            s = 0.5 * j
            total += 2.0 ** (s - 1.0) * a_j * special.gamma(s) * special.gammaincc(s, y0)
        return p.a_bar / LN2 + p.b_bar / LN2 * total

    @staticmethod
    def _fit_users(region: CoopRegion, user_positions: Sequence[Point2D], budget: LinkBudget) -> ProductSnrParams:
        check_users(len(user_positions), region.order, budget.antennas_per_bs)
        fits = [
            AnalyticService.snr_lognormal_fit(GeometryService.distances_to_bss(p, region), budget)
            for p in user_positions
        ]
        return AnalyticService.product_snr(fits)

    @staticmethod
    def sum_rcp_at(
        region: CoopRegion,
        user_positions: Sequence[Point2D],
        threshold_T: float,
        budget: LinkBudget,
    ) -> float:
        """Analytic sum RCP with users at arbitrary positions"""
        return AnalyticService.rcp(threshold_T, AnalyticService._fit_users(region, user_positions, budget))

    @staticmethod
    def ergodic_at(
        region: CoopRegion,
        user_positions: Sequence[Point2D],
        budget: LinkBudget,
        coeffs: Optional[QSeriesCoeffs] = None,
    ) -> float:
        """Closed-form ergodic sum-rate with users at arbitrary positions"""
        return AnalyticService.ergodic_sum_rate(AnalyticService._fit_users(region, user_positions, budget), coeffs)

    @staticmethod
    def worst_point_product(region: CoopRegion, users: int, budget: LinkBudget) -> ProductSnrParams:
        """Product parameters with all users gathered at the worst point"""
        check_users(users, region.order, budget.antennas_per_bs)
        worst = GeometryService.worst_point(region)
        fit = AnalyticService.snr_lognormal_fit(GeometryService.distances_to_bss(worst, region), budget)
        return AnalyticService.product_snr([fit] * users)

    @staticmethod
    def worst_user_rcp(per_user_threshold_t: float, region: CoopRegion, users: int, budget: LinkBudget) -> float:
        """P(R_u > t) for each of U users at the worst point, via P(R > U t)"""
        product = AnalyticService.worst_point_product(region, users, budget)
        return AnalyticService.rcp(users * per_user_threshold_t, product)

    @staticmethod
    def worst_user_ergodic(
        region: CoopRegion,
        users: int,
        budget: LinkBudget,
        coeffs: Optional[QSeriesCoeffs] = None,
    ) -> float:
        """Worst-point ergodic sum-rate divided by U"""
        product = AnalyticService.worst_point_product(region, users, budget)
        return AnalyticService.ergodic_sum_rate(product, coeffs) / users

    @staticmethod
    def user_rcp_grid(
        region: CoopRegion,
        points: np.ndarray,
        users: int,
        threshold_T: float,
        budget: LinkBudget,
    ) -> np.ndarray:
        """
        Sum RCP with user 1 at each of `points` (shape (K, 2)) and the
        remaining U - 1 users pinned at the worst point.
        """
        check_users(users, region.order, budget.antennas_per_bs)
        mu1, sigma1 = AnalyticService.fit_lognormal_arrays(GeometryService.distance_matrix(points, region), budget)
        worst = GeometryService.worst_point(region)
        pinned = AnalyticService.snr_lognormal_fit(GeometryService.distances_to_bss(worst, region), budget)
        others = users - 1
        a_bar = mu1 + others * pinned.mu
        b_bar = np.sqrt(sigma1 ** 2 + others * pinned.sigma ** 2)
        return np.asarray(AnalyticService.rcp_array(threshold_T, a_bar, b_bar))

