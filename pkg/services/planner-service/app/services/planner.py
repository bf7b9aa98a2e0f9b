"""
BS density planning from the worst-point rate guarantees
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.models import (
    ComparisonRow,
    ContourPoint,
    CoopRegion,
    CurvePoint,
    LinkBudget,
    PlanQuery,
    PlanResult,
    QSeriesCoeffs,
    TrialConfig,
    check_order,
    check_users,
)
from app.services.analytic import AnalyticService
from app.services.geometry import GeometryService
from app.services.montecarlo import MonteCarloCampaign
from shared.common.enums import ContourEngine, CurveMetric, RateKind
from shared.common.errors import DomainError, InfeasibleTargetError

logger = logging.getLogger(__name__)


class PlanningService:
    """Inverts worst-point coverage to the required BS density"""

    @staticmethod
    def bisect_spacing(
        metric: Callable[[float], float],
        target: float,
        value_tol: float,
        label: str,
    ) -> Tuple[float, float, int, Tuple[float, float], bool]:
        """
        Largest spacing D in the configured bracket with metric(D) >= target.

        metric must decrease in D. Returns (D, metric(D), iterations, final
        bracket, slack); slack is set when even the widest spacing meets the target.
        """
        lo, hi = settings.bracket_min_m, settings.bracket_max_m
        value_lo = metric(lo)
        if value_lo < target:
            raise InfeasibleTargetError(
                f"Target {label} {target} is unreachable even at D = {lo} m",
                error_code="infeasible_target",
                details={"target": target, "rcp_at_min_bracket": value_lo, "bracket_min_m": lo},
            )
        value_hi = metric(hi)
        if value_hi >= target:
            logger.info(f"Target {label} {target} met at the widest spacing {hi} m")
            return hi, value_hi, 0, (lo, hi), True

        # invariant: metric(lo) >= target > metric(hi)
        best, best_value = lo, value_lo
        iterations = 0
        while iterations < settings.max_bisection_iterations and hi - lo >= settings.bracket_width_tol_m:
            iterations += 1
            mid = 0.5 * (lo + hi)
            value = metric(mid)
            if value >= target:
                lo, best, best_value = mid, mid, value
            else:
                hi = mid
            if abs(value - target) <= value_tol:
                best, best_value = mid, value
                break

        logger.info(
            f"Bisection on {label}: D={best:.3f} m, value={best_value:.6f} "
            f"after {iterations} iterations, bracket=({lo:.3f}, {hi:.3f})"
        )
        return best, best_value, iterations, (lo, hi), False

    @staticmethod
    def required_density(q: PlanQuery) -> PlanResult:
        """Minimum density whose worst-point user RCP reaches the target"""

        def worst_rcp(d: float) -> float:
            region = GeometryService.build_coop_region(q.coop_order, d)
            return AnalyticService.worst_user_rcp(q.threshold_t, region, q.users, q.budget)

        spacing, value, iterations, bracket, slack = PlanningService.bisect_spacing(
            worst_rcp, q.target_rcp, settings.rcp_tol, "RCP"
        )
        return PlanResult(
            spacing=spacing,
            density=GeometryService.density_from_spacing(spacing),
            achieved_rcp=value,
            iterations=iterations,
            bracket=bracket,
            slack=slack,
            metric=CurveMetric.RCP,
        )

    @staticmethod
    def required_density_for_ergodic(
        order: int,
        users: int,
        target_rate_per_user: float,
        budget: LinkBudget,
        coeffs: Optional[QSeriesCoeffs] = None,
    ) -> PlanResult:
        """Minimum density whose worst-point per-user ergodic rate reaches the target"""
        check_order(order)
        check_users(users, order, budget.antennas_per_bs)
        if not target_rate_per_user > 0:
            raise DomainError("target rate must be positive", error_code="domain",
                              details={"target_rate_per_user": target_rate_per_user})

        def worst_rate(d: float) -> float:
            region = GeometryService.build_coop_region(order, d)
            return AnalyticService.worst_user_ergodic(region, users, budget, coeffs)

        spacing, value, iterations, bracket, slack = PlanningService.bisect_spacing(
            worst_rate, target_rate_per_user, settings.rate_tol, "ergodic rate"
        )
        return PlanResult(
            spacing=spacing,
            density=GeometryService.density_from_spacing(spacing),
            achieved_rate=value,
            iterations=iterations,
            bracket=bracket,
            slack=slack,
            metric=CurveMetric.ERGODIC,
        )

    @staticmethod
    def cooperation_gain(
        order_a: int,
        order_b: int,
        users: int,
        threshold_t: float,
        target_rcp: float,
        budget: LinkBudget,
    ) -> float:
        """required_density(N_a) / required_density(N_b)"""
        if order_a == order_b:
            check_order(order_a)
            check_users(users, order_a, budget.antennas_per_bs)
            return 1.0
        densities = [
            PlanningService.required_density(PlanQuery(
                coop_order=order, users=users, threshold_t=threshold_t, target_rcp=target_rcp, budget=budget,
            )).density
            for order in (order_a, order_b)
        ]
        return densities[0] / densities[1]

    @staticmethod
    def _check_grid(density_grid: Sequence[float]) -> np.ndarray:
        grid = np.asarray(density_grid, dtype=float)
        if grid.size == 0:
            raise DomainError("density grid is empty", error_code="domain")
        if np.any(grid <= 0) or np.any(np.diff(grid) < 0):
            raise DomainError("density grid must be positive and ascending", error_code="domain")
        return grid

    @staticmethod
    def rcp_density_curve(
        order: int,
        users: int,
        threshold_t: float,
        budget: LinkBudget,
        density_grid: Sequence[float],
    ) -> List[CurvePoint]:
        """Worst-point user RCP at each density of the grid"""
        points = []
        for density in PlanningService._check_grid(density_grid):
            spacing = GeometryService.spacing_from_density(float(density))
            region = GeometryService.build_coop_region(order, spacing)
            points.append(CurvePoint(
                density=float(density),
                spacing=spacing,
                value=AnalyticService.worst_user_rcp(threshold_t, region, users, budget),
                antennas=budget.antennas_per_bs,
                order=order,
            ))
        return points

    @staticmethod
    def ergodic_density_curve(
        order: int,
        users: int,
        budget: LinkBudget,
        density_grid: Sequence[float],
        coeffs: Optional[QSeriesCoeffs] = None,
    ) -> List[CurvePoint]:
        """Worst-point per-user ergodic rate at each density of the grid"""
        points = []
        for density in PlanningService._check_grid(density_grid):
            spacing = GeometryService.spacing_from_density(float(density))
            region = GeometryService.build_coop_region(order, spacing)
            points.append(CurvePoint(
                density=float(density),
                spacing=spacing,
                value=AnalyticService.worst_user_ergodic(region, users, budget, coeffs),
                antennas=budget.antennas_per_bs,
                order=order,
            ))
        return points

    @staticmethod
    def cooperation_curve(
        orders: Sequence[int],
        users: int,
        threshold_t: float,
        budget: LinkBudget,
        density_grid: Sequence[float],
    ) -> List[CurvePoint]:
        """rcp_density_curve for several cooperation orders, concatenated by order"""
        curve = []
        for order in orders:
            curve.extend(PlanningService.rcp_density_curve(order, users, threshold_t, budget, density_grid))
        return curve

    @staticmethod
    def density_comparison(
        targets: Sequence[float],
        orders: Sequence[int],
        users: int,
        threshold_t: float,
        budget: LinkBudget,
    ) -> List[ComparisonRow]:
        """
        Required density per (target, order) and its ratio to N = 1.

        Infeasible cells are reported with status "infeasible" instead of
        aborting the table.
        """
        rows = []
        for target in targets:
            baseline: Optional[float] = None
            target_rows = []
            for order in orders:
                query = PlanQuery(coop_order=order, users=users, threshold_t=threshold_t,
                                  target_rcp=target, budget=budget)
                try:
                    result = PlanningService.required_density(query)
                except InfeasibleTargetError as e:
                    logger.warning(f"Target {target} infeasible for N={order}: {e.message}")
                    target_rows.append(ComparisonRow(target_rcp=target, order=order, status="infeasible"))
                    continue
                if order == 1:
                    baseline = result.density
                target_rows.append(ComparisonRow(
                    target_rcp=target,
                    order=order,
                    required_density=result.density,
                    status="slack" if result.slack else "ok",
                ))
            for row in target_rows:
                if baseline is not None and row.required_density is not None:
                    row.ratio_vs_n1 = row.required_density / baseline
            rows.extend(target_rows)
        return rows

    @staticmethod
    def rcp_contour(
        region: CoopRegion,
        users: int,
        budget: LinkBudget,
        threshold_t: float,
        grid_pitch: float,
        engine: ContourEngine = ContourEngine.ANALYTIC,
        trials: int = 10_000,
        seed: int = 0,
        threads: int = 1,
    ) -> List[ContourPoint]:
        """
        RCP of the U-user sum at threshold U*t with user 1 swept over the
        region grid and users 2..U pinned at the worst point.
        """
        check_users(users, region.order, budget.antennas_per_bs)
        points = GeometryService.region_grid_array(region, grid_pitch)
        threshold_sum = users * threshold_t

        if engine == ContourEngine.ANALYTIC:
            values = AnalyticService.user_rcp_grid(region, points, users, threshold_sum, budget)
            return [
                ContourPoint(x=float(x), y=float(y), rcp=float(v))
                for (x, y), v in zip(points, values)
            ]

        worst = GeometryService.worst_point(region)
        contour = []
        for index, point in enumerate(GeometryService.region_grid(region, grid_pitch)):
            cfg = TrialConfig(
                region=region,
                user_positions=[point] + [worst] * (users - 1),
                budget=budget,
                trials=trials,
                seed=seed,
            )
            estimate = MonteCarloCampaign(cfg, threads=threads, stream_id=index).rcp(threshold_sum, RateKind.EXACT)
            contour.append(ContourPoint(
                x=point.x, y=point.y, rcp=estimate.mean, ci_lo=estimate.ci95[0], ci_hi=estimate.ci95[1],
            ))
        logger.info(f"MC contour: {len(contour)} cells, {trials} trials each")
        return contour
