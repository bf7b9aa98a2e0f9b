"""
Monte Carlo channel oracle for the closed-form rate expressions
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from app.config import settings
from app.models import (
    ChannelMatrix,
    EmpiricalEstimate,
    LinkBudget,
    RateSample,
    RegimePoint,
    RngStream,
    SnrDistribution,
    TrialConfig,
)
from app.services.channel import ChannelService
from app.services.geometry import GeometryService
from shared.common.enums import RateKind
from shared.common.errors import DomainError, SingularChannelError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
EPS = np.finfo(float).eps
Z_95 = float(stats.norm.ppf(0.975))

IDENTITY_CHECKS = (
    "zf_identity",
    "zf_covariance",
    "signal_covariance",
    "lower_vs_exact",
    "lower_vs_hadamard",
)


def _hermitian(h: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(h, -1, -2))


def _gram(h: np.ndarray) -> np.ndarray:
    return _hermitian(h) @ h


def _exact_rates(gram: np.ndarray, rho: float) -> np.ndarray:
    """log2 det(I + rho G) through the Cholesky factor"""
    eye = np.eye(gram.shape[-1])
    chol = np.linalg.cholesky(eye + rho * gram)
    diag = np.diagonal(chol, axis1=-2, axis2=-1).real
    return 2.0 * np.sum(np.log(diag), axis=-1) / LN2


def _lower_rates(gram: np.ndarray, rho: float) -> np.ndarray:
    """log2 det(rho G); -inf when the Gram matrix is singular"""
    sign, logdet = np.linalg.slogdet(rho * gram)
    return np.where(np.abs(sign) > 0, logdet / LN2, -np.inf)


def _column_energies(h: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(h) ** 2, axis=-2)


def _hadamard_rates(energies: np.ndarray, rho: float) -> np.ndarray:
    return np.sum(np.log2(rho * energies), axis=-1)


def _residual_limit(cond: np.ndarray, tol: float) -> np.ndarray:
    """Per-trial slack: tol, widened to the backward-error level of an ill-conditioned solve"""
    return np.maximum(tol, 100.0 * EPS * cond)


class MonteCarloCampaign:
    """
    Block-parallel simulation of one TrialConfig.

    Trials are split into fixed-size blocks; block k draws from the Philox
    stream keyed by (seed, stream_id, k), so the result does not depend on
    the number of worker threads. Rank-deficient draws are replaced from
    the stream (seed, stream_id, k, trial, attempt) and counted.
    """

    def __init__(
        self,
        cfg: TrialConfig,
        threads: int = 1,
        block_size: Optional[int] = None,
        stream_id: int = 0,
        fixed_fading: bool = False,
        check_identities: bool = False,
    ):
        self.cfg = cfg
        self.threads = max(1, threads)
        self.block_size = block_size or settings.mc_block_size
        self.stream = RngStream(seed=cfg.seed, stream_id=stream_id)
        self.fixed_fading = fixed_fading
        self.check_identities = check_identities
        self._rates: Optional[Dict[RateKind, np.ndarray]] = None
        self._energies: Optional[np.ndarray] = None
        self.redraws = 0
        self.violations: Dict[str, int] = {name: 0 for name in IDENTITY_CHECKS}

    @property
    def n_blocks(self) -> int:
        return math.ceil(self.cfg.trials / self.block_size)

    def _sample(self, generator: np.random.Generator, count: int) -> np.ndarray:
        return ChannelService.sample_channel_batch(
            self.cfg.region,
            self.cfg.user_positions,
            self.cfg.budget,
            generator,
            count,
            fixed_fading=self.fixed_fading,
        )

    def _redraw(self, block: int, trial: int) -> np.ndarray:
        limit = settings.rank_condition_limit
        for attempt in range(1, settings.mc_max_redraws + 1):
            h = self._sample(self.stream.generator(block, trial, attempt), 1)
            if np.linalg.cond(_gram(h))[0] <= limit:
                return h[0]
        raise SingularChannelError(
            "Channel stayed rank deficient after the redraw budget",
            error_code="singular_channel",
            details={"block": block, "trial": trial, "attempts": settings.mc_max_redraws},
        )

    def _run_block(self, block: int) -> dict:
        start = block * self.block_size
        count = min(self.block_size, self.cfg.trials - start)
        h = self._sample(self.stream.generator(block), count)

        gram = _gram(h)
        cond = np.linalg.cond(gram)
        bad = np.flatnonzero(~(cond <= settings.rank_condition_limit))
        for trial in bad:
            logger.warning(f"Rank-deficient draw in block {block}, trial {trial}; redrawing")
            h[trial] = self._redraw(block, int(trial))
        if len(bad):
            gram = _gram(h)

        rho = self.cfg.budget.snr_ratio
        energies = _column_energies(h)
        result = {
            RateKind.EXACT: _exact_rates(gram, rho),
            RateKind.LOWER: _lower_rates(gram, rho),
            RateKind.HADAMARD: _hadamard_rates(energies, rho),
            "energies": energies,
            "redraws": len(bad),
        }
        if self.check_identities:
            result["violations"] = MonteCarloService.identity_violations(h, self.cfg.budget)
        logger.debug(f"Block {block}: {count} trials, {len(bad)} redraws")
        return result

    def run(self) -> "MonteCarloCampaign":
        """Simulate every trial once; later calls reuse the result"""
        if self._rates is not None:
            return self

        blocks = range(self.n_blocks)
        if self.threads == 1:
            results = [self._run_block(k) for k in blocks]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(self._run_block, blocks))

        self._rates = {
            kind: np.concatenate([r[kind] for r in results])
            for kind in (RateKind.EXACT, RateKind.LOWER, RateKind.HADAMARD)
        }
        self._energies = np.concatenate([r["energies"] for r in results])
        self.redraws = sum(r["redraws"] for r in results)
        if self.check_identities:
            for r in results:
                for name, count in r["violations"].items():
                    self.violations[name] += count

        logger.info(
            f"Campaign seed={self.cfg.seed} stream={self.stream.stream_id}: "
            f"{self.cfg.trials} trials in {self.n_blocks} blocks, {self.redraws} redraws"
        )
        return self

    def rates(self, which: RateKind) -> np.ndarray:
        self.run()
        return self._rates[RateKind(which)]

    def rcp(self, threshold_T: float, which: RateKind) -> EmpiricalEstimate:
        """Fraction of trials whose selected rate exceeds T"""
        values = self.rates(which)
        n = len(values)
        p = int(np.count_nonzero(values > threshold_T)) / n
        se = math.sqrt(p * (1.0 - p) / n)
        return EmpiricalEstimate(
            mean=p,
            std_error=se,
            count=n,
            ci95=(max(0.0, p - Z_95 * se), min(1.0, p + Z_95 * se)),
            redraws=self.redraws,
        )

    def ergodic(self, which: RateKind) -> EmpiricalEstimate:
        """Sample mean of the selected rate"""
        values = self.rates(which)
        n = len(values)
        mean = math.fsum(values) / n
        if not math.isfinite(mean):
            # degenerate lower bound on some trial
            se, ci = math.inf, (-math.inf, math.inf)
        else:
            se = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
            ci = (mean - Z_95 * se, mean + Z_95 * se)
        return EmpiricalEstimate(mean=mean, std_error=se, count=n, ci95=ci, redraws=self.redraws)

    def log_snr(self, user_index: int) -> np.ndarray:
        """ln SNR(u) per trial, with SNR(u) = (sigma_s^2 / sigma^2) sum_i |H_iu|^2"""
        self.run()
        return np.log(self.cfg.budget.snr_ratio * self._energies[:, user_index])


class MonteCarloService:
    """Exact ZF sum-rate, its bounds and empirical estimators"""

    @staticmethod
    def _checked_gram(H: ChannelMatrix) -> np.ndarray:
        gram = _gram(H.entries)
        if not np.linalg.cond(gram) <= settings.rank_condition_limit:
            raise SingularChannelError(
                "Channel matrix does not have full column rank",
                error_code="singular_channel",
                details={"shape": list(H.entries.shape)},
            )
        return gram

    @staticmethod
    def zf_filter(H: ChannelMatrix) -> np.ndarray:
        """W = (H^H H)^-1 H^H, shape (U, N*M)"""
        gram = MonteCarloService._checked_gram(H)
        return np.linalg.solve(gram, _hermitian(H.entries))

    @staticmethod
    def sum_rate_exact(H: ChannelMatrix, budget: LinkBudget) -> float:
        """log2 det(I + (sigma_s^2 / sigma^2) H^H H)"""
        return float(_exact_rates(_gram(H.entries), budget.snr_ratio))

    @staticmethod
    def sum_rate_lower(H: ChannelMatrix, budget: LinkBudget) -> float:
        """log2 det((sigma_s^2 / sigma^2) H^H H); -inf for a singular Gram matrix"""
        return float(_lower_rates(_gram(H.entries), budget.snr_ratio))

    @staticmethod
    def sum_rate_hadamard(H: ChannelMatrix, budget: LinkBudget) -> float:
        """sum_u log2((sigma_s^2 / sigma^2) sum_i |H_iu|^2)"""
        return float(_hadamard_rates(_column_energies(H.entries), budget.snr_ratio))

    @staticmethod
    def rate_sample(H: ChannelMatrix, budget: LinkBudget) -> RateSample:
        return RateSample(
            r_exact=MonteCarloService.sum_rate_exact(H, budget),
            r_lower=MonteCarloService.sum_rate_lower(H, budget),
            r_hadamard=MonteCarloService.sum_rate_hadamard(H, budget),
        )

    @staticmethod
    def identity_violations(
        h_batch: np.ndarray,
        budget: LinkBudget,
        tol: Optional[float] = None,
    ) -> Dict[str, int]:
        """
        Count trials of a (K, NM, U) batch that break the ZF and bound identities.

        Matrix residuals are max-abs, relative to the largest entry of the
        reference matrix, and the slack widens with the Gram condition number.
        """
        tol = settings.identity_tol if tol is None else tol
        slack = settings.bound_slack
        rho = budget.snr_ratio

        gram = _gram(h_batch)
        cond = np.linalg.cond(gram)
        limit = _residual_limit(cond, tol)
        eye = np.eye(gram.shape[-1])

        w = np.linalg.solve(gram, _hermitian(h_batch))
        wh = w @ h_batch
        zf_residual = np.max(np.abs(wh - eye), axis=(-2, -1))

        inverse = np.linalg.inv(gram)
        scale = np.max(np.abs(inverse), axis=(-2, -1))
        cov_residual = np.max(np.abs(w @ _hermitian(w) - inverse), axis=(-2, -1)) / scale

        signal_residual = np.max(np.abs(wh @ _hermitian(wh) - eye), axis=(-2, -1))

        exact = _exact_rates(gram, rho)
        lower = _lower_rates(gram, rho)
        hadamard = _hadamard_rates(_column_energies(h_batch), rho)

        return {
            "zf_identity": int(np.count_nonzero(zf_residual > limit)),
            "zf_covariance": int(np.count_nonzero(cov_residual > limit)),
            "signal_covariance": int(np.count_nonzero(signal_residual > limit)),
            "lower_vs_exact": int(np.count_nonzero(lower > exact + slack)),
            "lower_vs_hadamard": int(np.count_nonzero(lower > hadamard + slack)),
        }

    @staticmethod
    def empirical_rcp(cfg: TrialConfig, threshold_T: float, which: RateKind, threads: int = 1) -> EmpiricalEstimate:
        return MonteCarloCampaign(cfg, threads=threads).rcp(threshold_T, which)

    @staticmethod
    def empirical_ergodic(cfg: TrialConfig, which: RateKind, threads: int = 1) -> EmpiricalEstimate:
        return MonteCarloCampaign(cfg, threads=threads).ergodic(which)

    @staticmethod
    def log_snr_samples(cfg: TrialConfig, user_index: int, threads: int = 1) -> np.ndarray:
        return MonteCarloCampaign(cfg, threads=threads).log_snr(user_index)

    @staticmethod
    def ks_fit_distance(samples: np.ndarray, fit: SnrDistribution) -> float:
        """Kolmogorov-Smirnov distance between ln SNR samples and the fitted normal"""
        if fit.sigma <= 0:
            raise DomainError("fitted sigma must be positive", error_code="domain", details={"sigma": fit.sigma})
        return float(stats.kstest(samples, "norm", args=(fit.mu, fit.sigma)).statistic)

    @staticmethod
    def hadamard_regime_map(
        order: int,
        users: int,
        budget: LinkBudget,
        spacings: Sequence[float],
        trials: int,
        seed: int,
        threads: int = 1,
    ) -> List[RegimePoint]:
        """
        mean(R'' - R) and P(R'' > R) with all users at the worst point, per spacing.

        Spacing i draws from stream 1 + i; stream 0 belongs to the gated campaign.
        """
        points = []
        for index, spacing in enumerate(spacings):
            region = GeometryService.build_coop_region(order, spacing)
            worst = GeometryService.worst_point(region)
            cfg = TrialConfig(region=region, user_positions=[worst] * users, budget=budget, trials=trials, seed=seed)
            campaign = MonteCarloCampaign(cfg, threads=threads, stream_id=1 + index).run()
            gap = campaign.rates(RateKind.HADAMARD) - campaign.rates(RateKind.EXACT)
            points.append(RegimePoint(
                spacing=spacing,
                distance=GeometryService.worst_distance(spacing),
                mean_gap=math.fsum(gap) / len(gap),
                fraction_above=int(np.count_nonzero(gap > 0)) / len(gap),
            ))
        return points
