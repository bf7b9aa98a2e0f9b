"""
Link budget bookkeeping and composite channel sampling
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from app.models import ChannelMatrix, CoopRegion, LinkBudget, Point2D, RngStream, check_users
from app.services.geometry import GeometryService

logger = logging.getLogger(__name__)


class ChannelService:
    """Path loss, shadowing and Rayleigh composition of the uplink channel"""

    @staticmethod
    def dbm_to_milliwatts(dbm: float) -> float:
        return 10.0 ** (dbm / 10.0)

    @staticmethod
    def path_loss_db(d: float, budget: LinkBudget) -> float:
        """PL(d) = a + b log10(d)"""
        return budget.a_db + budget.b_db_per_decade * math.log10(d)

    @staticmethod
    def shadowing_lognormal_params(d: float, budget: LinkBudget) -> Tuple[float, float]:
        """(mu_z, sigma_z) of the log-normal large-scale gain at distance d"""
        return -budget.alpha * math.log(d), budget.sigma_z

    @staticmethod
    def sample_channel_batch(
        region: CoopRegion,
        user_positions: Sequence[Point2D],
        budget: LinkBudget,
        generator: np.random.Generator,
        count: int,
        fixed_fading: bool = False,
    ) -> np.ndarray:
        """
        Draw `count` channel matrices, shape (count, N*M, U).

        Row n*M + m is antenna m of BS n. The shadowing term L is drawn once
        per (BS, user) pair and shared by that BS's antennas; the small-scale
        coefficient is CN(0, 1) per (antenna, user). fixed_fading forces every
        small-scale coefficient to 1.
        """
        n_bs = region.order
        n_ant = budget.antennas_per_bs
        n_users = check_users(len(user_positions), n_bs, n_ant)

        points = np.array([[p.x, p.y] for p in user_positions])
        distances = GeometryService.distance_matrix(points, region).T  # (N, U)
        path_loss = budget.a_db + budget.b_db_per_decade * np.log10(distances)

        shadowing = generator.normal(0.0, budget.sigma_L_db, size=(count, n_bs, n_users))
        amplitude = 10.0 ** (-(path_loss[None, :, :] + shadowing) / 20.0)
        amplitude = np.repeat(amplitude, n_ant, axis=1)

        if fixed_fading:
            fading = np.ones((count, n_bs * n_ant, n_users), dtype=complex)
        else:
            parts = generator.standard_normal(size=(count, n_bs * n_ant, n_users, 2)) * math.sqrt(0.5)
            fading = parts[..., 0] + 1j * parts[..., 1]

        return fading * amplitude

    @staticmethod
    def sample_channel(
        region: CoopRegion,
        user_positions: List[Point2D],
        budget: LinkBudget,
        rng: RngStream,
        fixed_fading: bool = False,
    ) -> ChannelMatrix:
        """One channel realization, reproducible from the stream"""
        entries = ChannelService.sample_channel_batch(
            region, user_positions, budget, rng.generator(), 1, fixed_fading=fixed_fading
        )[0]
        return ChannelMatrix(
            entries=entries,
            n_bs=region.order,
            n_ant=budget.antennas_per_bs,
            n_users=len(user_positions),
        )
