"""
Hexagonal lattice geometry for cooperation regions
"""
import logging
import math
from typing import List

import numpy as np
from pydantic import ValidationError

from app.config import settings
from app.models import CoopRegion, HexSpacing, Point2D, check_order
from shared.common.errors import DomainError

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


def _require_positive(name: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(
            f"{name} must be a positive finite number",
            error_code="domain",
            details={name: value},
        )
    return float(value)


def _hex_spacing(d_spacing: float) -> float:
    try:
        return HexSpacing(d_spacing=d_spacing).d_spacing
    except ValidationError:
        raise DomainError(
            "d_spacing must be a positive finite number",
            error_code="domain",
            details={"d_spacing": d_spacing},
        )


class GeometryService:
    """Cooperation-region construction and spacing/density conversion"""

    @staticmethod
    def density_from_spacing(d_spacing: float) -> float:
        """BS per square meter of a hexagonal lattice with inter-BS distance D"""
        d = _hex_spacing(d_spacing)
        return 2.0 / (SQRT3 * d * d)

    @staticmethod
    def spacing_from_density(density: float) -> float:
        """Inverse of density_from_spacing"""
        lam = _require_positive("density", density)
        return math.sqrt(2.0 / (SQRT3 * lam))

    @staticmethod
    def worst_distance(d_spacing: float) -> float:
        """Distance from the worst point to every serving BS"""
        return SQRT3 * _hex_spacing(d_spacing) / 3.0

    @staticmethod
    def build_coop_region(order: int, d_spacing: float) -> CoopRegion:
        """
        Canonical placement of N cooperating BSs.

        N=1 is the hexagonal cell around a BS at the origin, N=2 the diamond
        between (0, 0) and (D, 0), N=3 the triangle (0, 0), (D, 0), (D/2, sqrt(3)D/2).
        Polygons are listed counter-clockwise.
        """
        check_order(order)
        d = _hex_spacing(d_spacing)
        apex = d / (2.0 * SQRT3)

        if order == 1:
            radius = d / SQRT3
            bs = [Point2D(x=0.0, y=0.0)]
            polygon = [
                Point2D(x=radius * math.cos(math.radians(30 + 60 * k)),
                        y=radius * math.sin(math.radians(30 + 60 * k)))
                for k in range(6)
            ]
        elif order == 2:
            bs = [Point2D(x=0.0, y=0.0), Point2D(x=d, y=0.0)]
            polygon = [
                Point2D(x=0.0, y=0.0),
                Point2D(x=d / 2.0, y=-apex),
                Point2D(x=d, y=0.0),
                Point2D(x=d / 2.0, y=apex),
            ]
        else:
            bs = [Point2D(x=0.0, y=0.0), Point2D(x=d, y=0.0), Point2D(x=d / 2.0, y=SQRT3 * d / 2.0)]
            polygon = list(bs)

        return CoopRegion(order=order, bs_positions=bs, spacing=d, polygon=polygon)

    @staticmethod
    def distances_to_bss(p: Point2D, region: CoopRegion) -> List[float]:
        """Euclidean distances to each BS, clamped below by d_min"""
        return [
            max(math.hypot(p.x - bs.x, p.y - bs.y), settings.d_min_m)
            for bs in region.bs_positions
        ]

    @staticmethod
    def distance_matrix(points: np.ndarray, region: CoopRegion) -> np.ndarray:
        """Clamped distances of many points, shape (K, N) for points of shape (K, 2)"""
        bs = np.array([[b.x, b.y] for b in region.bs_positions])
        diff = np.asarray(points, dtype=float)[:, None, :] - bs[None, :, :]
        return np.maximum(np.hypot(diff[..., 0], diff[..., 1]), settings.d_min_m)

    @staticmethod
    def worst_point(region: CoopRegion) -> Point2D:
        """
        Point equidistant sqrt(3)D/3 from every serving BS.

        The canonical placements put the N=1 hexagon vertex, the N=2 side-edge
        vertex and the N=3 centroid at the same coordinates.
        """
        check_order(region.order)
        d = region.spacing
        return Point2D(x=d / 2.0, y=d / (2.0 * SQRT3))

    @staticmethod
    def point_in_region(p: Point2D, region: CoopRegion) -> bool:
        """Convex-polygon membership, boundary inclusive"""
        return bool(GeometryService._inside_mask(np.array([[p.x, p.y]]), region)[0])

    @staticmethod
    def _inside_mask(points: np.ndarray, region: CoopRegion) -> np.ndarray:
        verts = np.array([[v.x, v.y] for v in region.polygon])
        edges = np.roll(verts, -1, axis=0) - verts
        rel = points[:, None, :] - verts[None, :, :]
        cross = edges[None, :, 0] * rel[..., 1] - edges[None, :, 1] * rel[..., 0]
        slack = 1e-9 * region.spacing * region.spacing
        return np.all(cross >= -slack, axis=1)

    @staticmethod
    def region_grid_array(region: CoopRegion, pitch: float) -> np.ndarray:
        """
        Square-lattice points inside the region polygon, shape (K, 2).

        The lattice is anchored on the worst point so that it is always a node.
        Rows are ordered by y, then x.
        """
        step = _require_positive("pitch", pitch)
        anchor = GeometryService.worst_point(region)
        xs = np.array([v.x for v in region.polygon])
        ys = np.array([v.y for v in region.polygon])

        i_range = np.arange(math.floor((xs.min() - anchor.x) / step), math.ceil((xs.max() - anchor.x) / step) + 1)
        j_range = np.arange(math.floor((ys.min() - anchor.y) / step), math.ceil((ys.max() - anchor.y) / step) + 1)
        gx = anchor.x + i_range * step
        gy = anchor.y + j_range * step
        yy, xx = np.meshgrid(gy, gx, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
        inside = points[GeometryService._inside_mask(points, region)]
        logger.debug(f"Region grid for N={region.order}, pitch {step:.3f} m: {len(inside)} points")
        return inside

    @staticmethod
    def region_grid(region: CoopRegion, pitch: float) -> List[Point2D]:
        """Grid points inside the region as Point2D values"""
        return [Point2D(x=float(x), y=float(y)) for x, y in GeometryService.region_grid_array(region, pitch)]
