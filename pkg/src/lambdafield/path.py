"""Swept-footprint path crossings and collision risk along them.

All operations are pure over immutable snapshots of the intensity field, so
many candidate trajectories can be evaluated concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .field import LambdaGrid, collision_probability


@dataclass(frozen=True)
class RobotShape:
    width: float
    length: float
    mass: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be > 0")
        if self.length < 0:
            raise ValueError("length must be >= 0")
        if self.mass <= 0:
            raise ValueError("mass must be > 0")


@dataclass
class PathCrossing:
    """Ordered cells a swept footprint traverses, with per-cell crossed areas.

    Carries a snapshot of the three intensity estimates so risk evaluation
    never touches the live grid.
    """

    cells: np.ndarray        # flat indices, traversal order
    areas: np.ndarray        # m^2, positive
    lam_mle: np.ndarray
    lam_low: np.ndarray
    lam_high: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64)
        self.areas = np.asarray(self.areas, dtype=np.float64)
        self.lam_mle = np.asarray(self.lam_mle, dtype=np.float64)
        self.lam_low = np.asarray(self.lam_low, dtype=np.float64)
        self.lam_high = np.asarray(self.lam_high, dtype=np.float64)
        if (self.areas <= 0).any():
            raise ValueError("crossed areas must be positive")

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def cumulative_areas(self) -> np.ndarray:
        """A(i) = area crossed before entering cell i; length N+1, last = total."""
        return np.concatenate(([0.0], np.cumsum(self.areas)))

    def lambdas(self, use_bound: str = "mle") -> np.ndarray:
        if use_bound == "mle":
            return self.lam_mle
        if use_bound == "lower":
            return self.lam_low
        if use_bound == "upper":
            return self.lam_high
        raise ValueError(f"unknown bound {use_bound!r}; expected mle/lower/upper")

    @classmethod
    def from_lambdas(cls, lambdas: Sequence[float], areas: Sequence[float]) -> "PathCrossing":
        """Synthetic crossing with identical mle/lower/upper intensities."""
        lam = np.asarray(lambdas, dtype=np.float64)
        return cls(np.arange(len(lam)), np.asarray(areas, dtype=np.float64),
                   lam, lam.copy(), lam.copy())


def swept_cells(grid: LambdaGrid, poses: Sequence[tuple[float, float, float]],
                shape: RobotShape,
                samples_per_cell: int = 5) -> PathCrossing:
    """Rasterize the rectangle of width ``shape.width`` swept along a polyline.

    Midpoint supersampling: each step of length ds contributes area
    width * ds split evenly over its sample points, accumulated into the cell
    containing each sample. A cell enters the ordered list at the step that
    first covers it; re-entered cells keep their first slot. Consecutive
    poses must be closer than one cell diagonal (caller densifies).

    Raises ValueError if any part of the swept footprint leaves the grid.
    """
    geo = grid.geometry
    pts = np.asarray([(p[0], p[1]) for p in poses], dtype=np.float64)
    if len(pts) < 2:
        return _empty_crossing(grid)
    res = geo.resolution
    n_w = max(3, int(math.ceil(shape.width / (res / samples_per_cell))))
    offsets = ((np.arange(n_w) + 0.5) / n_w - 0.5) * shape.width

    order: dict[int, int] = {}
    areas: dict[int, float] = {}
    for a, b in zip(pts[:-1], pts[1:]):
        step_vec = b - a
        ds = float(np.hypot(*step_vec))
        if ds == 0.0:
            continue
        tangent = step_vec / ds
        normal = np.array([-tangent[1], tangent[0]])
        n_l = max(1, int(math.ceil(ds / (res / samples_per_cell))))
        ts = (np.arange(n_l) + 0.5) / n_l
        centers = a[None, :] + ts[:, None] * step_vec[None, :]
        # (n_l * n_w, 2) sample points across the footprint width
        samples = (centers[:, None, :] + offsets[None, :, None] * normal[None, None, :])
        samples = samples.reshape(-1, 2)
        try:
            flat = geo.flat_of_points(samples[:, 0], samples[:, 1])
        except ValueError:
            raise ValueError("swept path exits grid") from None
        sample_area = shape.width * ds / (n_l * n_w)
        for idx in flat:
            idx = int(idx)
            if idx not in order:
                order[idx] = len(order)
                areas[idx] = 0.0
            areas[idx] += sample_area
    if not order:
        return _empty_crossing(grid)
    cells = np.array(sorted(order, key=order.get), dtype=np.int64)
    area_arr = np.array([areas[int(i)] for i in cells])
    lam = grid.lambda_map()
    low, high = grid.bound_maps()
    return PathCrossing(cells, area_arr, lam[cells], low[cells], high[cells])


def _empty_crossing(grid: LambdaGrid) -> PathCrossing:
    empty = np.empty(0)
    return PathCrossing(np.empty(0, dtype=np.int64), empty.copy(), empty.copy(),
                        empty.copy(), empty.copy())


def collision_pdf(crossing: PathCrossing, a: float,
                  use_bound: str = "mle") -> float:
    """Density of the first-collision location at crossed area ``a``.

    Piecewise exponential: inside cell n the density is
    exp(-sum_{i<n} a_i lam_i) * lam_n * exp(-(a - A(n)) lam_n), generalizing
    the uniform-cell-area formula through cumulative areas.
    """
    if len(crossing) == 0:
        raise ValueError("empty crossing has no density")
    cum = crossing.cumulative_areas()
    if a < 0 or a > cum[-1]:
        raise ValueError(f"area {a} outside [0, {cum[-1]}]")
    lam = crossing.lambdas(use_bound)
    n = min(int(np.searchsorted(cum, a, side="right")) - 1, len(crossing) - 1)
    n = max(n, 0)
    survive = math.exp(-float(np.dot(crossing.areas[:n], lam[:n])))
    return float(survive * lam[n] * math.exp(-(a - cum[n]) * lam[n]))


def path_collision_probability(crossing: PathCrossing,
                               use_bound: str = "mle") -> float:
    """1 - exp(-Lambda) with Lambda the area-weighted intensity sum."""
    lam = crossing.lambdas(use_bound)
    integrated = float(np.dot(crossing.areas, lam)) if len(crossing) else 0.0
    return collision_probability(integrated)


def expected_risk(crossing: PathCrossing, risk_fn: Callable[[float], float],
                  use_bound: str = "mle") -> float:
    """Expectation of risk_fn at the first-collision location.

    Per-cell sum r(A(i)) * exp(-sum_{j<i} a_j lam_j) * (1 - exp(-a_i lam_i)),
    with r evaluated at each cell's cumulative-area left endpoint.
    """
    if len(crossing) == 0:
        return 0.0
    lam = crossing.lambdas(use_bound)
    cum = crossing.cumulative_areas()
    exponents = crossing.areas * lam
    survive = np.exp(-np.concatenate(([0.0], np.cumsum(exponents[:-1]))))
    hit_here = -np.expm1(-exponents)
    r_vals = np.array([risk_fn(float(ai)) for ai in cum[:-1]])
    return float(np.sum(r_vals * survive * hit_here))


def momentum_risk(shape: RobotShape,
                  velocity: Callable[[float], float]) -> Callable[[float], float]:
    """Momentum lost in a full stop at crossed area a: mass * v(s), s = a / width."""
    def risk(a: float) -> float:
        return shape.mass * velocity(a / shape.width)
    return risk


def constant_velocity(v: float) -> Callable[[float], float]:
    if v < 0:
        raise ValueError("speed must be >= 0")
    return lambda s: v
