"""Poisson-intensity occupancy grid: per-cell MLE, confidence bounds, path sums.

Intensities have units 1/m^2. Cells with hits but no misses are clamped to a
configurable ``lambda_max`` so every path integral stays finite. Reads are
thread-safe; count updates must be serialized by the caller (the estimate
depends only on the final counts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GridGeometry

DEFAULT_LAMBDA_MAX = 100.0
Z_95 = 1.96
COUNT_MAX = np.iinfo(np.uint32).max


@dataclass(frozen=True)
class SensorModel:
    """Lidar noise model: hit/miss reliabilities and the measurement error disk.

    ``error_area`` is the area of the disk containing the true obstacle
    position around each range return; it normalizes the intensity estimate.
    """

    p_hit: float = 0.99
    p_miss: float = 0.9999
    error_area: float = 0.04
    max_range: float = 10.0

    def __post_init__(self):
        if not 0 < self.p_hit <= 1:
            raise ValueError(f"p_hit must be in (0, 1], got {self.p_hit}")
        if not 0 < self.p_miss <= 1:
            raise ValueError(f"p_miss must be in (0, 1], got {self.p_miss}")
        if self.error_area <= 0:
            raise ValueError("error_area must be > 0")
        if self.max_range <= 0:
            raise ValueError("max_range must be > 0")

    @property
    def error_radius(self) -> float:
        return math.sqrt(self.error_area / math.pi)


@dataclass
class CellStats:
    """Hit/miss tallies for one cell. Counts only ever increase."""

    hits: int = 0
    misses: int = 0

    def __post_init__(self):
        if self.hits < 0 or self.misses < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.hits + self.misses

    @property
    def observed(self) -> bool:
        return self.total > 0


@dataclass(frozen=True)
class ConfidenceInterval:
    lambda_low: float
    lambda_high: float
    level: float = 0.95

    @property
    def width(self) -> float:
        return self.lambda_high - self.lambda_low


def lambda_mle(stats: CellStats, sensor: SensorModel,
               lambda_max: float = DEFAULT_LAMBDA_MAX) -> float:
    """Closed-form maximum-likelihood intensity (1/e) * ln(1 + h/m).

    Total by policy: h = 0 gives 0 (including the unobserved case, see
    ``CellStats.observed``); m = 0 with h > 0 saturates at ``lambda_max``.
    """
    if stats.hits == 0:
        return 0.0
    if stats.misses == 0:
        return lambda_max
    return min(math.log1p(stats.hits / stats.misses) / sensor.error_area, lambda_max)


def lambda_from_count(k: float, total: float, error_area: float,
                      lambda_max: float = DEFAULT_LAMBDA_MAX) -> float:
    """Map a (possibly fractional) hit count out of ``total`` to an intensity.

    Strictly increasing in k on [0, total); k = total saturates at lambda_max.
    """
    if total <= 0:
        raise ValueError("total count must be > 0")
    if k < 0 or k > total:
        raise ValueError(f"count {k} outside [0, {total}]")
    if k == 0:
        return 0.0
    if k >= total:
        return lambda_max
    return min(math.log1p(k / (total - k)) / error_area, lambda_max)


def confidence_bounds(stats: CellStats, sensor: SensorModel,
                      lambda_max: float = DEFAULT_LAMBDA_MAX) -> ConfidenceInterval:
    """95% interval on the intensity via the Gaussian count approximation.

    The hit count is a sum of two binomials (true hits kept, misses misread
    as hits); its Poisson-binomial law is approximated by a Gaussian of equal
    mean and variance, clamped to the feasible count range. Unobserved cells
    get the vacuous interval [0, lambda_max].
    """
    total = stats.total
    if total == 0:
        return ConfidenceInterval(0.0, lambda_max)
    mu = stats.hits * sensor.p_hit + stats.misses * (1.0 - sensor.p_miss)
    var = (stats.hits * (1.0 - sensor.p_hit) * sensor.p_hit
           + stats.misses * (1.0 - sensor.p_miss) * sensor.p_miss)
    sigma = math.sqrt(var)
    k_low = max(mu - Z_95 * sigma, 0.0)
    k_high = min(mu + Z_95 * sigma, float(total))
    return ConfidenceInterval(
        lambda_from_count(k_low, total, sensor.error_area, lambda_max),
        lambda_from_count(k_high, total, sensor.error_area, lambda_max),
    )


def collision_probability(integrated: float) -> float:
    """Probability of at least one collision given the integrated intensity."""
    if integrated < 0:
        raise ValueError(f"integrated intensity must be >= 0, got {integrated}")
    return -math.expm1(-integrated)


class LambdaGrid:
    """Dense grid of hit/miss counts with derived intensity maps."""

    def __init__(self, geometry: GridGeometry, sensor: SensorModel,
                 lambda_max: float = DEFAULT_LAMBDA_MAX):
        if lambda_max <= 0:
            raise ValueError("lambda_max must be > 0")
        self.geometry = geometry
        self.sensor = sensor
        self.lambda_max = lambda_max
        self.hits = np.zeros(geometry.n_cells, dtype=np.uint32)
        self.misses = np.zeros(geometry.n_cells, dtype=np.uint32)

    def add_hits(self, indices: np.ndarray) -> None:
        idx = np.asarray(indices, dtype=np.int64)
        keep = self.hits[idx] < COUNT_MAX  # saturate, never wrap
        self.hits[idx[keep]] += 1

    def add_misses(self, indices: np.ndarray) -> None:
        idx = np.asarray(indices, dtype=np.int64)
        keep = self.misses[idx] < COUNT_MAX
        self.misses[idx[keep]] += 1

    def stats(self, index: int) -> CellStats:
        return CellStats(int(self.hits[index]), int(self.misses[index]))

    @property
    def observed(self) -> np.ndarray:
        return (self.hits.astype(np.int64) + self.misses.astype(np.int64)) > 0

    def lambda_map(self) -> np.ndarray:
        """Per-cell MLE intensities as a flat array."""
        h = self.hits.astype(np.float64)
        m = self.misses.astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.log1p(h / m) / self.sensor.error_area
        lam = np.where(h == 0, 0.0, lam)
        lam = np.where((m == 0) & (h > 0), self.lambda_max, lam)
        return np.minimum(lam, self.lambda_max)

    def bound_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """(lambda_low, lambda_high) flat arrays; unobserved cells map to
        [0, lambda_max]."""
        h = self.hits.astype(np.float64)
        m = self.misses.astype(np.float64)
        total = h + m
        mu = h * self.sensor.p_hit + m * (1.0 - self.sensor.p_miss)
        var = (h * (1.0 - self.sensor.p_hit) * self.sensor.p_hit
               + m * (1.0 - self.sensor.p_miss) * self.sensor.p_miss)
        sigma = np.sqrt(var)
        k_low = np.clip(mu - Z_95 * sigma, 0.0, None)
        k_high = np.minimum(mu + Z_95 * sigma, total)
        low = self._lambda_from_counts(k_low, total)
        high = self._lambda_from_counts(k_high, total)
        unobserved = total == 0
        low[unobserved] = 0.0
        high[unobserved] = self.lambda_max
        return low, high

    def _lambda_from_counts(self, k: np.ndarray, total: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.log1p(k / (total - k)) / self.sensor.error_area
        lam = np.where(k <= 0, 0.0, lam)
        lam = np.where((total > 0) & (k >= total), self.lambda_max, lam)
        return np.minimum(np.nan_to_num(lam, nan=0.0), self.lambda_max)

    def lambda_for_bound(self, use_bound: str) -> np.ndarray:
        """Flat intensity array for an estimator choice: mle, lower or upper."""
        if use_bound == "mle":
            return self.lambda_map()
        low, high = self.bound_maps()
        if use_bound == "lower":
            return low
        if use_bound == "upper":
            return high
        raise ValueError(f"unknown bound {use_bound!r}; expected mle/lower/upper")

    def integrated_lambda(self, cells, areas=None, use_bound: str = "mle") -> float:
        """Area-weighted intensity sum over a cell set (flat indices).

        ``areas`` defaults to the uniform cell area; pass per-cell crossed
        areas for partial footprint coverage.
        """
        return integrated_lambda_from(self.lambda_for_bound(use_bound),
                                      self.geometry, cells, areas)


def integrated_lambda_from(lam_flat: np.ndarray, geometry: GridGeometry,
                           cells, areas=None) -> float:
    cells = np.asarray(cells, dtype=np.int64)
    if cells.size == 0:
        return 0.0
    if (cells < 0).any() or (cells >= geometry.n_cells).any():
        raise IndexError("cell index out of bounds")
    if areas is None:
        areas = np.full(cells.shape, geometry.cell_area)
    else:
        areas = np.asarray(areas, dtype=np.float64)
    return float(np.sum(areas * lam_flat[cells]))
