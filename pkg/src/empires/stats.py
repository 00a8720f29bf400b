"""Trajectory observables and coarsening curves.

For a partition of a torus of A cells with region areas a_i:

    D = (number of regions) / A        regions per unit area
    S = (sum of a_i^2) / A             mean squared region area per unit area

S/A equals, exactly, the probability that two independently uniform cells
(with replacement) land in the same region. Along a trajectory D decreases
by exactly 1/A per merge and S strictly increases, so curves are naturally
parametrised by D. The critical density estimator reads, per lattice size,
the largest D at which the replica-averaged S(D)/A exceeds a fixed
threshold, then extrapolates linearly in 1/N across sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RunResult
from .errors import DataQualityError
from .partition import Partition


@dataclass(frozen=True)
class TrajectorySample:
    """One statistics row of a trajectory."""

    t: float
    regions: int
    density: float           # D
    mean_sq_area: float      # S
    s_over_a: float          # S / A == two-point same-region probability
    largest_fraction: float


def sample(partition: Partition, t: float) -> TrajectorySample:
    """Exact observables of the current state."""
    area = partition.total_area
    return _sample_from_aggregates(t, partition.num_regions,
                                   partition.sum_sq_area,
                                   partition.largest_area, area)


def _sample_from_aggregates(t, regions, sum_sq, max_area, total_area):
    return TrajectorySample(
        t=t,
        regions=regions,
        density=regions / total_area,
        mean_sq_area=sum_sq / total_area,
        s_over_a=sum_sq / total_area / total_area,
        largest_fraction=max_area / total_area,
    )


def trajectory(result: RunResult) -> list[TrajectorySample]:
    """Convert a run's raw samples into statistics rows."""
    area = result.lattice.n_cells
    return [_sample_from_aggregates(t, regions, sum_sq, max_area, area)
            for t, regions, sum_sq, max_area in result.raw_samples]


def two_point_estimate(partition: Partition, n_pairs: int, rng) -> float:
    """Monte Carlo estimate of the same-region probability of two uniform
    cells (with replacement); the oracle for the S/A identity."""
    owners = partition.owners()
    n = len(owners)
    hits = 0
    for _ in range(n_pairs):
        u = int(rng.next_double() * n)
        v = int(rng.next_double() * n)
        if owners[u] == owners[v]:
            hits += 1
    return hits / n_pairs


# ---------------------------------------------------------------------- #
# curves across replicas


def default_density_grid(n_points: int = 600,
                         d_min: float = 5e-4) -> np.ndarray:
    """Descending log-spaced density grid from 1 to d_min."""
    return np.geomspace(1.0, d_min, n_points)


@dataclass
class Curve:
    """Replica-averaged S(D)/A curve on a fixed density grid."""

    total_area: int
    n_replicas: int
    density: np.ndarray
    mean_s_over_a: np.ndarray
    se_s_over_a: np.ndarray

    @property
    def mean_s(self) -> np.ndarray:
        return self.mean_s_over_a * self.total_area

    @property
    def se_s(self) -> np.ndarray:
        return self.se_s_over_a * self.total_area


def percolation_function(replica_samples: list[list[TrajectorySample]],
                         total_area: int,
                         density_grid: np.ndarray | None = None) -> Curve:
    """Mean and standard error of S(D)/A over replicas on a fixed D grid."""
    if len(replica_samples) < 2:
        raise DataQualityError("need at least 2 replicas for error bars")
    if density_grid is None:
        density_grid = default_density_grid()
    grid = np.asarray(density_grid, dtype=float)
    rows = []
    for samples in replica_samples:
        if not samples:
            raise DataQualityError("empty sample set")
        d = np.array([s.density for s in samples])
        v = np.array([s.s_over_a for s in samples])
        # trajectories run from D=1 downward; np.interp wants ascending x
        rows.append(np.interp(grid[::-1], d[::-1], v[::-1])[::-1])
    mat = np.vstack(rows)
    mean = mat.mean(axis=0)
    se = mat.std(axis=0, ddof=1) / math.sqrt(mat.shape[0])
    return Curve(total_area, mat.shape[0], grid, mean, se)


# ---------------------------------------------------------------------- #
# critical density


@dataclass
class CurveEstimate:
    """Threshold-crossing estimate of the critical density.

    per_size maps lattice area A to the largest density at which the mean
    S(D)/A curve exceeds the threshold; `dcrit` extrapolates those values
    linearly in 1/sqrt(A) to the infinite lattice and `spread` (max minus
    min across sizes) is reported as the uncertainty.
    """

    theta: float
    per_size: dict[int, float]
    dcrit: float
    spread: float
    curves: dict[int, Curve]


def crossing_density(curve: Curve, theta: float,
                     monotone_tol: float = 0.02) -> float:
    """Largest density at which the mean curve exceeds theta."""
    v = curve.mean_s_over_a
    # coarsening can only increase S/A as D drops; flag violations beyond
    # Monte Carlo noise
    drop = float(np.max(np.maximum.accumulate(v) - v))
    if drop > monotone_tol:
        raise DataQualityError(
            f"S(D)/A curve not monotone within tolerance (drop {drop:.3f})")
    above = np.nonzero(v >= theta)[0]
    if len(above) == 0:
        raise DataQualityError("curve never exceeds the threshold")
    j = int(above[0])
    if j == 0:
        return float(curve.density[0])
    # linear interpolation between the straddling grid points
    d0, d1 = curve.density[j - 1], curve.density[j]
    v0, v1 = v[j - 1], v[j]
    if v1 == v0:
        return float(d1)
    w = (theta - v0) / (v1 - v0)
    return float(d0 + w * (d1 - d0))


def estimate_dcrit(curves: dict[int, Curve], theta: float = 0.05) -> CurveEstimate:
    """Multi-size threshold estimator of the critical density."""
    if len(curves) < 2:
        raise DataQualityError("need curves from at least 2 lattice sizes")
    per_size = {area: crossing_density(c, theta)
                for area, c in sorted(curves.items())}
    areas = np.array(sorted(per_size))
    values = np.array([per_size[a] for a in areas])
    # finite-size trend is smooth in 1/N = 1/sqrt(A); extrapolate to 0
    x = 1.0 / np.sqrt(areas.astype(float))
    slope, intercept = np.polyfit(x, values, 1)
    dcrit = max(0.0, float(intercept))
    spread = float(values.max() - values.min())
    return CurveEstimate(theta, per_size, dcrit, spread, dict(curves))
