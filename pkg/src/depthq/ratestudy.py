"""Monte Carlo harness for convergence-rate and null-calibration checks.

Every replication draws X and Y i.i.d. N(0, I_dim) with m = n from its own
derived stream (stream id ``size_index * reps + rep``), so results do not
depend on execution order or on the number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .decomposition import PopulationModel, decompose, population_mahalanobis_depth
from .depth import DepthSpec, compute_depth, mahalanobis_depth
from .exceptions import InputError
from .numerics import chisq_cdf, derive_stream, fit_loglog_slope, ks_distance, normal_cdf, std_normal
from .qstat import normalize, q_pair, q_statistic, variant_stats

log = logging.getLogger(__name__)

QUANTITIES = ("sum_dev", "q_dev", "hoeffding_remainder", "gkn_remainder",
              "sup_depth_error", "null_calibration")
_ANALYTIC = ("hoeffding_remainder", "gkn_remainder", "sup_depth_error")
_GRID_STREAM = 2**62  # stream id reserved for the fixed evaluation grid
GRID_POINTS = 100


@dataclass(frozen=True)
class StudyConfig:
    dim: int = 2
    sizes: tuple = (64, 128, 256, 512, 1024)
    reps: int = 500
    seed: int = 0
    depth: DepthSpec = DepthSpec("mahalanobis")
    quantity: str = "q_dev"

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if self.quantity not in QUANTITIES:
            raise InputError(f"unknown quantity {self.quantity!r}; expected one of {QUANTITIES}")
        if self.dim < 1 or self.reps < 1:
            raise InputError("dim and reps must be positive")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InputError("sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InputError("sizes must be strictly increasing")
        if self.quantity != "null_calibration" and len(self.sizes) < 3:
            raise InputError("slope quantities need at least three sizes")
        if self.quantity in _ANALYTIC and self.depth.kind != "mahalanobis":
            raise InputError(f"quantity {self.quantity} requires mahalanobis depth")
        if self.depth.kind == "euclidean" and self.dim != 1:
            raise InputError("euclidean depth requires dim = 1")


@dataclass
class StudyResult:
    per_size_mean_abs: list
    slope: float | None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "per_size_mean_abs": [[int(s), float(v)] for s, v in self.per_size_mean_abs],
            "slope": self.slope,
            "extra": self.extra,
        }


def draw_samples(seed: int, stream_id: int, size: int, dim: int):
    """X and Y, each ``size`` x ``dim`` standard normal, from one stream."""
    z = std_normal(derive_stream(seed, stream_id), 2 * size * dim)
    return z[: size * dim].reshape(size, dim), z[size * dim:].reshape(size, dim)


def evaluation_grid(seed: int, dim: int) -> np.ndarray:
    return std_normal(derive_stream(seed, _GRID_STREAM), GRID_POINTS * dim).reshape(GRID_POINTS, dim)


def _replicate(config: StudyConfig, size_index: int, rep: int, grid) -> float:
    size = config.sizes[size_index]
    x, y = draw_samples(config.seed, size_index * config.reps + rep, size, config.dim)
    quantity = config.quantity
    if quantity in ("hoeffding_remainder", "gkn_remainder"):
        report = decompose(x, y, PopulationModel.standard(config.dim))
        return getattr(report, quantity)
    if quantity == "sup_depth_error":
        model = PopulationModel.standard(config.dim)
        return float(np.max(np.abs(mahalanobis_depth(grid, x)
                                   - population_mahalanobis_depth(grid, model))))
    if quantity == "q_dev":
        spec = config.depth
        d_x = compute_depth(x, x, spec)
        d_y = compute_depth(y, x, spec)
        return q_statistic(d_x, d_y) - 0.5
    pair = q_pair(x, y, config.depth)
    if quantity == "sum_dev":
        return pair.q_fg + pair.q_gf - 1.0
    return normalize(pair.q_fg, pair.m, pair.n)


def _run_grid(config: StudyConfig, fn, n_jobs: int) -> np.ndarray:
    tasks = [(i, r) for i in range(len(config.sizes)) for r in range(config.reps)]
    if n_jobs <= 1:
        values = [fn(i, r) for i, r in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(lambda t: fn(*t), tasks))
    return np.asarray(values, dtype=float).reshape(len(config.sizes), config.reps)


def run_study(config: StudyConfig, n_jobs: int = 1) -> StudyResult:
    """Average |quantity| over replications at each size and fit the log-log
    slope. ``null_calibration`` records normalized q_fg values and reports the
    rejection rate at |z| > 1.96 and the KS distance to N(0, 1)."""
    grid = evaluation_grid(config.seed, config.dim) if config.quantity == "sup_depth_error" else None
    values = _run_grid(config, lambda i, r: _replicate(config, i, r, grid), n_jobs)
    means = np.mean(np.abs(values), axis=1)
    per_size = [(s, float(v)) for s, v in zip(config.sizes, means)]
    extra = {}
    if config.quantity == "null_calibration":
        z = values[-1]
        extra = {
            "size": config.sizes[-1],
            "rejection_rate": float(np.mean(np.abs(z) > 1.96)),
            "ks_normal": ks_distance(z, normal_cdf),
        }
    slope = None
    if len(config.sizes) >= 2 and np.all(means > 0):
        slope = fit_loglog_slope(per_size)
    log.info("study %s: slope=%s", config.quantity, slope)
    return StudyResult(per_size, slope, extra)


class AttractionCheck(NamedTuple):
    ks_m: float
    ks_mstar_sq: float
    disagreement: float


def chi_square_attraction_check(config: StudyConfig, n_jobs: int = 1) -> AttractionCheck:
    """KS distances of M and (M*)^2 against chi-square(1) at the largest size.

    ``disagreement`` is the fraction of replications in which M and (M*)^2
    differ. With a single replication the KS distance is the one-point
    distance max(F(v), 1 - F(v)).
    """
    size_index = len(config.sizes) - 1
    spec = config.depth
    if spec.kind not in ("euclidean", "mahalanobis"):
        raise InputError("attraction check needs an exact depth (euclidean or mahalanobis)")
    size = config.sizes[size_index]

    def one(rep):
        x, y = draw_samples(config.seed, size_index * config.reps + rep, size, config.dim)
        return variant_stats(q_pair(x, y, spec))

    reps = range(config.reps)
    if n_jobs <= 1:
        stats = [one(r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            stats = list(pool.map(one, reps))
    m_vals = np.array([s[0] for s in stats])
    mstar_sq = np.array([s[1] for s in stats]) ** 2
    cdf = lambda v: chisq_cdf(v, 1)  # noqa: E731
    return AttractionCheck(
        ks_distance(m_vals, cdf),
        ks_distance(mstar_sq, cdf),
        float(np.mean(~np.isclose(m_vals, mstar_sq, rtol=1e-12, atol=1e-12))),
    )
