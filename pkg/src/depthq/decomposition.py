"""Main terms and remainders of Q(F_m, G_n) - 1/2 under a known Gaussian F.

With F = N(mu, Sigma) and Mahalanobis depth, the population depth
D(x; F) = 1 / (1 + r^2) where r^2 is chi-square(d) distributed, which gives
the distribution function of D(X; F) in closed form. Remainders are always
obtained by subtraction, so the decompositions hold by construction and
only their size is of interest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_dataset, check_point, check_same_dim
from .depth import mahalanobis_depth, mahalanobis_quadform
from .exceptions import DimensionError, InputError, NumericFailure
from .numerics import chisq_sf
from .qstat import QPair, q_statistic


@dataclass(frozen=True)
class PopulationModel:
    """Gaussian reference distribution N(mean, covariance)."""

    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T):
            raise InputError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericFailure("covariance is not positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "chol", chol)

    @classmethod
    def standard(cls, dim: int) -> "PopulationModel":
        return cls(np.zeros(dim), np.eye(dim))

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class DecompositionReport:
    q_minus_half: float
    main_fg_term: float
    main_x_term: float
    hoeffding_remainder: float
    gkn_main: float
    gkn_remainder: float


def population_mahalanobis_depth(x, model: PopulationModel):
    """Mahalanobis depth with the true mean and covariance. Accepts a single
    point or a matrix of points."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = check_dataset(check_point(pts) if single else pts, "x")
    if single:
        pts = pts.reshape(1, -1)
    if pts.shape[1] != model.dim:
        raise DimensionError(f"point dimension {pts.shape[1]} != model dimension {model.dim}")
    depth = 1.0 / (1.0 + mahalanobis_quadform(pts, model.mean, model.chol))
    return float(depth[0]) if single else depth


def depth_cdf_gaussian(depth_value, dim: int):
    """P(D(X; F) <= t) for Gaussian F and Mahalanobis depth.

    Equals the upper chi-square(dim) tail at (1 - t) / t.
    """
    t = np.asarray(depth_value, dtype=float)
    if np.any(~(t > 0)) or np.any(t > 1):
        raise InputError("depth values must lie in (0, 1]")
    return chisq_sf((1.0 - t) / t, dim)


def decompose(x, y, model: PopulationModel) -> DecompositionReport:
    """Split Q(F_m, G_n) - 1/2 into the two single-sum main terms plus a
    remainder, and separately into the double-sum main term plus a remainder.

    Q itself uses sample Mahalanobis depths with reference x; the main terms
    use population depths under ``model``.
    """
    x = check_dataset(x, "x")
    y = check_dataset(y, "y")
    check_same_dim(x, y, ("x", "y"))
    if x.shape[1] != model.dim:
        raise DimensionError(f"data dimension {x.shape[1]} != model dimension {model.dim}")
    q = q_statistic(mahalanobis_depth(x, x), mahalanobis_depth(y, x))
    q_dev = q - 0.5

    pop_x = population_mahalanobis_depth(x, model)
    pop_y = population_mahalanobis_depth(y, model)
    main_fg = float(np.mean(depth_cdf_gaussian(pop_y, model.dim) - 0.5))
    main_x = float(np.mean(0.5 - depth_cdf_gaussian(pop_x, model.dim)))
    gkn_main = q_statistic(pop_x, pop_y) - 0.5
    return DecompositionReport(
        q_minus_half=q_dev,
        main_fg_term=main_fg,
        main_x_term=main_x,
        hoeffding_remainder=q_dev - main_fg - main_x,
        gkn_main=gkn_main,
        gkn_remainder=q_dev - gkn_main,
    )


def sum_product_variants(pair: QPair) -> tuple[float, float]:
    """(q_fg + q_gf - 1, (q_fg - 1/2)(q_gf - 1/2))."""
    return pair.q_fg + pair.q_gf - 1.0, (pair.q_fg - 0.5) * (pair.q_gf - 0.5)
