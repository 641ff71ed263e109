"""Driving distributions and the coordinate dictionary between them.

Only two models are supported: the uniform distribution on [0, 1] and the
mean-one exponential distribution. The law of the number of selections does
not depend on the driving distribution, so every table in this package is
computed in uniform coordinates and exponential quantities are obtained by
the change of variables ``u = 1 - exp(-x)``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "DistributionModel",
    "UNIFORM",
    "EXPONENTIAL",
    "cdf",
    "pdf",
    "quantile",
    "to_uniform_coord",
    "to_exponential_coord",
]


class DistributionModel(enum.Enum):
    UNIFORM01 = "uniform"
    EXPONENTIAL_MEAN1 = "exponential"

    @property
    def support(self) -> tuple[float, float]:
        if self is DistributionModel.UNIFORM01:
            return (0.0, 1.0)
        return (0.0, math.inf)


UNIFORM = DistributionModel.UNIFORM01
EXPONENTIAL = DistributionModel.EXPONENTIAL_MEAN1


def _as_real(x) -> np.ndarray:
    # long double input stays long double so the exponential round trip keeps its digits
    x = np.asarray(x)
    return x if x.dtype == np.longdouble else x.astype(float)


def cdf(model: DistributionModel, x):
    """Distribution function, clamped outside the support."""
    x = _as_real(x)
    if model is UNIFORM:
        out = np.clip(x, 0.0, 1.0)
    else:
        out = np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0)), 0.0)
    return out[()] if out.ndim == 0 else out


def pdf(model: DistributionModel, x):
    x = _as_real(x)
    if model is UNIFORM:
        out = np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0)
    else:
        out = np.where(x >= 0.0, np.exp(-np.maximum(x, 0.0)), 0.0)
    return out[()] if out.ndim == 0 else out


def _check_probability(u: np.ndarray) -> None:
    if np.any(~np.isfinite(u)) or np.any(u < 0.0) or np.any(u >= 1.0):
        raise ValueError("probability must lie in [0, 1)")


def quantile(model: DistributionModel, u):
    """Inverse distribution function on [0, 1).

    ``u == 1`` is rejected for both models so that the contract does not
    depend on whether the support is bounded.
    """
    u = _as_real(u)
    _check_probability(u)
    out = u.copy() if model is UNIFORM else -np.log1p(-u)
    return out[()] if out.ndim == 0 else out


def to_uniform_coord(model: DistributionModel, s):
    return cdf(model, s)


def to_exponential_coord(u):
    """Map a uniform coordinate ``u`` to ``-log(1 - u)``."""
    u = _as_real(u)
    _check_probability(u)
    out = -np.log1p(-u)
    return out[()] if out.ndim == 0 else out
