"""Least-squares convergence rates in log-log coordinates."""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from geolab.shared.errors import NumericalError
from geolab.shared.logging import get_logger

logger = get_logger(__name__)

MIN_FIT_POINTS = 3


class FitError(NumericalError):
    """Fewer than three usable (epsilon, error) pairs."""


class RateFit(BaseModel):
    """Fitted line log E = slope * log eps + intercept."""

    model_config = ConfigDict(frozen=True)

    slope: float = Field(..., description="Fitted convergence rate")
    intercept: float = Field(..., description="log of the fitted constant")
    residual: float = Field(..., description="Max abs deviation of log E from the fit")
    n_points: int = Field(..., description="Pairs used")
    excluded: list[float] = Field(default_factory=list, description="Epsilons dropped from the fit")


def fit_rate(errors: Sequence[float], epsilons: Sequence[float]) -> RateFit:
    """Ordinary least squares on (log eps, log E).

    Args:
        errors: Measured errors
        epsilons: Matching epsilon values

    Returns:
        RateFit with slope and residual

    Raises:
        FitError: If fewer than three positive, finite pairs remain
    """
    if len(errors) != len(epsilons):
        msg = f"{len(errors)} errors for {len(epsilons)} epsilons"
        raise FitError(msg)
    kept_eps = []
    kept_err = []
    excluded = []
    for err, eps in zip(errors, epsilons, strict=True):
        if err > 0 and eps > 0 and np.isfinite(err):
            kept_eps.append(eps)
            kept_err.append(err)
        else:
            logger.warning("epsilon=<%s>, error=<%s> | excluding non-positive error from fit", eps, err)
            excluded.append(float(eps))
    if len(kept_eps) < MIN_FIT_POINTS:
        msg = f"rate fit needs {MIN_FIT_POINTS} positive errors, got {len(kept_eps)}"
        raise FitError(msg)
    x = np.log(np.asarray(kept_eps, dtype=float))
    y = np.log(np.asarray(kept_err, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        n_points=len(kept_eps),
        excluded=excluded,
    )
