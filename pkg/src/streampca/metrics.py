"""Loss functions, the Krasulina rate envelope and log-log slope fitting."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGap, InsufficientData, ZeroVector

EIGENVALUE_ERR = "eigenvalue"
ALIGNMENT_LOSS = "alignment"


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    points_dropped: int = 0


def _unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ZeroVector("zero iterate")
    return v / norm


def alignment_loss(v, theta):
    """Squared sine of the angle between ``v`` and the unit vector ``theta``."""
    u = _unit(v)
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-10:
        raise ValueError("theta must be a unit vector")
    loss = 1.0 - float(u @ theta) ** 2
    return min(max(loss, 0.0), 1.0)


def eigenvalue_error(estimate, model, which):
    target = model.target(which)[0]
    return abs(float(estimate) - target)


def f_value(model, v):
    """Rayleigh-quotient variance ``||S u||^2 - (u^T S u)^2`` of the unit direction ``u``.

    Evaluated as ``||S u - mu u||^2``, which is algebraically identical,
    nonnegative by construction and vanishes exactly on eigenvectors.
    """
    u = _unit(v)
    S = model.sigma if hasattr(model, "sigma") else np.asarray(model, dtype=float)
    Su = S @ u
    residual = Su - float(u @ Su) * u
    return float(residual @ residual)


def rayleigh(model, v):
    """Population Rayleigh quotient ``mu(v)`` under the model covariance."""
    u = _unit(v)
    return float(u @ (model.sigma @ u))


def fourth_moment_gaussian(model):
    """``E||x x^T||^2 = E||x||^4 = 2 tr(S^2) + tr(S)^2`` for ``x ~ N(0, S)``."""
    lam = model.eigenvalues
    return 2.0 * float(np.sum(lam * lam)) + float(np.sum(lam)) ** 2


def theoretical_bound(model, n, kind, moment, which="smallest"):
    """Rate envelope ``||S|| * max(sqrt(moment), ||S||) / sqrt(n)``, divided by the gap for alignment.

    Passing ``moment = tr(S)**2`` gives the Gaussian shorthand
    ``||S|| tr(S) / (g sqrt(n))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    op = float(np.max(np.abs(model.eigenvalues)))
    value = op * max(math.sqrt(moment), op) / math.sqrt(n)
    if kind == EIGENVALUE_ERR:
        return value
    if kind != ALIGNMENT_LOSS:
        raise ValueError(f"unknown bound kind {kind!r}")
    gap = model.target(which)[2]
    if gap <= 0:
        raise DegenerateGap(f"eigen-gap of the {which} eigenpair is zero")
    return value / gap


def fit_rate_slope(points):
    """Least-squares fit of ``log(loss) = intercept + slope * log(n)``.

    Points with nonpositive loss are dropped and counted in ``points_dropped``.
    """
    pts = [(float(n), float(loss)) for n, loss in points]
    usable = [(n, loss) for n, loss in pts if loss > 0 and n > 0 and math.isfinite(loss)]
    dropped = len(pts) - len(usable)
    if len({n for n, _ in usable}) < 3:
        raise InsufficientData(f"need >= 3 distinct positive points, have {len(usable)}")
    x = np.log([n for n, _ in usable])
    y = np.log([loss for _, loss in usable])
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((yc - slope * xc) ** 2))
    ss_tot = float(yc @ yc)
    if ss_tot <= 1e-24 * max(1.0, float(y @ y)):
        r2 = 1.0  # constant loss: the flat line is an exact fit
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return RateFit(slope, intercept, r2, len(usable), dropped)
