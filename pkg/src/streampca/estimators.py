"""Single-eigenvector streaming estimators: Krasulina (min/max), Oja and CCIPCA.

Every update is a pure function ``(state, x) -> state``.  ``state.step`` is
the iterate index ``n`` of ``V_n``; initial states start at ``n = 1`` and the
Krasulina and Oja updates use the learning rate ``gamma_{n+1}``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateUpdate,
    InadmissibleSchedule,
    InvalidSample,
    ZeroVector,
)


PARALLEL_TOL = 1e-28  # squared relative size of a rounding-level residue


class Scheme(str, enum.Enum):
    KRASULINA_MIN = "krasulina-min"
    KRASULINA_MAX = "krasulina-max"
    OJA = "oja"
    CCIPCA = "ccipca"


@dataclass(frozen=True)
class ScheduleParams:
    """Learning rate ``gamma_n = c / (n + n0) ** alpha``.

    The schedule is admissible (``sum gamma = inf``, ``sum gamma^2 < inf``)
    exactly when ``1/2 < alpha <= 1``.
    """

    c: float = 1.0
    alpha: float = 1.0
    n0: int = 0

    def __post_init__(self):
        if not self.c > 0:
            raise InadmissibleSchedule(f"rate constant c must be positive, got {self.c}")
        if self.n0 < 0 or int(self.n0) != self.n0:
            raise InadmissibleSchedule(f"offset n0 must be a nonnegative integer, got {self.n0}")

    @property
    def admissible(self):
        return 0.5 < self.alpha <= 1.0


def validate_schedule(schedule):
    if not schedule.admissible:
        raise InadmissibleSchedule(
            f"alpha={schedule.alpha} outside (1/2, 1]: sum of gamma or gamma^2 misbehaves"
        )
    return schedule


def gamma_at(schedule, n):
    validate_schedule(schedule)
    if n < 1:
        raise ValueError(f"schedule index must be >= 1, got {n}")
    return schedule.c / (n + schedule.n0) ** schedule.alpha


@dataclass(frozen=True)
class EstimatorState:
    v: np.ndarray
    step: int
    scheme: Scheme
    amnesic_l: float = 0.0


@dataclass(frozen=True)
class UpdateDiagnostics:
    xi: np.ndarray
    gamma_used: float
    xi_norm: float


def init_state(d, scheme, rng, amnesic_l=0.0):
    """Uniform random unit vector as ``V_1``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    z = rng.standard_normal(d)
    while not np.any(z):
        z = rng.standard_normal(d)
    return EstimatorState(z / np.linalg.norm(z), 1, Scheme(scheme), float(amnesic_l))


def _vec(x, name="x"):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidSample(f"{name} has non-finite entries")
    return x


def krasulina_xi(x, v):
    """``<x,v> x - (<x,v>^2 / ||v||^2) v``, the component of ``<x,v> x`` orthogonal to ``v``."""
    x = _vec(x)
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if vv == 0.0:
        raise ZeroVector("Krasulina direction undefined for v = 0")
    coef = float(x @ v)
    w = x - (coef / vv) * v
    # second projection pass removes the rounding residue along v
    w = w - (float(w @ v) / vv) * v
    if float(w @ w) <= PARALLEL_TOL * float(x @ x):
        # x parallel to v up to rounding: exact xi is 0
        return np.zeros_like(w)
    return coef * w


def _krasulina_step(state, x, schedule, sign, expected):
    if state.scheme is not expected:
        raise ValueError(f"state scheme is {state.scheme.value}, expected {expected.value}")
    x = _vec(x)
    if x.shape != state.v.shape:
        raise ValueError(f"sample dimension {x.shape} != iterate dimension {state.v.shape}")
    gamma = gamma_at(schedule, state.step + 1)
    xi = krasulina_xi(x, state.v)
    v_new = state.v + (sign * gamma) * xi
    diag = UpdateDiagnostics(xi, gamma, float(np.linalg.norm(xi)))
    return EstimatorState(v_new, state.step + 1, state.scheme, state.amnesic_l), diag


def krasulina_step_min(state, x, schedule):
    """``V_{n+1} = V_n - gamma_{n+1} xi_{n+1}``: descends toward the smallest eigenvector."""
    return _krasulina_step(state, x, schedule, -1.0, Scheme.KRASULINA_MIN)


def krasulina_step_max(state, x, schedule):
    """Sign-flipped Krasulina update that climbs toward the top eigenvector."""
    return _krasulina_step(state, x, schedule, 1.0, Scheme.KRASULINA_MAX)


def oja_step(state, x, schedule):
    if state.scheme is not Scheme.OJA:
        raise ValueError(f"state scheme is {state.scheme.value}, expected oja")
    x = _vec(x)
    gamma = gamma_at(schedule, state.step + 1)
    u = state.v + (gamma * float(x @ state.v)) * x
    norm = np.linalg.norm(u)
    if norm < 1e-300:
        raise DegenerateUpdate("Oja update collapsed to the zero vector")
    return EstimatorState(u / norm, state.step + 1, state.scheme, state.amnesic_l)


def ccipca_step(state, x, schedule=None):
    """Amnesic CCIPCA update; ``||v||`` tracks the top eigenvalue.

    The step counter ``n`` of the incoming state sets the weights
    ``(n-1-l)/n`` and ``(1+l)/n``; the first weight is clamped at 0 while
    ``n <= l + 1``.  ``schedule`` is accepted for interface symmetry and ignored.
    """
    if state.scheme is not Scheme.CCIPCA:
        raise ValueError(f"state scheme is {state.scheme.value}, expected ccipca")
    x = _vec(x)
    norm = np.linalg.norm(state.v)
    if norm == 0.0:
        raise ZeroVector("CCIPCA iterate is the zero vector")
    n, l = state.step, state.amnesic_l
    keep = max((n - 1 - l) / n, 0.0)
    fresh = (1 + l) / n
    v_new = keep * state.v + (fresh * float(x @ state.v) / norm) * x
    return EstimatorState(v_new, n + 1, state.scheme, l)


def step(state, x, schedule):
    """Dispatch one update on ``state.scheme``; returns only the new state."""
    if state.scheme is Scheme.KRASULINA_MIN:
        return krasulina_step_min(state, x, schedule)[0]
    if state.scheme is Scheme.KRASULINA_MAX:
        return krasulina_step_max(state, x, schedule)[0]
    if state.scheme is Scheme.OJA:
        return oja_step(state, x, schedule)
    return ccipca_step(state, x, schedule)


def eigenvalue_estimate_single(x, v):
    """Single-sample Rayleigh quotient ``<x,v>^2 / ||v||^2`` of ``A = x x^T``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if vv == 0.0:
        raise ZeroVector("eigenvalue estimate undefined for v = 0")
    return float(x @ v) ** 2 / vv
