"""Replicated convergence experiments for the streaming estimators.

Replicates are split into fixed-size groups that advance in lockstep as
``(group, d)`` arrays.  Group boundaries never depend on the thread count and
each replicate owns its generator (``seed + replicate_index``), so results are
identical however the groups are scheduled.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .errors import (
    ConfigError,
    DegenerateGap,
    DegenerateUpdate,
    GridMismatch,
    InsufficientData,
    InsufficientSamples,
    StreamPCAError,
)
from .estimators import (
    PARALLEL_TOL,
    ScheduleParams,
    Scheme,
    eigenvalue_estimate_single,
    gamma_at,
    init_state,
    validate_schedule,
)
from .linalg import sym_eigen
from .streams import (
    CovarianceModel,
    build_fixed_dataset,
    gaussian_block,
    make_covariance,
    read_csv,
    resolve_spectrum,
)

SCHEMES = ("krasulina", "oja", "ccipca")
VARIANTS = ("smallest", "largest")
SOURCES = ("gaussian", "fixed", "csv")

GROUP_SIZE = 16
CHUNK = 4096
RENORM_AT = 1e200  # squared norm; ~1e100 in norm
THREADS_ENV = "STREAM_EIG_THREADS"


def default_checkpoints(n_total, count=30, start=100):
    """Geometric grid of ``count`` points from ``start`` to ``n_total``."""
    if n_total <= 0:
        return (0,)
    lo = min(start, n_total)
    grid = np.unique(np.round(np.geomspace(lo, n_total, count)).astype(int))
    return tuple(int(k) for k in grid)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "krasulina"
    variant: str = "smallest"
    spectrum: object = "smallest-id"
    d: int = None
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    amnesic_l: float = 2.0
    n_total: int = 100_000
    replicates: int = 50
    checkpoints: tuple = None
    seed: int = 0
    source: str = "gaussian"
    csv_path: str = None

    @property
    def eigenvalues(self):
        return resolve_spectrum(self.spectrum)

    @property
    def dim(self):
        return len(self.eigenvalues)

    @property
    def estimator_scheme(self):
        if self.scheme == "krasulina":
            return Scheme.KRASULINA_MIN if self.variant == "smallest" else Scheme.KRASULINA_MAX
        return Scheme(self.scheme)

    @property
    def checkpoint_grid(self):
        if self.checkpoints is None:
            return default_checkpoints(self.n_total)
        return tuple(int(k) for k in self.checkpoints)

    def validate(self):
        """Raise :class:`ConfigError` (or :class:`DegenerateGap`) on an unusable config."""
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.scheme != "krasulina" and self.variant != "largest":
            raise ConfigError(f"{self.scheme} only estimates the top eigenvector (variant=largest)")
        if self.source not in SOURCES:
            raise ConfigError(f"source must be one of {SOURCES}, got {self.source!r}")
        if self.source == "csv" and not self.csv_path:
            raise ConfigError("source=csv requires csv_path")
        try:
            lam = self.eigenvalues
            make_covariance(lam, 0)
        except StreamPCAError as exc:
            raise ConfigError(str(exc)) from exc
        if self.d is not None and self.d != len(lam):
            raise ConfigError(f"d={self.d} but spectrum has {len(lam)} entries")
        if self.n_total < 0 or self.replicates < 1:
            raise ConfigError("need n_total >= 0 and replicates >= 1")
        if self.amnesic_l < 0:
            raise ConfigError("amnesic_l must be nonnegative")
        try:
            validate_schedule(self.schedule)
        except StreamPCAError as exc:
            raise ConfigError(str(exc)) from exc
        grid = self.checkpoint_grid
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("checkpoints must be strictly ascending")
        if grid[0] < 0 or grid[-1] > self.n_total:
            raise ConfigError(f"checkpoints must lie in [0, n_total={self.n_total}]")
        if self.source != "csv" and len(lam) > 1:
            idx = (0, 1) if self.variant == "smallest" else (-1, -2)
            if lam[idx[0]] == lam[idx[1]]:
                raise DegenerateGap(
                    f"the {self.variant} eigenvalue of this spectrum is repeated; "
                    "its eigenvector is not identifiable"
                )
        return self


@dataclass(frozen=True)
class Problem:
    """Ground truth and (for finite sources) the data matrix an experiment streams."""

    model: CovarianceModel
    moment: float
    data: np.ndarray = None


def oracle_model(X):
    """Truth for a finite dataset: Jacobi eigenpairs of the scatter matrix ``X^T X / n``."""
    X = np.asarray(X, dtype=float)
    spec = sym_eigen(X.T @ X / X.shape[0])
    lam = np.maximum(spec.eigenvalues, 0.0)
    return CovarianceModel(lam, spec.eigenvectors)


def prepare(config):
    config.validate()
    if config.source == "gaussian":
        model = make_covariance(config.eigenvalues, config.seed)
        return Problem(model, metrics.fourth_moment_gaussian(model))
    if config.source == "fixed":
        base = make_covariance(config.eigenvalues, config.seed)
        X = build_fixed_dataset(base, max(config.n_total, base.d), config.seed)
    else:
        X = read_csv(config.csv_path)
        if X.shape[1] != config.dim:
            raise ConfigError(f"{config.csv_path} has {X.shape[1]} columns, spectrum has {config.dim}")
    if X.shape[0] < config.n_total:
        raise InsufficientSamples(f"dataset has {X.shape[0]} rows, n_total={config.n_total}")
    model = oracle_model(X)
    if model.target(config.variant)[2] <= 0:
        raise DegenerateGap(f"{config.variant} eigenvalue of the data covariance is repeated")
    moment = float(np.mean(np.sum(X * X, axis=1) ** 2))
    return Problem(model, moment, X)


@dataclass(frozen=True)
class ReplicateTrace:
    """Raw per-checkpoint losses of one replicate.

    ``eig_error`` uses the single-sample estimate from the latest sample;
    ``rayleigh_error`` uses the population Rayleigh quotient of the iterate.
    """

    index: int
    n: np.ndarray
    align_loss: np.ndarray
    eig_error: np.ndarray
    rayleigh_error: np.ndarray
    v_norm: np.ndarray


def _update(scheme, V, X, gamma, step, amnesic_l):
    """Apply one update to every row of ``V`` with the matching row of ``X``."""
    c = np.sum(X * V, axis=1)
    if scheme in (Scheme.KRASULINA_MIN, Scheme.KRASULINA_MAX):
        vv = np.sum(V * V, axis=1)
        W = X - (c / vv)[:, None] * V
        W = W - (np.sum(W * V, axis=1) / vv)[:, None] * V
        W[np.sum(W * W, axis=1) <= PARALLEL_TOL * np.sum(X * X, axis=1)] = 0.0
        sign = -1.0 if scheme is Scheme.KRASULINA_MIN else 1.0
        V = V + (sign * gamma) * (c[:, None] * W)
        big = np.sum(V * V, axis=1) > RENORM_AT
        if big.any():
            # direction-preserving rescale; every metric is scale invariant
            V[big] /= np.sqrt(np.sum(V[big] * V[big], axis=1))[:, None]
        return V
    if scheme is Scheme.OJA:
        U = V + (gamma * c)[:, None] * X
        norms = np.sqrt(np.sum(U * U, axis=1))
        if np.any(norms < 1e-300):
            raise DegenerateUpdate("Oja update collapsed to the zero vector")
        return U / norms[:, None]
    norms = np.sqrt(np.sum(V * V, axis=1))
    keep = max((step - 1 - amnesic_l) / step, 0.0)
    fresh = (1 + amnesic_l) / step
    return keep * V + (fresh * c / norms)[:, None] * X


def _run_group(config, problem, indices):
    model = problem.model
    d = model.d
    scheme = config.estimator_scheme
    lam_target, theta, _ = model.target(config.variant)
    grid = config.checkpoint_grid
    wanted = set(grid)
    rngs = [np.random.default_rng(config.seed + i) for i in indices]
    V = np.stack([init_state(d, scheme, rng, config.amnesic_l).v for rng in rngs])
    G = len(indices)
    rows = {name: np.empty((G, len(grid))) for name in ("align", "eig", "ray", "norm")}
    col = 0

    def draw(k0, b):
        # samples k0+1 .. k0+b for every replicate, shape (b, G, d)
        if problem.data is not None:
            return np.broadcast_to(problem.data[k0:k0 + b, None, :], (b, G, d))
        return np.stack([gaussian_block(model, rng, b) for rng in rngs], axis=1)

    def record(V, X_last):
        nonlocal col
        for g in range(G):
            v = V[g]
            rows["align"][g, col] = metrics.alignment_loss(v, theta)
            rows["eig"][g, col] = abs(eigenvalue_estimate_single(X_last[g], v) - lam_target)
            rows["ray"][g, col] = abs(metrics.rayleigh(model, v) - lam_target)
            rows["norm"][g, col] = np.linalg.norm(v)
        col += 1

    k = 0
    block = draw(0, min(CHUNK, max(config.n_total, 1)))
    if 0 in wanted:
        # no sample consumed yet: the single-sample estimate peeks at the first one
        record(V, block[0])
    while k < config.n_total:
        b = min(CHUNK, config.n_total - k)
        if k > 0:
            block = draw(k, b)
        for t in range(b):
            step = k + 1  # iterate index before this update
            gamma = gamma_at(config.schedule, step + 1)
            V = _update(scheme, V, block[t], gamma, step, config.amnesic_l)
            k += 1
            if k in wanted:
                record(V, block[t])

    return [
        ReplicateTrace(
            i,
            np.array(grid),
            rows["align"][g].copy(),
            rows["eig"][g].copy(),
            rows["ray"][g].copy(),
            rows["norm"][g].copy(),
        )
        for g, i in enumerate(indices)
    ]


def run_single(config, replicate_index, problem=None):
    """Stream ``n_total`` samples through one replicate and return its raw trace."""
    problem = problem or prepare(config)
    return _run_group(config, problem, [replicate_index])[0]


@dataclass(frozen=True)
class CurvePoint:
    n: int
    mean_alignment_loss: float
    mean_eigenvalue_error: float
    stderr_align: float
    stderr_eig: float
    bound: float
    mean_rayleigh_error: float = 0.0
    stderr_rayleigh: float = 0.0


def _mean_stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def aggregate(traces, bounds=None):
    """Mean and standard error of every metric per checkpoint (stderr 0 for one replicate)."""
    if not traces:
        raise ValueError("no replicates to aggregate")
    grid = traces[0].n
    for tr in traces[1:]:
        if not np.array_equal(tr.n, grid):
            raise GridMismatch(f"replicate {tr.index} has a different checkpoint grid")
    points = []
    for j, n in enumerate(grid):
        align = _mean_stderr([tr.align_loss[j] for tr in traces])
        eig = _mean_stderr([tr.eig_error[j] for tr in traces])
        ray = _mean_stderr([tr.rayleigh_error[j] for tr in traces])
        bound = float("nan") if bounds is None else float(bounds[j])
        points.append(CurvePoint(int(n), align[0], eig[0], align[1], eig[1], bound, ray[0], ray[1]))
    return points


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    curve: list
    fits: dict
    traces: list = field(repr=False)
    eig_bounds: list = field(repr=False, default=None)


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    return max(1, int(threads))


def _fit(curve, attr, n_min):
    pts = [(p.n, getattr(p, attr)) for p in curve if p.n >= max(n_min, 1)]
    try:
        return metrics.fit_rate_slope(pts)
    except InsufficientData:
        return None


def run_experiment(config, threads=None):
    """Run every replicate, aggregate the curves and fit log-log slopes.

    Slopes use checkpoints with ``n >= n_total / 100`` only.
    """
    problem = prepare(config)
    indices = list(range(config.replicates))
    groups = [indices[i:i + GROUP_SIZE] for i in range(0, len(indices), GROUP_SIZE)]
    workers = min(resolve_threads(threads), len(groups))
    if workers == 1:
        results = [_run_group(config, problem, g) for g in groups]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda g: _run_group(config, problem, g), groups))
    traces = [tr for group in results for tr in group]

    grid = config.checkpoint_grid
    moment = problem.moment
    bounds = [
        metrics.theoretical_bound(problem.model, max(n, 1), metrics.ALIGNMENT_LOSS, moment, config.variant)
        for n in grid
    ]
    eig_bounds = [
        metrics.theoretical_bound(problem.model, max(n, 1), metrics.EIGENVALUE_ERR, moment, config.variant)
        for n in grid
    ]
    curve = aggregate(traces, bounds)
    n_min = config.n_total / 100
    fits = {
        "align": _fit(curve, "mean_alignment_loss", n_min),
        "eig": _fit(curve, "mean_eigenvalue_error", n_min),
        "rayleigh": _fit(curve, "mean_rayleigh_error", n_min),
    }
    return ExperimentResult(config, curve, fits, traces, eig_bounds)
