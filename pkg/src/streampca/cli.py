"""Command-line front end: ``streampca {run,sweep-c,oracle-check,gen-data}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import ConfigError, DegenerateGap, StreamPCAError
from .estimators import ScheduleParams
from .harness import ExperimentConfig, run_experiment
from .linalg import sym_eigen, trace
from .streams import PRESETS, build_fixed_dataset, format_float, make_covariance, write_csv

CONFIG_KEYS = (
    "scheme", "variant", "d", "spectrum", "c", "alpha", "n0", "amnesic_l",
    "n_total", "replicates", "checkpoints", "seed", "source", "csv_path",
)
CURVE_COLUMNS = (
    "scheme", "variant", "n", "mean_align_loss", "stderr_align",
    "mean_eig_err", "stderr_eig", "bound",
)
SWEEP_COLUMNS = (
    "c", "n", "final_align_loss", "stderr_align", "final_eig_err", "stderr_eig",
    "align_slope", "align_r2", "eig_slope", "eig_r2",
)


class UsageError(Exception):
    pass


def config_from_dict(raw, base_dir=None):
    """Build a validated :class:`ExperimentConfig` from the flat JSON form."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kw = {k: raw[k] for k in CONFIG_KEYS if k in raw and k not in ("c", "alpha", "n0")}
    try:
        kw["schedule"] = ScheduleParams(
            c=float(raw.get("c", 1.0)),
            alpha=float(raw.get("alpha", 1.0)),
            n0=int(raw.get("n0", 0)),
        )
        for key in ("d", "n_total", "replicates", "seed"):
            if kw.get(key) is not None:
                if isinstance(kw[key], bool) or int(kw[key]) != kw[key]:
                    raise ConfigError(f"{key} must be an integer")
                kw[key] = int(kw[key])
        if "amnesic_l" in kw:
            kw["amnesic_l"] = float(kw["amnesic_l"])
        if kw.get("checkpoints") is not None:
            kw["checkpoints"] = tuple(int(k) for k in kw["checkpoints"])
        if isinstance(kw.get("spectrum"), list):
            kw["spectrum"] = tuple(float(x) for x in kw["spectrum"])
        if kw.get("csv_path") and base_dir and not os.path.isabs(kw["csv_path"]):
            kw["csv_path"] = os.path.join(base_dir, kw["csv_path"])
        return ExperimentConfig(**kw).validate()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def config_to_dict(config):
    spectrum = config.spectrum if isinstance(config.spectrum, str) else list(config.spectrum)
    return {
        "scheme": config.scheme,
        "variant": config.variant,
        "d": config.dim,
        "spectrum": spectrum,
        "c": config.schedule.c,
        "alpha": config.schedule.alpha,
        "n0": config.schedule.n0,
        "amnesic_l": config.amnesic_l,
        "n_total": config.n_total,
        "replicates": config.replicates,
        "checkpoints": list(config.checkpoint_grid),
        "seed": config.seed,
        "source": config.source,
        "csv_path": config.csv_path,
    }


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def _apply_overrides(config, args):
    kw = {}
    for name in ("scheme", "variant", "n_total", "replicates", "seed", "source", "csv_path", "amnesic_l"):
        value = getattr(args, name, None)
        if value is not None:
            kw[name] = value
    if getattr(args, "spectrum", None) is not None:
        kw["spectrum"] = _parse_spectrum(args.spectrum)
    sched = {k: getattr(args, k) for k in ("c", "alpha", "n0") if getattr(args, k, None) is not None}
    if sched:
        try:
            kw["schedule"] = replace(config.schedule, **sched)
        except StreamPCAError as exc:
            raise ConfigError(str(exc)) from exc
    if "n_total" in kw and config.checkpoints is not None:
        kw["checkpoints"] = None  # a stale explicit grid may exceed the new n_total
    return replace(config, **kw).validate() if kw else config


def _parse_spectrum(text):
    if text in PRESETS:
        return text
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"spectrum must be a preset or comma-separated numbers: {text!r}") from None


def _fmt(x):
    return format_float(float(x))


def _fit_dict(fit):
    if fit is None:
        return None
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points_used": fit.points_used,
        "points_dropped": fit.points_dropped,
    }


def write_curves(path, result):
    cfg = result.config
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CURVE_COLUMNS) + "\n")
        for p in result.curve:
            fields = [
                cfg.scheme, cfg.variant, str(p.n),
                _fmt(p.mean_alignment_loss), _fmt(p.stderr_align),
                _fmt(p.mean_eigenvalue_error), _fmt(p.stderr_eig), _fmt(p.bound),
            ]
            fh.write(",".join(fields) + "\n")


def summary_dict(result):
    last = result.curve[-1]
    return {
        "config": config_to_dict(result.config),
        "seed": result.config.seed,
        "fits": {name: _fit_dict(fit) for name, fit in result.fits.items()},
        "final": {
            "n": last.n,
            "mean_align_loss": last.mean_alignment_loss,
            "stderr_align": last.stderr_align,
            "mean_eig_err": last.mean_eigenvalue_error,
            "stderr_eig": last.stderr_eig,
            "mean_rayleigh_err": last.mean_rayleigh_error,
            "stderr_rayleigh": last.stderr_rayleigh,
            "align_bound": last.bound,
            "eig_bound": result.eig_bounds[-1],
        },
        "rayleigh_curve": [
            {"n": p.n, "mean": p.mean_rayleigh_error, "stderr": p.stderr_rayleigh}
            for p in result.curve
        ],
    }


def cmd_run(args):
    config = _apply_overrides(load_config(args.config), args)
    result = run_experiment(config)
    os.makedirs(args.out, exist_ok=True)
    write_curves(os.path.join(args.out, "curves.csv"), result)
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary_dict(result), fh, indent=2)
        fh.write("\n")
    fit = result.fits["align"]
    slope = "n/a" if fit is None else f"{fit.slope:.3f} (r2={fit.r_squared:.3f})"
    print(f"wrote {args.out}: {len(result.curve)} checkpoints, alignment slope {slope}")
    return 0


def _parse_grid(text):
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--c-grid must be comma-separated numbers: {text!r}") from None
    if not grid or any(not c > 0 for c in grid):
        raise ConfigError("--c-grid must be nonempty with every c > 0")
    return sorted(set(grid))


def cmd_sweep_c(args):
    config = _apply_overrides(load_config(args.config), args)
    grid = _parse_grid(args.c_grid)
    rows = []
    for c in grid:
        cfg = replace(config, schedule=replace(config.schedule, c=c)).validate()
        result = run_experiment(cfg)
        last = result.curve[-1]
        fa, fe = result.fits["align"], result.fits["eig"]
        rows.append([
            _fmt(c), str(last.n),
            _fmt(last.mean_alignment_loss), _fmt(last.stderr_align),
            _fmt(last.mean_eigenvalue_error), _fmt(last.stderr_eig),
            _fmt(fa.slope) if fa else "nan", _fmt(fa.r_squared) if fa else "nan",
            _fmt(fe.slope) if fe else "nan", _fmt(fe.r_squared) if fe else "nan",
        ])
        print(f"c={c:g}: final alignment loss {last.mean_alignment_loss:.4g}")
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sweep.csv"), "w", newline="") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return 0


def oracle_trial(d, seed):
    """Check the Jacobi invariants on one random symmetric matrix; returns worst ratios."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, (d, d))
    M = np.triu(A) + np.triu(A, 1).T
    spec = sym_eigen(M)
    lam, Q = spec.eigenvalues, spec.eigenvectors
    residual = max(
        np.linalg.norm(M @ Q[:, j] - lam[j] * Q[:, j]) / (1e-10 * (1 + abs(lam[j]))) for j in range(d)
    )
    recon = np.linalg.norm(Q @ np.diag(lam) @ Q.T - M) / (1e-9 * np.linalg.norm(M))
    ortho = np.max(np.abs(Q.T @ Q - np.eye(d))) / 1e-10
    tr = abs(trace(M) - lam.sum()) / (1e-10 * (1 + abs(trace(M))))
    return {"residual": residual, "reconstruction": recon, "orthonormality": ortho, "trace": tr}


def cmd_oracle_check(args):
    if args.d < 2 or args.trials < 1:
        raise UsageError("oracle-check needs --d >= 2 and --trials >= 1")
    failures = []
    worst = {}
    for t in range(args.trials):
        seed = args.seed + t
        ratios = oracle_trial(args.d, seed)
        for name, r in ratios.items():
            worst[name] = max(worst.get(name, 0.0), r)
            if not r <= 1.0:
                failures.append((seed, name, r))
    print(f"{'invariant':<16} {'worst/tol':>12}  status")
    for name, r in worst.items():
        print(f"{name:<16} {r:>12.3e}  {'PASS' if r <= 1.0 else 'FAIL'}")
    for seed, name, r in failures:
        print(f"FAIL seed={seed} {name} ratio={r:.3e}")
    return 1 if failures else 0


def cmd_gen_data(args):
    if args.preset is not None and args.spectrum is not None:
        raise UsageError("give either --preset or --spectrum, not both")
    if args.preset is None and args.spectrum is None:
        raise UsageError("one of --preset or --spectrum is required")
    if args.preset is not None and args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
    spectrum = args.preset if args.preset is not None else _parse_spectrum(args.spectrum)
    try:
        model = make_covariance(spectrum, args.seed)
        X = build_fixed_dataset(model, args.n, args.seed, literal=args.literal)
    except StreamPCAError as exc:
        raise ConfigError(str(exc)) from exc
    lam = model.eigenvalues ** 2 if args.literal else model.eigenvalues
    truth_path = args.truth or os.path.join(os.path.dirname(os.path.abspath(args.out)), "truth.json")
    write_csv(args.out, X)
    truth = {
        "eigenvalues": [float(x) for x in lam],
        "eigenvectors": [[float(x) for x in model.basis[:, j]] for j in range(model.d)],
        "n": args.n,
        "seed": args.seed,
        "spectrum": spectrum if isinstance(spectrum, str) else list(spectrum),
        "literal": args.literal,
    }
    with open(truth_path, "w") as fh:
        json.dump(truth, fh, indent=2)
        fh.write("\n")
    print(f"wrote {X.shape[0]}x{X.shape[1]} dataset to {args.out} and truth to {truth_path}")
    return 0


def _add_overrides(p):
    p.add_argument("--scheme", choices=("krasulina", "oja", "ccipca"))
    p.add_argument("--variant", choices=("smallest", "largest"))
    p.add_argument("--spectrum", help="preset name or comma-separated ascending eigenvalues")
    p.add_argument("--n-total", dest="n_total", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--source", choices=("gaussian", "fixed", "csv"))
    p.add_argument("--csv", dest="csv_path")
    p.add_argument("--amnesic-l", dest="amnesic_l", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n0", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="streampca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a replicated convergence experiment")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--c", type=float)
    _add_overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-c", help="repeat an experiment over a grid of rate constants")
    p.add_argument("config")
    p.add_argument("--c-grid", required=True, help="comma-separated rate constants")
    p.add_argument("--out", required=True)
    _add_overrides(p)
    p.set_defaults(func=cmd_sweep_c, c=None)

    p = sub.add_parser("oracle-check", help="verify the Jacobi eigensolver on random matrices")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gen-data", help="write a fixed dataset with an exactly known covariance")
    p.add_argument("--preset")
    p.add_argument("--spectrum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="sidecar path (default: truth.json next to --out)")
    p.add_argument("--literal", action="store_true", help="use lambda, not sqrt(lambda), as singular values")
    p.set_defaults(func=cmd_gen_data)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (ConfigError, DegenerateGap, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StreamPCAError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
