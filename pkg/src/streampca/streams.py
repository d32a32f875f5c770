"""Ground-truth covariance models and the sample sources fed to the estimators."""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyStream,
    InsufficientSamples,
    InvalidSpectrum,
    ParseError,
    StreamIOError,
)

PRESETS = {
    # top eigenvalue 1.0 above a 9-fold 0.9 plateau, eigen-gap 0.1
    "paper4": (0.9,) * 9 + (1.0,),
    # simple smallest eigenvalue 0.5 below a 9-fold 1.0 plateau, gap 0.5
    "smallest-id": (0.5,) + (1.0,) * 9,
}


def resolve_spectrum(spectrum):
    """Map a preset name or an explicit list to an ascending float tuple."""
    if isinstance(spectrum, str):
        try:
            return PRESETS[spectrum]
        except KeyError:
            raise InvalidSpectrum(
                f"unknown spectrum preset {spectrum!r}; choose from {sorted(PRESETS)}"
            ) from None
    return tuple(float(x) for x in spectrum)


def _check_spectrum(eigenvalues):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidSpectrum("spectrum must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(lam)):
        raise InvalidSpectrum("spectrum has non-finite entries")
    if np.any(lam < 0):
        raise InvalidSpectrum("eigenvalues must be nonnegative")
    if np.any(np.diff(lam) < 0):
        raise InvalidSpectrum("eigenvalues must be sorted ascending")
    return lam


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance ``sum_j lambda_j theta_j theta_j^T`` with a known eigenbasis.

    ``basis[:, j]`` is the eigenvector for ``eigenvalues[j]``; eigenvalues
    are ascending so ``basis[:, 0]`` is the smallest and ``basis[:, -1]`` the
    top direction.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    sigma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = _check_spectrum(self.eigenvalues)
        basis = np.asarray(self.basis, dtype=float)
        d = lam.size
        if basis.shape != (d, d):
            raise InvalidSpectrum(f"basis must be {d}x{d}, got {basis.shape}")
        if np.max(np.abs(basis.T @ basis - np.eye(d))) > 1e-10:
            raise InvalidSpectrum("basis is not orthonormal")
        # lambda_1 I + sum (lambda_j - lambda_1) theta_j theta_j^T: exact for isotropic spectra
        S = lam[0] * np.eye(d) + (basis * (lam - lam[0])) @ basis.T
        S = np.triu(S) + np.triu(S, 1).T
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "sigma", S)

    @property
    def d(self):
        return self.eigenvalues.size

    @property
    def gap_min(self):
        """``lambda_2 - lambda_1``; 0 when d == 1."""
        return float(self.eigenvalues[1] - self.eigenvalues[0]) if self.d > 1 else 0.0

    @property
    def gap_max(self):
        return float(self.eigenvalues[-1] - self.eigenvalues[-2]) if self.d > 1 else 0.0

    def target(self, which):
        """(eigenvalue, eigenvector, gap) for ``which`` in {"smallest", "largest"}."""
        if which == "smallest":
            return float(self.eigenvalues[0]), self.basis[:, 0], self.gap_min
        if which == "largest":
            return float(self.eigenvalues[-1]), self.basis[:, -1], self.gap_max
        raise ValueError(f"which must be 'smallest' or 'largest', got {which!r}")


def random_orthogonal(d, rng):
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix with R's diagonal made positive."""
    if d < 1:
        raise ValueError("d must be >= 1")
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def make_covariance(eigenvalues, seed):
    lam = _check_spectrum(resolve_spectrum(eigenvalues))
    rng = np.random.default_rng(seed)
    return CovarianceModel(lam, random_orthogonal(lam.size, rng))


def sample_gaussian(model, rng):
    """One draw ``X = Theta diag(sqrt(lambda)) z`` with ``z ~ N(0, I)``."""
    z = rng.standard_normal(model.d)
    return model.basis @ (np.sqrt(model.eigenvalues) * z)


def gaussian_block(model, rng, n):
    """``n`` draws as rows of an ``n x d`` array.

    Consumes the generator exactly like ``n`` calls to :func:`sample_gaussian`;
    the rows are accumulated column by column so the result does not depend
    on BLAS blocking.
    """
    z = rng.standard_normal((n, model.d)) * np.sqrt(model.eigenvalues)
    X = np.zeros((n, model.d))
    for j in range(model.d):
        X += z[:, j, None] * model.basis[:, j]
    return X


def build_fixed_dataset(model, n, seed, literal=False):
    """Dataset ``X = sqrt(n) U diag(s) Q^T`` whose scatter matrix ``X^T X / n`` is known exactly.

    ``U`` is an ``n x d`` matrix with orthonormal columns drawn from ``seed``
    and ``Q`` is the model's (random orthogonal) basis, so ``X^T X / n``
    equals ``model.sigma``.  By default the singular values are
    ``s = sqrt(lambda)``; ``literal=True`` uses ``s = lambda`` instead, which
    squares the covariance eigenvalues.
    """
    d = model.d
    if n < d:
        raise InsufficientSamples(f"need n >= d = {d}, got n = {n}")
    rng = np.random.default_rng(seed)
    U, R = np.linalg.qr(rng.standard_normal((n, d)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    U = U * signs
    s = model.eigenvalues if literal else np.sqrt(model.eigenvalues)
    return np.sqrt(n) * (U * s) @ model.basis.T


class SampleStream:
    """An ordered source of ``d``-vectors, finite when ``length`` is known."""

    def __init__(self, source, d, length=None):
        self._source = source
        self.d = d
        self.length = length

    @classmethod
    def from_array(cls, X):
        X = np.asarray(X, dtype=float)
        return cls(X, X.shape[1], X.shape[0])

    @classmethod
    def gaussian(cls, model, rng):
        def draws():
            while True:
                yield sample_gaussian(model, rng)

        return cls(draws(), model.d)

    def __iter__(self):
        for x in self._source:
            yield np.asarray(x, dtype=float)

    def __len__(self):
        if self.length is None:
            raise TypeError("unbounded stream has no length")
        return self.length

    def to_array(self):
        if self.length is None:
            raise TypeError("cannot materialize an unbounded stream")
        return np.array(list(self), dtype=float).reshape(self.length, self.d)


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_csv(path):
    """Parse a sample CSV into an ``n x d`` array (header row optional)."""
    if not os.path.isfile(path):
        raise StreamIOError(f"no such file: {path}")
    rows = []
    width = None
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not tok.strip() for tok in row):
                    continue
                if lineno == 1 and not all(_is_number(tok) for tok in row):
                    width = len(row)
                    continue
                if width is None:
                    width = len(row)
                if len(row) != width:
                    raise ParseError(
                        f"row {lineno}: expected {width} fields, got {len(row)}", row=lineno
                    )
                try:
                    values = [float(tok) for tok in row]
                except ValueError:
                    raise ParseError(f"row {lineno}: non-numeric field", row=lineno) from None
                if not all(np.isfinite(values)):
                    raise ParseError(f"row {lineno}: non-finite field", row=lineno)
                rows.append(values)
    except OSError as exc:
        raise StreamIOError(str(exc)) from exc
    if not rows:
        raise EmptyStream(f"{path} contains no samples")
    return np.array(rows, dtype=float)


def stream_from_csv(path):
    return SampleStream.from_array(read_csv(path))


def format_float(x):
    # 17 significant digits round-trips every float64
    return f"{x:.17g}"


def write_csv(path, X, header=True):
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(f"x{j}" for j in range(X.shape[1])) + "\n")
        for row in X:
            fh.write(",".join(format_float(v) for v in row) + "\n")
