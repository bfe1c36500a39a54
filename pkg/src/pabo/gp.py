"""Exact Gaussian-process regression on standardized targets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist

SQUARED_EXPONENTIAL = "squared-exponential"
MATERN52 = "matern-5/2"

JITTER_START = 1e-10
JITTER_MAX = 1e-4
STD_FLOOR = 1e-12


class NotPSDError(np.linalg.LinAlgError):
    """Covariance could not be factorized, even with maximum jitter."""


@dataclass(frozen=True)
class KernelConfig:
    family: str = MATERN52
    length_scale: float | tuple[float, ...] = 0.2
    signal_variance: float = 1.0
    noise_variance: float = 1e-6

    def __post_init__(self):
        if self.family not in (SQUARED_EXPONENTIAL, MATERN52):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if np.any(np.asarray(self.length_scale, dtype=float) <= 0):
            raise ValueError("length_scale must be positive")
        if self.signal_variance <= 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")

    @property
    def min_length_scale(self) -> float:
        return float(np.min(self.length_scale))

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Cross-covariance matrix between the rows of ``a`` and ``b``."""
        ls = np.asarray(self.length_scale, dtype=float)
        a = np.atleast_2d(a) / ls
        b = np.atleast_2d(b) / ls
        sq = cdist(a, b, "sqeuclidean")
        if self.family == SQUARED_EXPONENTIAL:
            return self.signal_variance * np.exp(-0.5 * sq)
        r = np.sqrt(5.0 * sq)
        return self.signal_variance * (1.0 + r + r * r / 3.0) * np.exp(-r)


def default_kernel_grid(family: str = MATERN52) -> list[KernelConfig]:
    return [
        KernelConfig(family, ls, sv, nv)
        for ls, sv, nv in itertools.product(
            (0.05, 0.1, 0.2, 0.5, 1.0), (0.5, 1.0, 2.0), (1e-6, 1e-4, 1e-2)
        )
    ]


@dataclass(frozen=True, eq=False)
class GPModel:
    inputs: np.ndarray
    targets: np.ndarray  # standardized
    target_mean: float
    target_std: float
    kernel: KernelConfig
    chol: np.ndarray  # lower factor of K + (noise + jitter) I
    alpha: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


def _factorize(K: np.ndarray, max_jitter: float) -> tuple[np.ndarray, float]:
    try:
        return cholesky(K, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START
    eye = np.eye(K.shape[0])
    while jitter <= max_jitter * (1 + 1e-9):
        try:
            return cholesky(K + jitter * eye, lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10
    raise NotPSDError("covariance is not positive definite after maximum jitter")


def fit(
    inputs: Sequence[Sequence[float]],
    targets: Sequence[float],
    kernel: KernelConfig = KernelConfig(),
    max_jitter: float = JITTER_MAX,
) -> GPModel:
    """Condition a GP on ``(inputs, targets)``.

    Targets are standardized internally; :func:`posterior` undoes it.  Pass
    ``max_jitter=0`` to refuse any diagonal stabilization.
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("need at least one training point")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    ls = np.asarray(kernel.length_scale)
    if ls.ndim and ls.shape[0] != X.shape[1]:
        raise ValueError("per-dimension length scale does not match input dimension")
    mean = float(y.mean())
    std = max(float(y.std()), STD_FLOOR)
    ys = (y - mean) / std
    K = kernel(X, X) + kernel.noise_variance * np.eye(X.shape[0])
    L, jitter = _factorize(K, max_jitter)
    alpha = cho_solve((L, True), ys)
    return GPModel(X, ys, mean, std, kernel, L, alpha, jitter)


def posterior_standardized(model: GPModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Latent mean and variance at rows of ``X``, in standardized units."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise ValueError(f"query has dimension {X.shape[1]}, model expects {model.dim}")
    Ks = model.kernel(X, model.inputs)
    mu = Ks @ model.alpha
    v = solve_triangular(model.chol, Ks.T, lower=True)
    var = model.kernel.signal_variance - np.sum(v * v, axis=0)
    return mu, np.maximum(var, 0.0)


def posterior_batch(model: GPModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu, var = posterior_standardized(model, X)
    return mu * model.target_std + model.target_mean, var * model.target_std**2


def posterior(model: GPModel, x: Sequence[float]) -> tuple[float, float]:
    """Predictive mean and latent variance at a single point."""
    x = np.asarray(x, dtype=float).ravel()
    mu, var = posterior_batch(model, x[None, :])
    return float(mu[0]), float(var[0])


def log_marginal_likelihood(model: GPModel) -> float:
    n = model.targets.shape[0]
    return float(
        -0.5 * model.targets @ model.alpha
        - np.sum(np.log(np.diag(model.chol)))
        - 0.5 * n * math.log(2 * math.pi)
    )


def fit_kernel_hyperparams(
    inputs: Sequence[Sequence[float]],
    targets: Sequence[float],
    candidates: Sequence[KernelConfig] | None = None,
) -> KernelConfig:
    """Pick the candidate kernel with the highest log marginal likelihood.

    Candidates are scored on the covariance as given: one that only factorizes
    after jitter is treated as failed.  Ties go to the smaller length scale.
    """
    if len(targets) < 2:
        raise ValueError("need at least two points to fit kernel hyperparameters")
    if candidates is None:
        candidates = default_kernel_grid()
    best = None
    best_key = None
    for cand in candidates:
        try:
            model = fit(inputs, targets, cand, max_jitter=0.0)
        except NotPSDError:
            continue
        lml = log_marginal_likelihood(model)
        if not math.isfinite(lml):
            continue
        if best is None:
            best, best_key = cand, lml
            continue
        tol = 1e-12 * max(1.0, abs(best_key))
        if lml > best_key + tol or (
            abs(lml - best_key) <= tol and cand.min_length_scale < best.min_length_scale
        ):
            best, best_key = cand, lml
    if best is None:
        raise NotPSDError("every kernel candidate failed to factorize")
    return best


ARD_LENGTH_SCALES = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0)


def refine_length_scales(
    inputs: Sequence[Sequence[float]],
    targets: Sequence[float],
    start: KernelConfig,
    grid: Sequence[float] = ARD_LENGTH_SCALES,
    sweeps: int = 2,
) -> KernelConfig:
    """Coordinate-wise grid search over per-dimension length scales.

    Starts from ``start`` (typically the best shared-length-scale candidate)
    and, one input dimension at a time, keeps whichever grid value raises the
    log marginal likelihood.  Jitter-only candidates are rejected as in
    :func:`fit_kernel_hyperparams`.
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    dim = X.shape[1]
    ls = np.broadcast_to(np.asarray(start.length_scale, dtype=float), (dim,)).copy()

    def score(scales):
        cand = KernelConfig(start.family, tuple(scales), start.signal_variance, start.noise_variance)
        try:
            return log_marginal_likelihood(fit(X, targets, cand, max_jitter=0.0))
        except NotPSDError:
            return -math.inf

    best = score(ls)
    for _ in range(sweeps):
        improved = False
        for d in range(dim):
            for value in grid:
                if value == ls[d]:
                    continue
                trial = ls.copy()
                trial[d] = value
                s = score(trial)
                if s > best + 1e-12 * max(1.0, abs(best)):
                    best, ls, improved = s, trial, True
        if not improved:
            break
    return KernelConfig(start.family, tuple(float(v) for v in ls), start.signal_variance, start.noise_variance)
