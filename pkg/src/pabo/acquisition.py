"""Expected improvement over the unevaluated part of a grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import ndtr

from .gp import GPModel, posterior_batch
from .space import HPVector, SearchSpace, numeric_grid

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class SpaceExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class AcquisitionResult:
    best_point: HPVector
    best_value: float
    values: dict[HPVector, float] | None = None


def expected_improvement(mean, variance, best_observed):
    """Closed-form EI for minimization; vectorizes over array arguments."""
    mean = np.asarray(mean, dtype=float)
    sigma = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    gap = best_observed - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, gap / np.where(sigma > 0, sigma, 1.0), 0.0)
    ei = np.where(
        sigma > 0,
        gap * ndtr(z) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * z * z),
        np.maximum(gap, 0.0),
    )
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def select_next(
    model: GPModel,
    space: SearchSpace,
    evaluated: Iterable[HPVector],
    best_observed: float,
    grid: np.ndarray | None = None,
    keep_values: bool = False,
) -> AcquisitionResult:
    """Scan every unevaluated grid point and return the EI maximizer.

    ``grid`` may carry precomputed :func:`numeric_grid` coordinates.  Ties go
    to the lowest enumeration index.
    """
    if grid is None:
        grid = numeric_grid(space)
    mask = np.ones(space.cardinality, dtype=bool)
    for hp in evaluated:
        mask[space.flat_index(hp)] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        raise SpaceExhausted("every grid point has been evaluated")
    mu, var = posterior_batch(model, grid[candidates])
    ei = expected_improvement(mu, var, best_observed)
    ei = np.atleast_1d(ei)
    j = int(np.argmax(ei))  # first occurrence = lowest index
    best = space.from_flat(int(candidates[j]))
    values = None
    if keep_values:
        values = {space.from_flat(int(k)): float(v) for k, v in zip(candidates, ei)}
    return AcquisitionResult(best, float(ei[j]), values)
