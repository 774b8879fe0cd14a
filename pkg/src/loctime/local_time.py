"""Occupation-density estimation of Brownian local time.

The field estimator bins the sampled path with a left-endpoint time rule:
step k's dt is assigned to the bin containing B_{k dt}, so
bin_width * sum(values) = t holds exactly by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fast
from .paths import PathGrid


@dataclass(frozen=True)
class LocalTimeField:
    """Binned estimate of x -> L_t(x) on a uniform spatial grid."""

    x_min: float
    bin_width: float
    values: np.ndarray
    t: float
    padding: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    def bin_index(self, x: float) -> int:
        return int(np.floor((x - self.x_min) / self.bin_width))


def _field_from_samples(samples: np.ndarray, dt: float, t: float,
                        bin_width: float, padding: float) -> LocalTimeField:
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    if padding < 0:
        raise ValueError(f"padding must be >= 0, got {padding}")
    if samples.size == 0:
        raise ValueError("path has no time steps")
    x_min = float(samples.min()) - padding
    x_max = float(samples.max()) + padding
    n_bins = int(np.ceil((x_max - x_min) / bin_width)) + 1
    idx = np.floor((samples - x_min) / bin_width).astype(np.int64)
    counts = np.bincount(idx, minlength=n_bins)
    values = counts * (dt / bin_width)
    return LocalTimeField(x_min=x_min, bin_width=bin_width, values=values,
                          t=t, padding=padding)


def occupation_field(path: PathGrid, bin_width: float, padding: float) -> LocalTimeField:
    """Bin the path's occupation time into a local-time field.

    values[j] = dt * #{k < n_steps : B_{k dt} in bin j} / bin_width (the
    left-endpoint time rule, so bin_width * sum(values) = t exactly). The
    grid spans [min(path) - padding, max(path) + padding].
    """
    return _field_from_samples(path.values[:-1], path.dt, path.t, bin_width, padding)


def field_at(field: LocalTimeField, x: float) -> float:
    """Piecewise-constant read of the field; 0 outside the grid."""
    j = field.bin_index(x)
    if j < 0 or j >= field.n_bins:
        return 0.0
    return float(field.values[j])


def diagonal_local_time_series(path: PathGrid, bin_width: float) -> np.ndarray:
    """Running estimate of r -> L_r(B_r) on the time grid.

    Entry k is dt * (# prior steps in the bin of B_{k dt}) / bin_width,
    accumulated in one streaming pass. Entry 0 is 0.
    """
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    values = path.values
    x_min = float(values.min())
    idx = np.floor((values - x_min) / bin_width).astype(np.int64)
    counts = _fast.diag_counts(idx, int(idx.max()) + 1)
    return counts * (path.dt / bin_width)
