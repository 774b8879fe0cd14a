"""Experiment configuration."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

ALPHA_MODES = ("field", "diagonal", "triangular", "all")
CENTERINGS = ("empirical", "four_t_h")
Z_ALPHAS = ("field", "diagonal", "triangular")

SEED_SCHEME = "splitmix64-v1"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Full description of one replica sweep.

    t: terminal time (> 0).
    n_steps: number of uniform time steps (>= 2).
    h_grid: spatial increments h, strictly decreasing, each > 0.
    n_replicas: number of independent Brownian replicas (>= 1).
    bin_width: occupation bin width w; None selects max(min(h)/8, sqrt(dt)).
    master_seed: 64-bit unsigned master seed.
    alpha_mode: which self-intersection estimators to compute per replica
        (alpha_field is always computed; "diagonal"/"triangular" add that
        estimator, "all" adds both).
    centering: how z-statistics are centered ("empirical" mean or "four_t_h").
    z_alpha: which alpha estimate standardizes the z-statistic.
    compute_bracket: compute the martingale bracket and covariation per h.
    uhat_stride: 0 disables the smooth-integrand series (and reconstruction);
        k >= 1 evaluates it every k-th step inside the sweep.
    compute_reconstruction: compute the stochastic-integral reconstruction
        (requires uhat_stride >= 1).
    """

    t: float
    n_steps: int
    h_grid: tuple[float, ...]
    n_replicas: int
    master_seed: int
    bin_width: float | None = None
    alpha_mode: str = "all"
    centering: str = "empirical"
    z_alpha: str = "field"
    compute_bracket: bool = True
    uhat_stride: int = 0
    compute_reconstruction: bool = False

    def __post_init__(self):
        object.__setattr__(self, "h_grid", tuple(float(h) for h in self.h_grid))
        if not self.t > 0:
            raise ConfigError(f"t must be > 0, got {self.t}")
        if self.n_steps < 2:
            raise ConfigError(f"n_steps must be >= 2, got {self.n_steps}")
        if self.n_replicas < 1:
            raise ConfigError(f"n_replicas must be >= 1, got {self.n_replicas}")
        if not (0 <= self.master_seed < 2 ** 64):
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if not self.h_grid:
            raise ConfigError("h_grid must be non-empty")
        if any(h <= 0 for h in self.h_grid):
            raise ConfigError(f"every h must be > 0, got {self.h_grid}")
        if any(a <= b for a, b in zip(self.h_grid, self.h_grid[1:])):
            raise ConfigError(f"h_grid must be strictly decreasing, got {self.h_grid}")
        if self.t <= max(self.h_grid):
            raise ConfigError(f"t must exceed max(h_grid): t={self.t}, max h={max(self.h_grid)}")
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigError(f"alpha_mode must be one of {ALPHA_MODES}, got {self.alpha_mode!r}")
        if self.centering not in CENTERINGS:
            raise ConfigError(f"centering must be one of {CENTERINGS}, got {self.centering!r}")
        if self.z_alpha not in Z_ALPHAS:
            raise ConfigError(f"z_alpha must be one of {Z_ALPHAS}, got {self.z_alpha!r}")
        if self.uhat_stride < 0:
            raise ConfigError(f"uhat_stride must be >= 0, got {self.uhat_stride}")
        if self.z_alpha == "diagonal" and self.alpha_mode not in ("diagonal", "all"):
            raise ConfigError("z_alpha=diagonal requires alpha_mode diagonal or all")
        if self.z_alpha == "triangular" and self.alpha_mode not in ("triangular", "all"):
            raise ConfigError("z_alpha=triangular requires alpha_mode triangular or all")
        if self.compute_reconstruction and self.uhat_stride < 1:
            raise ConfigError("compute_reconstruction requires uhat_stride >= 1")
        if self.bin_width is not None:
            if self.bin_width <= 0:
                raise ConfigError(f"bin_width must be > 0, got {self.bin_width}")
        w = self.resolved_bin_width()
        h_min = min(self.h_grid)
        if h_min < 4 * w:
            raise ConfigError(
                f"spatial resolution guard violated: min h = {h_min} < 4 * bin_width = {4 * w}")
        if w < math.sqrt(self.dt) / 4:
            warnings.warn(
                f"bin_width {w} is below sqrt(dt)/4 = {math.sqrt(self.dt) / 4:.3g}; "
                "occupation counts will be noisy", stacklevel=2)

    @property
    def dt(self) -> float:
        return self.t / self.n_steps

    def resolved_bin_width(self) -> float:
        if self.bin_width is not None:
            return self.bin_width
        return max(min(self.h_grid) / 8.0, math.sqrt(self.dt))

    def padding(self) -> float:
        """Spatial padding so shifted-field reads never truncate."""
        return max(self.h_grid) + self.resolved_bin_width()

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)
