"""Reproducible Brownian path generation.

Per-replica generators are seeded by a counter-based hash of
(master_seed, replica_index), so the set of paths produced by a sweep is
independent of worker count and scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x &= _MASK64
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_replica_seed(master_seed: int, replica_index: int) -> int:
    """Derive the 64-bit seed of one replica.

    Pure function of its arguments; injective in replica_index for a fixed
    master seed (affine step followed by a 64-bit bijection), so replicas may
    be generated in any order on any number of workers.
    """
    if replica_index < 0:
        raise ValueError(f"replica_index must be >= 0, got {replica_index}")
    if not (0 <= master_seed < 2 ** 64):
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    return _splitmix64((master_seed + (replica_index + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class PathGrid:
    """A Brownian path sampled on the uniform grid k*dt, k = 0..n_steps."""

    dt: float
    values: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.shape[0] < 3:
            raise ValueError("path must hold at least n_steps + 1 = 3 values")
        if v[0] != 0.0:
            raise ValueError("path must start at 0")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0] - 1


def simulate_path(config: SimConfig, replica_index: int) -> PathGrid:
    """Generate the replica's path from i.i.d. N(0, dt) increments."""
    if config.n_steps < 2:
        raise ValueError(f"n_steps must be >= 2, got {config.n_steps}")
    if config.t <= 0:
        raise ValueError(f"t must be > 0, got {config.t}")
    seed = derive_replica_seed(config.master_seed, replica_index)
    rng = np.random.Generator(np.random.PCG64(seed))
    dt = config.dt
    increments = rng.standard_normal(config.n_steps) * np.sqrt(dt)
    values = np.empty(config.n_steps + 1)
    values[0] = 0.0
    np.cumsum(increments, out=values[1:])
    return PathGrid(dt=dt, values=values, t=config.t)
