"""Per-path functionals of the local time field.

Square-integral functionals (modulus, bracket, u_hat_l2) are invariant under
a global sign flip of the path; psi, the covariation and the reconstruction
integrand are odd under it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from . import _fast
from .local_time import LocalTimeField, diagonal_local_time_series
from .paths import PathGrid


@dataclass
class ReplicaRecord:
    """All functionals computed for one replica at one h (NaN when disabled)."""

    replica_index: int
    g_modulus: float = math.nan
    alpha_field: float = math.nan
    alpha_diag: float = math.nan
    alpha_tri: float = math.nan
    bracket: float = math.nan
    covariation: float = math.nan
    u_hat_l2: float = math.nan
    reconstruction: float = math.nan
    z_statistic: float = math.nan


def snap_shift(h: float, bin_width: float) -> int:
    """Shift in whole bins used by the modulus; h is snapped to s * bin_width."""
    return int(round(h / bin_width))


def g_modulus(field: LocalTimeField, h: float) -> float:
    """Riemann sum for the squared-increment integral of the field at lag h.

    h is snapped to the nearest whole number of bins before differencing
    (snap error <= bin_width / 2, small against h by the 4-bin guard).
    """
    w = field.bin_width
    if h != 0.0 and h < 4 * w:
        raise ValueError(f"h = {h} violates the resolution guard h >= 4 * bin_width = {4 * w}")
    if field.padding < h:
        raise ValueError(f"field padding {field.padding} is smaller than h = {h}")
    s = snap_shift(h, w)
    if s == 0:
        return 0.0
    v = field.values
    ext = np.concatenate([np.zeros(s), v, np.zeros(s)])
    d = ext[s:] - ext[:-s]
    return w * float(np.dot(d, d))


def alpha_from_field(field: LocalTimeField) -> float:
    """Riemann sum for the squared field, the self-intersection local time."""
    v = field.values
    return field.bin_width * float(np.dot(v, v))


def alpha_diagonal(path: PathGrid, bin_width: float) -> float:
    """Self-intersection local time from the running diagonal series.

    alpha_t equals twice the time integral of r -> L_r(B_r) (chain rule on
    the squared field), so the left-endpoint Riemann sum carries a factor 2.
    """
    series = diagonal_local_time_series(path, bin_width)
    return 2.0 * path.dt * float(np.sum(series[: path.n_steps]))


def alpha_triangular(path: PathGrid, h: float) -> float:
    """Self-intersection local time from the triangular-kernel pair sum.

    The symmetrized double Riemann sum of [(h - |B_m - B_k|)+]^2 / h^3
    converges to (2/3) * alpha_t (the kernel integrates to (2/3) h^3), so the
    ordered pair sum is scaled by 3.
    """
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    sorted_vals = np.sort(path.values[: path.n_steps])
    pair_sum = _fast.triangular_pair_sum(sorted_vals, h)
    return 3.0 * path.dt * path.dt * pair_sum / h ** 3


def psi(path: PathGrid, h: float, step_index: int) -> float:
    """Signed occupation asymmetry of the h-window below vs above B_m.

    dt * (#{k < m : 0 <= B_m - B_k <= h} - #{k < m : 0 <= B_k - B_m <= h});
    both windows closed, so a tie B_k = B_m cancels.
    """
    n = path.n_steps
    if not 0 <= step_index <= n:
        raise IndexError(f"step_index {step_index} out of range 0..{n}")
    past = path.values[:step_index]
    d = path.values[step_index] - past
    below = int(np.count_nonzero((d >= 0.0) & (d <= h)))
    above = int(np.count_nonzero((d <= 0.0) & (d >= -h)))
    return path.dt * (below - above)


def psi_series(path: PathGrid, h: float) -> np.ndarray:
    """psi at every index 0..n_steps in one Fenwick pass over past values."""
    values = path.values
    n = path.n_steps
    universe = np.sort(values[:n])
    q_low = np.searchsorted(universe, values - h, side="left").astype(np.int64)
    q_mid_left = np.searchsorted(universe, values, side="left").astype(np.int64)
    q_mid_right = np.searchsorted(universe, values, side="right").astype(np.int64)
    q_high = np.searchsorted(universe, values + h, side="right").astype(np.int64)
    ins_pos = (np.searchsorted(universe, values[:n], side="left") + 1).astype(np.int64)
    diffs = _fast.fenwick_window_diffs(q_low, q_mid_left, q_mid_right, q_high, ins_pos, n)
    return diffs * path.dt


def bracket(path: PathGrid, h: float) -> float:
    """h^-3 * dt * sum of psi^2 over left endpoints, the martingale bracket."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    p = psi_series(path, h)[: path.n_steps]
    return float(np.dot(p, p)) * path.dt / h ** 3


def bracket_naive(path: PathGrid, h: float) -> float:
    """O(N^2) reference evaluation of the bracket (test cross-check)."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    acc = 0.0
    for m in range(path.n_steps):
        pm = psi(path, h, m)
        acc += pm * pm
    return acc * path.dt / h ** 3


def covariation(path: PathGrid, h: float) -> float:
    """h^-3/2 * dt * sum of psi over left endpoints, the covariation with B."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    p = psi_series(path, h)[: path.n_steps]
    return float(np.sum(p)) * path.dt / h ** 1.5


def u_hat(path: PathGrid, t: float, h: float, step_index: int) -> float:
    """Smooth component of the representation integrand at r = step_index * dt.

    4 * dt * sum over past samples of
        2*Phi(z/sqrt(s)) - Phi((z+h)/sqrt(s)) - Phi((z-h)/sqrt(s)),
    z = B_r - B_u, s = t - r; the closed form of the heat-kernel lag integral.
    Positive when the recent past lies below the current point.
    """
    r = step_index * path.dt
    if step_index < 0 or r >= t:
        raise ValueError(f"step_index {step_index} must satisfy 0 <= step_index * dt < t")
    if step_index == 0:
        return 0.0
    s = t - r
    rs = 1.0 / math.sqrt(s)
    z = path.values[step_index] - path.values[:step_index]
    a = 2.0 * ndtr(z * rs) - ndtr((z + h) * rs) - ndtr((z - h) * rs)
    return 4.0 * path.dt * float(a.sum())


def u_hat_series(path: PathGrid, t: float, h: float, stride: int = 1) -> np.ndarray:
    """u_hat at m = 0, stride, 2*stride, ... with m*dt < t (fast kernel)."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return _fast.uhat_strided_series(path.values, t, h, path.dt, stride)


def u_hat_l2(path: PathGrid, t: float, h: float, r_stride: int = 1) -> float:
    """Riemann sum for the time integral of u_hat^2 over [0, t).

    The final grid cell at r = t is excluded (the heat-kernel variance
    vanishes there). r_stride > 1 coarsens the time quadrature only.
    """
    u = u_hat_series(path, t, h, r_stride)
    return float(np.dot(u, u)) * path.dt * r_stride


def clark_ocone_reconstruct(path: PathGrid, t: float, h: float, mean_g: float,
                            uhat_stride: int = 1) -> float:
    """Mean plus forward Ito sum of the full integrand against the increments.

    The integrand is u_hat(r) - 4*psi(r): the window-count component enters
    with a minus sign (an upward move away from past occupation lowers the
    modulus). u_hat is held constant across each stride block.
    """
    n = path.n_steps
    u_blocks = u_hat_series(path, t, h, uhat_stride)
    u_full = np.repeat(u_blocks, uhat_stride)[:n]
    p = psi_series(path, h)[:n]
    integrand = u_full - 4.0 * p
    increments = np.diff(path.values)
    return mean_g + float(np.dot(integrand, increments))


def triangular_kernel_constants(h: float) -> tuple[float, float]:
    """Quadrature of the two triangular-kernel normalizations.

    Returns (integral of [(h-|x|)+]^2 dx / h^3, integral of (h-|x|)+ dx / h^2).
    """
    sq, _ = quad(lambda x: (h - abs(x)) ** 2, -h, h, points=[0.0], limit=200)
    lin, _ = quad(lambda x: (h - abs(x)), -h, h, points=[0.0], limit=200)
    return sq / h ** 3, lin / h ** 2
