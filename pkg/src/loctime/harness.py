"""Replica sweeps, standardization, and aggregate verification quantities.

One path serves every h (common random numbers), replicas run in parallel
across processes, and aggregation is a deterministic reduce in replica-index
order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SEED_SCHEME, SimConfig
from .functionals import (ReplicaRecord, alpha_diagonal, alpha_from_field,
                          alpha_triangular, g_modulus, psi_series, u_hat_series)
from .local_time import occupation_field
from .paths import simulate_path
from .stats import ks_distance, least_squares_fit, mean_stderr

THREADS_ENV = "LOCTIME_THREADS"


class SweepError(RuntimeError):
    """Sweep-level failure (e.g. too many degenerate replicas)."""


@dataclass
class HAggregates:
    """Aggregates across replicas at one h."""

    mean_g: float = math.nan
    stderr_g: float = math.nan
    var_z: float = math.nan
    ks_distance: float = math.nan
    mean_bracket: float = math.nan
    stderr_bracket: float = math.nan
    mean_cov_sq: float = math.nan
    stderr_cov_sq: float = math.nan
    mean_uhat_l2: float = math.nan
    stderr_uhat_l2: float = math.nan
    mean_alpha_field: float = math.nan
    stderr_alpha_field: float = math.nan
    mean_alpha_diag: float = math.nan
    stderr_alpha_diag: float = math.nan
    mean_alpha_tri: float = math.nan
    stderr_alpha_tri: float = math.nan
    recon_correlation: float = math.nan


@dataclass
class FittedSlopes:
    slope_4t: float = math.nan
    uhat_slope: float = math.nan


@dataclass
class SweepResult:
    per_h: dict[float, HAggregates]
    fitted: FittedSlopes
    config_echo: SimConfig
    seeds_manifest: dict
    records: dict[float, list[ReplicaRecord]]
    exclusion_count: int = 0


def standardized_statistic(g: float, mean_g: float, alpha: float, h: float) -> float:
    """Center, rescale by h^(3/2) and the mixture scale 8*sqrt(alpha/3).

    Dividing by the per-path alpha estimate conditions on the path, turning
    the mixed limit into a pivotal standard normal.
    """
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return (g - mean_g) / h ** 1.5 / (8.0 * math.sqrt(alpha / 3.0))


def _worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {env}")
        return n
    return min(os.cpu_count() or 1, 4)


def _replica_raw(config: SimConfig, replica_index: int) -> dict:
    """All pass-1 per-replica quantities (everything except centering)."""
    path = simulate_path(config, replica_index)
    w = config.resolved_bin_width()
    fld = occupation_field(path, w, config.padding())
    raw = {"replica_index": replica_index,
           "alpha_field": alpha_from_field(fld),
           "alpha_diag": math.nan, "alpha_tri": {}, "g": {}, "bracket": {},
           "covariation": {}, "u_hat_l2": {}, "ito": {}}
    if config.alpha_mode in ("diagonal", "all"):
        raw["alpha_diag"] = alpha_diagonal(path, w)
    n = path.n_steps
    dt = path.dt
    for h in config.h_grid:
        raw["g"][h] = g_modulus(fld, h)
        if config.alpha_mode in ("triangular", "all"):
            raw["alpha_tri"][h] = alpha_triangular(path, h)
        if config.compute_bracket or config.compute_reconstruction:
            p = psi_series(path, h)[:n]
            if config.compute_bracket:
                raw["bracket"][h] = float(np.dot(p, p)) * dt / h ** 3
                raw["covariation"][h] = float(np.sum(p)) * dt / h ** 1.5
        if config.uhat_stride >= 1:
            stride = config.uhat_stride
            u_blocks = u_hat_series(path, config.t, h, stride)
            raw["u_hat_l2"][h] = float(np.dot(u_blocks, u_blocks)) * dt * stride
            if config.compute_reconstruction:
                u_full = np.repeat(u_blocks, stride)[:n]
                increments = np.diff(path.values)
                raw["ito"][h] = float(np.dot(u_full - 4.0 * p, increments))
    return raw


def _worker_chunk(args) -> list[dict]:
    config, indices = args
    return [_replica_raw(config, i) for i in indices]


def run_sweep(config: SimConfig) -> SweepResult:
    """Run all replicas, then center, standardize and aggregate per h."""
    n_workers = _worker_count()
    indices = list(range(config.n_replicas))
    if n_workers == 1 or config.n_replicas == 1:
        raws = [_replica_raw(config, i) for i in indices]
    else:
        chunks = [(config, indices[k::n_workers]) for k in range(n_workers)]
        raws_nested: list[list[dict]] = []
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            raws_nested = list(pool.map(_worker_chunk, chunks))
        raws = [r for chunk in raws_nested for r in chunk]
        raws.sort(key=lambda r: r["replica_index"])
    return _aggregate(config, raws)


def _aggregate(config: SimConfig, raws: list[dict]) -> SweepResult:
    raws = sorted(raws, key=lambda r: r["replica_index"])
    n_rep = len(raws)
    per_h: dict[float, HAggregates] = {}
    records: dict[float, list[ReplicaRecord]] = {}
    exclusions = 0
    mean_gs = []
    mean_u2s = []

    alpha_key = {"field": "alpha_field", "diagonal": "alpha_diag",
                 "triangular": "alpha_tri"}[config.z_alpha]
    for h in config.h_grid:
        g = np.array([r["g"][h] for r in raws])
        mean_g, stderr_g = (float(g.mean()), 0.0) if n_rep == 1 else mean_stderr(g)
        center = mean_g if config.centering == "empirical" else 4.0 * config.t * h
        agg = HAggregates(mean_g=mean_g, stderr_g=stderr_g)
        recs = []
        zs = []
        for r in raws:
            rec = ReplicaRecord(replica_index=r["replica_index"],
                                g_modulus=r["g"][h],
                                alpha_field=r["alpha_field"],
                                alpha_diag=r["alpha_diag"],
                                alpha_tri=r["alpha_tri"].get(h, math.nan),
                                bracket=r["bracket"].get(h, math.nan),
                                covariation=r["covariation"].get(h, math.nan),
                                u_hat_l2=r["u_hat_l2"].get(h, math.nan))
            alpha_z = r[alpha_key] if alpha_key != "alpha_tri" else r["alpha_tri"].get(h, math.nan)
            if not alpha_z > 0:
                exclusions += 1
            else:
                rec.z_statistic = standardized_statistic(rec.g_modulus, center, alpha_z, h)
                zs.append(rec.z_statistic)
            if h in r["ito"]:
                rec.reconstruction = mean_g + r["ito"][h]
            recs.append(rec)
        z = np.array(zs)
        if z.size >= 1:
            agg.ks_distance = ks_distance(z)
            agg.var_z = float(z.var(ddof=1)) if z.size >= 2 else 0.0
        for name, key in (("bracket", "bracket"), ("uhat_l2", "u_hat_l2")):
            vals = np.array([r[key].get(h, math.nan) for r in raws])
            if not np.isnan(vals).any():
                m, s = (float(vals.mean()), 0.0) if n_rep == 1 else mean_stderr(vals)
                setattr(agg, f"mean_{name}", m)
                setattr(agg, f"stderr_{name}", s)
        cov = np.array([r["covariation"].get(h, math.nan) for r in raws])
        if not np.isnan(cov).any():
            sq = cov ** 2
            m, s = (float(sq.mean()), 0.0) if n_rep == 1 else mean_stderr(sq)
            agg.mean_cov_sq, agg.stderr_cov_sq = m, s
        af = np.array([r["alpha_field"] for r in raws])
        agg.mean_alpha_field, agg.stderr_alpha_field = \
            (float(af.mean()), 0.0) if n_rep == 1 else mean_stderr(af)
        ad = np.array([r["alpha_diag"] for r in raws])
        if not np.isnan(ad).any():
            agg.mean_alpha_diag, agg.stderr_alpha_diag = \
                (float(ad.mean()), 0.0) if n_rep == 1 else mean_stderr(ad)
        at = np.array([r["alpha_tri"].get(h, math.nan) for r in raws])
        if not np.isnan(at).any():
            agg.mean_alpha_tri, agg.stderr_alpha_tri = \
                (float(at.mean()), 0.0) if n_rep == 1 else mean_stderr(at)
        if config.compute_reconstruction and n_rep >= 2:
            ito = np.array([r["ito"][h] for r in raws])
            if ito.std() > 0 and g.std() > 0:
                agg.recon_correlation = float(np.corrcoef(g, ito)[0, 1])
        per_h[h] = agg
        records[h] = recs
        mean_gs.append(mean_g)
        mean_u2s.append(agg.mean_uhat_l2)

    if exclusions > 0.001 * n_rep * len(config.h_grid):
        raise SweepError(f"{exclusions} degenerate replicas excluded; configuration bug suspected")

    fitted = FittedSlopes()
    hs = np.array(config.h_grid)
    if hs.size >= 2:
        fitted.slope_4t = float(least_squares_fit(hs, np.array(mean_gs), degree=2)[0])
        u2 = np.array(mean_u2s)
        if not np.isnan(u2).any() and (u2 > 0).all():
            fitted.uhat_slope = float(
                least_squares_fit(np.log(hs), np.log(u2), degree=1, intercept=True)[1])
    return SweepResult(per_h=per_h, fitted=fitted, config_echo=config,
                       seeds_manifest={"master_seed": config.master_seed,
                                       "scheme": SEED_SCHEME},
                       records=records, exclusion_count=exclusions)


@dataclass
class KnightConditionRow:
    h: float
    mean_abs_bracket_dev: float
    stderr_abs_bracket_dev: float
    bracket_dev_quantiles: tuple[float, float, float]
    mean_cov_sq: float
    stderr_cov_sq: float
    cov_sq_quantiles: tuple[float, float, float]


@dataclass
class KnightReport:
    rows: list[KnightConditionRow]
    bracket_monotone: bool
    cov_monotone: bool
    passed: bool


def knight_condition_report(result: SweepResult, alpha_ref: np.ndarray | None = None) -> KnightReport:
    """Per-h deviation of the bracket from (4/3)*alpha and of covariation^2.

    Flags PASS when both mean deviations decrease strictly along the h grid
    (the grid is ordered decreasing, so this tracks the h -> 0 convergences).
    """
    rows = []
    for h in result.config_echo.h_grid:
        recs = result.records[h]
        br = np.array([r.bracket for r in recs])
        if np.isnan(br).any():
            raise ValueError("bracket was not computed for this sweep")
        alpha = (np.asarray(alpha_ref, dtype=np.float64) if alpha_ref is not None
                 else np.array([r.alpha_field for r in recs]))
        dev = np.abs(br - (4.0 / 3.0) * alpha)
        cov_sq = np.array([r.covariation for r in recs]) ** 2
        mdev, sdev = (float(dev.mean()), 0.0) if dev.size == 1 else mean_stderr(dev)
        mcov, scov = (float(cov_sq.mean()), 0.0) if cov_sq.size == 1 else mean_stderr(cov_sq)
        rows.append(KnightConditionRow(
            h=h,
            mean_abs_bracket_dev=mdev,
            stderr_abs_bracket_dev=sdev,
            bracket_dev_quantiles=tuple(float(q) for q in np.quantile(dev, (0.25, 0.5, 0.75))),
            mean_cov_sq=mcov,
            stderr_cov_sq=scov,
            cov_sq_quantiles=tuple(float(q) for q in np.quantile(cov_sq, (0.25, 0.5, 0.75))),
        ))
    devs = [r.mean_abs_bracket_dev for r in rows]
    covs = [r.mean_cov_sq for r in rows]
    bracket_monotone = all(a > b for a, b in zip(devs, devs[1:])) if len(rows) > 1 else True
    cov_monotone = all(a > b for a, b in zip(covs, covs[1:])) if len(rows) > 1 else True
    return KnightReport(rows=rows, bracket_monotone=bracket_monotone,
                        cov_monotone=cov_monotone,
                        passed=bracket_monotone and cov_monotone)
