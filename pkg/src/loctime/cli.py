"""Command-line entry point, config parsing, and result serialization."""

from __future__ import annotations

import argparse
import csv
import re
import io
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .config import (ALPHA_MODES, CENTERINGS, SEED_SCHEME, Z_ALPHAS, ConfigError,
                     SimConfig)
from .functionals import triangular_kernel_constants
from .harness import SweepResult, run_sweep

SWEEP_COLUMNS = ["h", "mean_g", "stderr_g", "ks_distance", "var_z", "mean_bracket",
                 "mean_cov_sq", "mean_uhat_l2", "mean_alpha_field", "mean_alpha_diag",
                 "mean_alpha_tri", "recon_correlation"]
REPLICA_COLUMNS = ["h", "replica_index", "g_modulus", "alpha_field", "alpha_diag",
                   "alpha_tri", "bracket", "covariation", "u_hat_l2",
                   "reconstruction", "z_statistic"]

_BOOL_KEYS = {"compute_bracket", "compute_reconstruction"}
_INT_KEYS = {"n_steps", "n_replicas", "master_seed", "uhat_stride"}
_FLOAT_KEYS = {"t", "bin_width"}
_ENUM_KEYS = {"alpha_mode": ALPHA_MODES, "centering": CENTERINGS, "z_alpha": Z_ALPHAS}
_ALL_KEYS = ({"h_grid"} | _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | set(_ENUM_KEYS))
_REQUIRED_KEYS = {"t", "n_steps", "h_grid", "n_replicas", "master_seed"}


@dataclass
class RunManifest:
    config_echo: SimConfig
    tool_version: str
    started_at: str
    finished_at: str
    seed_scheme: str = SEED_SCHEME
    exclusion_count: int = 0


class ConfigParseError(ValueError):
    """Config text rejected; message carries the offending line."""


def _fail(line_no: int, msg: str):
    raise ConfigParseError(f"line {line_no}: {msg}")


def parse_config(source: str) -> SimConfig:
    """Parse the key = value config format into a validated SimConfig.

    Unknown keys, missing required keys, type errors and constraint
    violations are all rejected with the offending line in the message.
    """
    entries: dict[str, int] = {}
    kwargs: dict = {}
    for line_no, rawline in enumerate(source.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            _fail(line_no, f"expected 'key = value', got {rawline.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            _fail(line_no, f"unknown key {key!r}")
        if key in entries:
            _fail(line_no, f"duplicate key {key!r} (first set on line {entries[key]})")
        if not value:
            _fail(line_no, f"key {key!r} has no value")
        entries[key] = line_no
        if key == "h_grid":
            try:
                kwargs[key] = tuple(float(part) for part in value.split(","))
            except ValueError:
                _fail(line_no, f"h_grid must be comma-separated numbers, got {value!r}")
        elif key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                _fail(line_no, f"{key} must be a number, got {value!r}")
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                _fail(line_no, f"{key} must be an integer, got {value!r}")
        elif key in _BOOL_KEYS:
            if value.lower() not in ("true", "false"):
                _fail(line_no, f"{key} must be true or false, got {value!r}")
            kwargs[key] = value.lower() == "true"
        else:
            if value not in _ENUM_KEYS[key]:
                _fail(line_no, f"{key} must be one of {_ENUM_KEYS[key]}, got {value!r}")
            kwargs[key] = value

    for key in sorted(_REQUIRED_KEYS):
        if key not in entries:
            raise ConfigParseError(f"missing required key {key!r}")

    try:
        return SimConfig(**kwargs)
    except ConfigError as exc:
        msg = str(exc)
        hit = next((k for k in sorted(entries, key=lambda k: -len(k))
                    if len(k) > 1 and re.search(rf"\b{re.escape(k)}\b", msg)), None)
        if hit is None and re.search(r"\bh\b", msg):
            hit = "h_grid"
        prefix = f"line {entries[hit]}: " if hit in entries else ""
        raise ConfigParseError(prefix + msg) from exc


def serialize_config(config: SimConfig) -> str:
    """Round-trippable text form of a SimConfig."""
    lines = [
        f"t = {config.t!r}",
        f"n_steps = {config.n_steps}",
        "h_grid = " + ", ".join(repr(h) for h in config.h_grid),
        f"n_replicas = {config.n_replicas}",
        f"master_seed = {config.master_seed}",
        f"alpha_mode = {config.alpha_mode}",
        f"centering = {config.centering}",
        f"z_alpha = {config.z_alpha}",
        f"compute_bracket = {str(config.compute_bracket).lower()}",
        f"uhat_stride = {config.uhat_stride}",
        f"compute_reconstruction = {str(config.compute_reconstruction).lower()}",
    ]
    if config.bin_width is not None:
        lines.insert(4, f"bin_width = {config.bin_width!r}")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_results(result: SweepResult, manifest: RunManifest, out_dir) -> None:
    """Write sweep.csv, replicas.csv and manifest.json into out_dir.

    Data files are byte-deterministic for a fixed config and version;
    timestamps live only in the manifest.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "sweep.csv", SWEEP_COLUMNS, _sweep_rows(result))
        _write_csv(out / "replicas.csv", REPLICA_COLUMNS, _replica_rows(result))
        mdict = {
            "config": asdict(manifest.config_echo),
            "tool_version": manifest.tool_version,
            "started_at": manifest.started_at,
            "finished_at": manifest.finished_at,
            "seed_scheme": manifest.seed_scheme,
            "exclusion_count": manifest.exclusion_count,
            "fitted": {"slope_4t": _fmt(result.fitted.slope_4t),
                       "uhat_slope": _fmt(result.fitted.uhat_slope)},
            "seeds": result.seeds_manifest,
        }
        (out / "manifest.json").write_text(
            json.dumps(mdict, indent=2, sort_keys=True, default=_fmt) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing results under {out}: {exc}") from exc


def _sweep_rows(result: SweepResult):
    for h in result.config_echo.h_grid:
        a = result.per_h[h]
        yield [h, a.mean_g, a.stderr_g, a.ks_distance, a.var_z, a.mean_bracket,
               a.mean_cov_sq, a.mean_uhat_l2, a.mean_alpha_field, a.mean_alpha_diag,
               a.mean_alpha_tri, a.recon_correlation]


def _replica_rows(result: SweepResult):
    for h in result.config_echo.h_grid:
        for rec in result.records[h]:
            yield [h, rec.replica_index, rec.g_modulus, rec.alpha_field,
                   rec.alpha_diag, rec.alpha_tri, rec.bracket, rec.covariation,
                   rec.u_hat_l2, rec.reconstruction, rec.z_statistic]


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    path.write_text(buf.getvalue())


def _utc_stamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def cmd_sweep(args) -> int:
    text = Path(args.config).read_text()
    config = parse_config(text)
    started = _utc_stamp()
    result = run_sweep(config)
    manifest = RunManifest(config_echo=config, tool_version=__version__,
                           started_at=started, finished_at=_utc_stamp(),
                           exclusion_count=result.exclusion_count)
    write_results(result, manifest, args.out)
    print(f"sweep complete: {len(config.h_grid)} h values x {config.n_replicas} replicas "
          f"-> {args.out}")
    for h in config.h_grid:
        a = result.per_h[h]
        print(f"  h={h:g}: mean_g={a.mean_g:.6g} (se {a.stderr_g:.2g}) "
              f"ks={a.ks_distance:.4f} var_z={a.var_z:.4f}")
    print(f"  slope_4t={result.fitted.slope_4t:.4f} uhat_slope={result.fitted.uhat_slope:.4f}")
    return 0


def cmd_verify(args) -> int:
    from .acceptance import run_acceptance

    seed = None
    if args.config:
        config = parse_config(Path(args.config).read_text())
        seed = config.master_seed
    only = None
    if args.only:
        only = sorted(int(part) for part in args.only.split(","))
    outcomes = run_acceptance(master_seed=seed, only=only, verbose=True)
    return 0 if all(o.passed for o in outcomes) else 1


def cmd_kernel_check(args) -> int:
    targets = (4.0 / 3.0, 3.0 / 2.0)
    print("triangular kernel normalizations by quadrature")
    print(f"{'h':>6} {'int[(h-|x|)+]^2/h^3':>22} {'int(h-|x|)+/h^2':>18}")
    for h in (0.1, 1.0, 10.0):
        sq, lin = triangular_kernel_constants(h)
        print(f"{h:>6g} {sq:>22.12f} {lin:>18.12f}")
    print(f"pinned target constants: {targets[0]:.12f} {targets[1]:.12f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="loctime",
        description="Monte Carlo engine for Brownian local-time functionals")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a replica sweep and write CSV results")
    p_sweep.add_argument("--config", required=True, help="config file (key = value lines)")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--config", help="config file; its master_seed seeds the suite")
    p_verify.add_argument("--only", help="comma-separated criterion numbers to run")
    p_verify.set_defaults(func=cmd_verify)

    p_kernel = sub.add_parser("kernel-check", help="print triangular-kernel quadratures")
    p_kernel.set_defaults(func=cmd_kernel_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
