"""Command-line front end.

Exit codes are shared by every subcommand: 0 success, 1 a bound or identity
fails, 2 invalid input or a value outside its domain, 3 a file cannot be read
or written.

Tolerances resolve in this order, later entries winning: built-in defaults,
the ``KOTTLER_TOL`` environment variable (absolute tolerance), a
``kottler.conf`` file of ``key = value`` lines, command-line flags.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import bounds_evaluator as be
from . import geometry_engine as ge
from .csvio import atomic_write_text, write_table
from .errors import InputError, KottlerError
from .model_solutions import ModelKind, build_model, export_profile
from .profiles import Chart, profile_from_csv
from .pseudo_radial import Branch, PseudoRadialBranch, phi_of_u, psi_of_u
from .scalar_solvers import (
    ModelParams,
    ToleranceConfig,
    m_max,
    surface_gravity_inner,
    surface_gravity_outer,
    u_max,
    virtual_mass,
)

__all__ = ["RunConfig", "load_config", "cli", "main"]

log = logging.getLogger("kottler")

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3
CONFIG_NAME = "kottler.conf"
ENV_TOL = "KOTTLER_TOL"


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by the subcommands."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200
    sharp_tol: float = be.SHARP_TOL
    mass_tol: float = be.MASS_TOL
    identity_tol: float = ge.DEFAULT_IDENTITY_TOL
    format: str = "csv"
    n: int = 3
    verbosity: int = 0

    @property
    def tolerances(self) -> ToleranceConfig:
        return ToleranceConfig(self.abs_tol, self.rel_tol, self.max_iter)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if not value > 0:
                raise ValueError("must be positive")
            return value
    except ValueError as exc:
        raise InputError(f"invalid value {raw!r} for {key}: {exc}") from None
    value = raw.strip().lower()
    if key == "format" and value not in ("csv", "json"):
        raise InputError(f"format must be csv or json, got {raw!r}")
    return value


def load_config(path: str | os.PathLike | None = None, overrides: dict | None = None,
                environ: dict | None = None) -> RunConfig:
    """Resolve a :class:`RunConfig` from defaults, environment, file and flags.

    ``path`` defaults to ``kottler.conf`` in the working directory when that
    file exists. ``overrides`` holds flag values; ``None`` entries are ignored.
    """
    values: dict = {}
    env = os.environ if environ is None else environ
    if env.get(ENV_TOL):
        values["abs_tol"] = _coerce("abs_tol", env[ENV_TOL])
    if path is None and Path(CONFIG_NAME).is_file():
        path = CONFIG_NAME
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            parser.read_string("[kottler]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise InputError(f"cannot parse {path}: {exc}") from None
        for key, raw in parser["kottler"].items():
            if key not in _FIELD_TYPES:
                raise InputError(f"unknown key {key!r} in {path}")
            values[key] = _coerce(key, raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return RunConfig(**values)


def _json_ready(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_ready(obj.item())
    return obj


def _write_json(path: str, payload) -> None:
    atomic_write_text(path, json.dumps(_json_ready(payload), indent=2) + "\n")


def _emit_table(config: RunConfig, path: str, header, rows) -> None:
    """Write a table as CSV, or as a JSON array of records when ``format = json``."""
    if config.format == "json":
        _write_json(path, [dict(zip(header, row)) for row in rows])
    else:
        write_table(path, header, rows)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Settings file of key = value lines (default: ./kottler.conf if present).")
@click.option("--abs-tol", type=float, default=None, help="Absolute solver tolerance.")
@click.option("--rel-tol", type=float, default=None, help="Relative solver tolerance.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
              help="Table output format for model, compare and profile (default csv).")
@click.option("-v", "--verbose", count=True, help="Repeat for more log output.")
@click.pass_context
def cli(ctx, config_path, abs_tol, rel_tol, fmt, verbose):
    """Horizon masses, model profiles, identity checks and area bounds for Kottler static triples."""
    config = load_config(config_path, {"abs_tol": abs_tol, "rel_tol": rel_tol, "format": fmt,
                                       "verbosity": verbose or None})
    level = logging.WARNING - 10 * min(config.verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = config


@cli.command("mass")
@click.option("--n", "n", type=int, default=None, help="Dimension (default from config, 3).")
@click.option("--kappa", type=float, required=True, help="Normalized surface gravity |Du|/max u.")
@click.option("--region", type=click.Choice(["outer", "inner"]), default="outer", show_default=True)
@click.pass_obj
def mass(config: RunConfig, n, kappa, region):
    """Print the virtual mass of a horizon with normalized surface gravity KAPPA."""
    n = config.n if n is None else n
    m = virtual_mass(n, kappa, region, config.tolerances)
    click.echo(f"{m:.12g}")
    return EXIT_OK


@cli.command("model")
@click.option("--kind", type=click.Choice([k.value for k in ModelKind]), required=True)
@click.option("--n", "n", type=int, default=None)
@click.option("--m", "m", type=float, default=None, help="Mass (implied for desitter and nariai kinds).")
@click.option("--samples", type=int, default=512, show_default=True)
@click.option("--chart", type=click.Choice(["area", "proper"]), default=None,
              help="Coordinate of the first column (default: area, proper for nariai kinds).")
@click.option("--out", default="-", show_default=True, help="Output CSV path, - for stdout.")
@click.pass_obj
def model(config: RunConfig, kind, n, m, samples, chart, out):
    """Write a model profile as a coord,u,warp table."""
    n = config.n if n is None else n
    kind = ModelKind.parse(kind)
    if m is None:
        if kind is ModelKind.DE_SITTER:
            m = 0.0
        elif kind.is_cylindrical:
            m = m_max(n)
        else:
            raise InputError(f"--m is required for kind {kind.value}")
    triple = build_model(kind, ModelParams(n, m))
    profile = export_profile(triple, samples, chart)
    _emit_table(config, out, ("coord", "u", "warp"), list(zip(profile.coord, profile.u, profile.warp)))
    log.info("wrote %d samples to %s", len(profile), out)
    return EXIT_OK


def _region_branches(profile, m):
    """Pseudo-radial branches of the regions on either side of the maximum."""
    imax = int(np.argmax(profile.u))
    last = len(profile) - 1
    out = []
    for region, present in (("outer", last - imax >= 8), ("inner", imax >= 8)):
        if not present:
            continue
        if m is not None:
            params = ModelParams(profile.n, m)
            if params.is_degenerate:
                branch = PseudoRadialBranch(params, Branch.CYLINDRICAL, side=region)
            else:
                branch = PseudoRadialBranch(params, Branch.OUTER if region == "outer" else Branch.INNER)
            out.append((region, branch, branch.umax / float(profile.u[imax])))
            continue
        end = -1 if region == "outer" else 0
        if profile.u[end] != 0.0:
            log.warning("%s end is not a horizon; pass --m to check the %s region", region, region)
            continue
        branch, scale = ge.infer_branch(profile, region)
        out.append((region, branch, scale))
    return out


@cli.command("verify")
@click.option("--profile", "profile_path", type=click.Path(dir_okay=False), required=True)
@click.option("--n", "n", type=int, default=None)
@click.option("--chart", type=click.Choice(["area", "proper"]), default="area", show_default=True)
@click.option("--m", "m", type=float, default=None,
              help="Mass of the comparison model (default: virtual mass of each horizon end).")
@click.option("--branch", type=click.Choice(["auto", "outer", "inner"]), default="auto", show_default=True,
              help="Restrict the conformal checks to one side of the maximum.")
@click.option("--report", default="-", show_default=True, help="JSON report path, - for stdout.")
@click.option("--tol", type=float, default=None, help="Identity tolerance.")
@click.pass_obj
def verify(config: RunConfig, profile_path, n, chart, m, branch, report, tol):
    """Check the static and conformal identities on a coord,u,warp profile."""
    n = config.n if n is None else n
    tol = config.identity_tol if tol is None else tol
    profile = profile_from_csv(profile_path, n, Chart.parse(chart))
    entries = [dict(r.to_dict(), region="all") for r in ge.static_residuals(profile, tol)]
    for region, pr_branch, scale in _region_branches(profile, m):
        if branch != "auto" and region != branch:
            continue
        scaled = profile.with_u(profile.u * scale)
        for rep in ge.conformal_identity_residuals(scaled, pr_branch, tol):
            entries.append(dict(rep.to_dict(), region=region, m=pr_branch.params.m))
    _write_json(report, entries)
    failed = [e["identity"] for e in entries if not e["passed"]]
    if failed:
        click.echo(f"failed: {', '.join(failed)}", err=True)
        return EXIT_VIOLATION
    return EXIT_OK


@cli.command("bounds")
@click.option("--horizons", "horizons_path", type=click.Path(dir_okay=False), required=True,
              help="kappa,area table of the horizons of one region.")
@click.option("--n", "n", type=int, default=None)
@click.option("--sigma-area", type=float, default=None, help="Area of the maximum set bounding the region.")
@click.option("--report", default="-", show_default=True, help="JSON report path, - for stdout.")
@click.option("--ambrozio/--no-ambrozio", default=False, show_default=True,
              help="Treat the table as every horizon of the solution and add Ambrozio's global bound.")
@click.pass_obj
def bounds(config: RunConfig, horizons_path, n, sigma_area, report, ambrozio):
    """Evaluate the area bounds on a region's horizon data."""
    n = config.n if n is None else n
    horizons = be.horizons_from_csv(horizons_path)
    region = be.RegionInput(n, horizons, sigma_area)
    entries = be.evaluate_region(region, config.sharp_tol)
    if ambrozio and n == 3:
        entries.append(be.ambrozio_bound(region.horizons, region.tie_tol, config.sharp_tol))
    _write_json(report, entries.to_dicts())
    return EXIT_VIOLATION if entries.violated else EXIT_OK


@cli.command("compare")
@click.option("--resolution", type=int, default=200, show_default=True)
@click.option("--n", "n", type=int, default=None)
@click.option("--m-plus-range", type=(float, float), default=None, help="Outer virtual-mass range.")
@click.option("--m-minus-range", type=(float, float), default=None, help="Inner virtual-mass range.")
@click.option("--out", default="-", show_default=True)
@click.pass_obj
def compare(config: RunConfig, resolution, n, m_plus_range, m_minus_range, out):
    """Tabulate the two-region bound against Ambrozio's bound over (m_+, m_-)."""
    n = config.n if n is None else n
    rows = be.compare_grid(resolution, m_plus_range, m_minus_range, n)
    _emit_table(config, out, be.GRID_HEADER, rows)
    return EXIT_OK


def _pseudo_radial_rows(n: int, m: float, samples: int):
    params = ModelParams(n, m)
    # the Nariai potential is normalized to max u = 1
    top = 1.0 if params.is_degenerate else u_max(params)
    u = np.linspace(0.0, top, samples)
    if params.is_degenerate:
        outer = PseudoRadialBranch(params, Branch.CYLINDRICAL, side="outer")
        inner = PseudoRadialBranch(params, Branch.CYLINDRICAL, side="inner")
        psi = np.full_like(u, outer.r0)
        return zip(u, psi, psi, phi_of_u(outer, u), phi_of_u(inner, u))
    outer = PseudoRadialBranch(params, Branch.OUTER)
    cols = [u, psi_of_u(outer, u)]
    if m > 0:
        inner = PseudoRadialBranch(params, Branch.INNER)
        cols.append(psi_of_u(inner, u))
        cols.append(phi_of_u(outer, u))
        cols.append(phi_of_u(inner, u))
    else:
        cols.append(np.full_like(u, math.nan))
        cols.append(phi_of_u(outer, u))
        cols.append(np.full_like(u, math.nan))
    return zip(*cols)


def _gravity_rows(n: int, samples: int):
    top = m_max(n)
    root_n = math.sqrt(n)
    for m in np.linspace(0.0, top, samples):
        params = ModelParams(n, float(m))
        k_plus = root_n if params.is_degenerate else surface_gravity_outer(params)
        if params.is_degenerate:
            k_minus = root_n
        elif m == 0.0:
            k_minus = math.inf
        else:
            k_minus = surface_gravity_inner(params)
        yield (float(m), k_plus, "inf" if math.isinf(k_minus) else k_minus)


@cli.command("profile")
@click.option("--n", "n", type=int, default=None)
@click.option("--m", "m", type=float, required=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--out", default="-", show_default=True, help="u,psi_plus,psi_minus,phi_plus,phi_minus table.")
@click.option("--gravity-out", default=None, help="Also write an m,k_plus,k_minus table over [0, m_max].")
@click.option("--gravity-samples", type=int, default=200, show_default=True)
@click.pass_obj
def profile(config: RunConfig, n, m, samples, out, gravity_out, gravity_samples):
    """Tabulate the pseudo-radial functions and the pseudo-affine functions against u."""
    n = config.n if n is None else n
    if samples < 2:
        raise InputError("--samples must be at least 2")
    rows = list(_pseudo_radial_rows(n, m, samples))
    _emit_table(config, out, ("u", "psi_plus", "psi_minus", "phi_plus", "phi_minus"), rows)
    if gravity_out is not None:
        if gravity_samples < 2:
            raise InputError("--gravity-samples must be at least 2")
        _emit_table(config, gravity_out, ("m", "k_plus", "k_minus"), list(_gravity_rows(n, gravity_samples)))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        code = cli.main(args=argv, prog_name="kottler", standalone_mode=False)
    except click.exceptions.FileError as exc:
        exc.show()
        return EXIT_IO
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_VIOLATION
    except click.exceptions.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except KottlerError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INPUT
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK if code is None else int(code)


if __name__ == "__main__":
    sys.exit(main())
