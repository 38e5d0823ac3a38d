"""Command-line interface.

Commands dispatch to the problem builders and search drivers and emit
CSV results plus a JSON manifest (full configuration, package version,
timestamp, per-solve diagnostics) beside each CSV.  ``rerun`` replays a
manifest; with timing suppressed in the configuration the reproduced
CSVs are byte-identical.

Bounds CSV columns::

    omega, n, objective, direction, bound, status, primal, dual,
    iterations, seconds

Gap CSV columns::

    omega, n, delta_lb, delta_ub, navigator_min, argmin, status

All numbers are written with 9 significant digits.  The output
directory defaults to the current directory and can be overridden with
the ``LINDBLAD_BOUNDS_OUTPUT_DIR`` environment variable or the
``--output-dir`` flag.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import sys
import warnings
from pathlib import Path
from typing import List, Optional

import click

from . import __version__
from .backend import SolverSettings, export_sdpa, solve
from .builders import build_gap_sdp, build_ratio_sdp, build_steady_state_sdp
from .errors import LindbladBoundsError
from .observables import parse_observable
from .search import (BoundsRecord, GapRecord, critical_coupling_lower_bound,
                     gap_window, qcp_family, ratio_bound, scan_omega,
                     steady_state_bound)

BOUNDS_COLUMNS = ("omega", "n", "objective", "direction", "bound", "status",
                  "primal", "dual", "iterations", "seconds")
GAP_COLUMNS = ("omega", "n", "delta_lb", "delta_ub", "navigator_min",
               "argmin", "status")

_CONFIG_KEYS = {
    "tol_feas": float,
    "tol_gap": float,
    "max_iter": int,
    "realness": bool,
    "g_thresh": float,
    "phase1_points": int,
    "omega_points": int,
    "record_timing": bool,
}

_CONFIG_DEFAULTS = {
    "tol_feas": 1e-9,
    "tol_gap": None,
    "max_iter": 100_000,
    "realness": True,
    "g_thresh": 0.0,
    "phase1_points": 33,
    "omega_points": 25,
    "record_timing": True,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_config(path: Optional[str]) -> dict:
    """Flat ``key = value`` configuration file; ``#`` starts a comment."""
    cfg = dict(_CONFIG_DEFAULTS)
    if path is None:
        return cfg
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise click.ClickException(
                f"{path}:{lineno}: unknown config key {key!r}")
        caster = _CONFIG_KEYS[key]
        try:
            cfg[key] = _parse_bool(value) if caster is bool else caster(value)
        except ValueError as exc:
            raise click.ClickException(f"{path}:{lineno}: {exc}")
    return cfg


def make_settings(cfg: dict) -> SolverSettings:
    return SolverSettings(tol=cfg["tol_feas"], tol_gap=cfg["tol_gap"],
                          max_iter=cfg["max_iter"])


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".9g")
    return str(value)


def _write_csv(path: Path, columns, rows: List[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _bounds_row(rec: BoundsRecord, record_timing: bool) -> dict:
    return {
        "omega": rec.omega, "n": rec.n, "objective": rec.objective,
        "direction": rec.direction, "bound": rec.bound, "status": rec.status,
        "primal": rec.primal, "dual": rec.dual,
        "iterations": rec.iterations,
        "seconds": rec.seconds if record_timing else 0.0,
    }


def _gap_row(rec: GapRecord) -> dict:
    return {
        "omega": rec.omega, "n": rec.n, "delta_lb": rec.delta_lb,
        "delta_ub": rec.delta_ub, "navigator_min": rec.navigator_min,
        "argmin": rec.argmin, "status": rec.status,
    }


def _write_manifest(out_dir: Path, command: str, params: dict, cfg: dict,
                    csv_name: Optional[str], diagnostics: list) -> Path:
    manifest = {
        "command": command,
        "params": params,
        "config": cfg,
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "csv": csv_name,
        "diagnostics": diagnostics,
    }
    path = out_dir / f"{command}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _emit(out_dir: Path, command: str, params: dict, cfg: dict,
          columns, rows: List[dict], diagnostics: list) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{command}.csv"
    _write_csv(csv_path, columns, rows)
    _write_manifest(out_dir, command, params, cfg, csv_path.name, diagnostics)
    return csv_path


def _diag(rec: BoundsRecord) -> dict:
    return {"omega": rec.omega, "status": rec.status,
            "iterations": rec.iterations, "certified": rec.certified,
            "message": rec.message}


def _objective_or_fail(text: str, n: int):
    try:
        expr = parse_observable(text)
        expr.validate_sites(n)
        return expr.to_operator_sum()
    except LindbladBoundsError as exc:
        raise click.ClickException(str(exc))


_config_option = click.option("--config", "config_path", default=None,
                              type=click.Path(exists=True),
                              help="Flat key = value configuration file.")
_output_option = click.option("--output-dir", envvar="LINDBLAD_BOUNDS_OUTPUT_DIR",
                              default=".", show_default=True,
                              help="Directory for CSV and manifest output "
                                   "(env: LINDBLAD_BOUNDS_OUTPUT_DIR).")


@click.group()
@click.version_option(version=__version__)
def main():
    """Rigorous bootstrap bounds for dissipative lattice dynamics."""


@main.command()
@click.option("--omega", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--objective", default="Z1", show_default=True)
@click.option("--direction", type=click.Choice(["min", "max"]), default="max",
              show_default=True)
@_config_option
@_output_option
def steady(omega, n, objective, direction, config_path, output_dir):
    """Bound one steady-state observable at a single coupling."""
    cfg = load_config(config_path)
    params = {"omega": omega, "n": n, "objective": objective,
              "direction": direction}
    _run_steady(params, cfg, Path(output_dir))


def _run_steady(params: dict, cfg: dict, out_dir: Path) -> None:
    obs = _objective_or_fail(params["objective"], params["n"])
    report = steady_state_bound(qcp_family(params["omega"]), params["n"], obs,
                                params["direction"], make_settings(cfg),
                                realness=cfg["realness"])
    rec = BoundsRecord(
        omega=params["omega"], n=params["n"], objective=params["objective"],
        direction=params["direction"], bound=report.dual_objective,
        status=report.status, primal=report.primal_objective,
        dual=report.dual_objective, iterations=report.iterations,
        seconds=report.solve_time, certified=report.certificate_checked)
    _emit(out_dir, "steady", params, cfg, BOUNDS_COLUMNS,
          [_bounds_row(rec, cfg["record_timing"])], [_diag(rec)])
    click.echo(f"{params['direction']} <{params['objective']}> bound: "
               f"{_fmt(rec.bound)} ({rec.status})")


@main.command()
@click.option("--omegas", default=None,
              help="Comma-separated coupling grid, e.g. '0,0.5,1'.")
@click.option("--omega-min", type=float, default=None)
@click.option("--omega-max", type=float, default=None)
@click.option("--n", type=int, required=True)
@click.option("--objective", default="Z1", show_default=True)
@click.option("--direction", type=click.Choice(["min", "max"]), default="max",
              show_default=True)
@_config_option
@_output_option
def scan(omegas, omega_min, omega_max, n, objective, direction, config_path,
         output_dir):
    """Bound an observable along a coupling grid."""
    cfg = load_config(config_path)
    if omegas is not None:
        try:
            grid = [float(x) for x in omegas.split(",")]
        except ValueError:
            raise click.ClickException(f"bad --omegas list: {omegas!r}")
    elif omega_min is not None and omega_max is not None:
        points = cfg["omega_points"]
        step = (omega_max - omega_min) / (points - 1)
        grid = [omega_min + i * step for i in range(points)]
    else:
        raise click.ClickException(
            "provide --omegas or both --omega-min and --omega-max")
    params = {"omegas": grid, "n": n, "objective": objective,
              "direction": direction}
    _run_scan(params, cfg, Path(output_dir))


def _run_scan(params: dict, cfg: dict, out_dir: Path) -> None:
    obs = _objective_or_fail(params["objective"], params["n"])
    records = scan_omega(qcp_family, params["omegas"], params["n"], obs,
                         params["direction"], make_settings(cfg),
                         objective_name=params["objective"],
                         realness=cfg["realness"])
    rows = [_bounds_row(r, cfg["record_timing"]) for r in records]
    _emit(out_dir, "scan", params, cfg, BOUNDS_COLUMNS, rows,
          [_diag(r) for r in records])
    failed = [r for r in records if r.status not in ("optimal",
                                                     "primal_infeasible")]
    if failed:
        click.echo(f"warning: {len(failed)} of {len(records)} grid points "
                   f"did not solve cleanly", err=True)
    click.echo(f"scan complete: {len(records)} points")


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--bisect-tol", type=float, default=1e-3, show_default=True)
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--omega-hi", type=float, default=16.0, show_default=True)
@_config_option
@_output_option
def critical(n, bisect_tol, eps, omega_hi, config_path, output_dir):
    """Lower bound on the critical coupling by bisection."""
    cfg = load_config(config_path)
    params = {"n": n, "bisect_tol": bisect_tol, "eps": eps,
              "omega_hi": omega_hi}
    _run_critical(params, cfg, Path(output_dir))


def _run_critical(params: dict, cfg: dict, out_dir: Path) -> None:
    try:
        value = critical_coupling_lower_bound(
            qcp_family, params["n"], tol=params["bisect_tol"],
            eps=params["eps"], bracket=(0.0, params["omega_hi"]),
            settings=make_settings(cfg))
    except LindbladBoundsError as exc:
        raise click.ClickException(str(exc))
    columns = ("n", "omega_lower_bound", "bisect_tol", "eps")
    row = {"n": params["n"], "omega_lower_bound": value,
           "bisect_tol": params["bisect_tol"], "eps": params["eps"]}
    _emit(out_dir, "critical", params, cfg, columns, [row], [])
    click.echo(f"critical coupling lower bound (n={params['n']}): "
               f"{_fmt(value)}")


@main.command()
@click.option("--omega", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--objective", default="Z1*Z2", show_default=True)
@click.option("--direction", type=click.Choice(["min", "max"]), default="min",
              show_default=True)
@_config_option
@_output_option
def ratio(omega, n, objective, direction, config_path, output_dir):
    """Bound a deviation ratio in the nontrivial steady state."""
    cfg = load_config(config_path)
    params = {"omega": omega, "n": n, "objective": objective,
              "direction": direction}
    _run_ratio(params, cfg, Path(output_dir))


def _run_ratio(params: dict, cfg: dict, out_dir: Path) -> None:
    obs = _objective_or_fail(params["objective"], params["n"])
    report = ratio_bound(qcp_family(params["omega"]), params["n"], obs,
                         params["direction"], make_settings(cfg))
    rec = BoundsRecord(
        omega=params["omega"], n=params["n"],
        objective=f"r({params['objective']})",
        direction=params["direction"], bound=report.dual_objective,
        status=report.status, primal=report.primal_objective,
        dual=report.dual_objective, iterations=report.iterations,
        seconds=report.solve_time, certified=report.certificate_checked)
    _emit(out_dir, "ratio", params, cfg, BOUNDS_COLUMNS,
          [_bounds_row(rec, cfg["record_timing"])], [_diag(rec)])
    if rec.status == "primal_infeasible":
        click.echo("infeasible: no nontrivial steady-state direction "
                   "at this coupling")
    else:
        click.echo(f"{params['direction']} r({params['objective']}) bound: "
                   f"{_fmt(rec.bound)} ({rec.status})")


@main.command()
@click.option("--omega", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--delta-min", type=float, default=0.0, show_default=True)
@click.option("--delta-max", type=float, default=2.0, show_default=True)
@_config_option
@_output_option
def gap(omega, n, delta_min, delta_max, config_path, output_dir):
    """Allowed window for the asymptotic decay rate."""
    cfg = load_config(config_path)
    params = {"omega": omega, "n": n, "delta_min": delta_min,
              "delta_max": delta_max}
    _run_gap(params, cfg, Path(output_dir))


def _run_gap(params: dict, cfg: dict, out_dir: Path) -> None:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rec = gap_window(qcp_family(params["omega"]), params["n"],
                         bracket=(params["delta_min"], params["delta_max"]),
                         settings=make_settings(cfg),
                         g_thresh=cfg["g_thresh"],
                         grid_points=cfg["phase1_points"])
    _emit(out_dir, "gap", params, cfg, GAP_COLUMNS, [_gap_row(rec)],
          [{"navigator_min": rec.navigator_min, "argmin": rec.argmin,
            "status": rec.status}])
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    if rec.status == "ok":
        click.echo(f"allowed decay-rate window: "
                   f"[{_fmt(rec.delta_lb)}, {_fmt(rec.delta_ub)}]")
    else:
        click.echo(f"no allowed region in "
                   f"[{_fmt(params['delta_min'])}, {_fmt(params['delta_max'])}]"
                   f" (navigator min {_fmt(rec.navigator_min)})")


@main.command("export-sdpa")
@click.option("--problem", type=click.Choice(["steady", "ratio", "gap"]),
              default="steady", show_default=True)
@click.option("--omega", type=float, required=True)
@click.option("--n", type=int, required=True)
@click.option("--delta", type=float, default=None,
              help="Decay rate (gap problem only).")
@click.option("--objective", default="Z1", show_default=True)
@click.option("--direction", type=click.Choice(["min", "max"]), default="max",
              show_default=True)
@click.option("--out", "out_file", default=None,
              help="Output file name [default: <problem>.dat-s].")
@_config_option
@_output_option
def export_sdpa_cmd(problem, omega, n, delta, objective, direction,
                    out_file, config_path, output_dir):
    """Write the scalarized problem in sparse SDPA format."""
    cfg = load_config(config_path)
    params = {"problem": problem, "omega": omega, "n": n, "delta": delta,
              "objective": objective, "direction": direction,
              "out": out_file}
    _run_export(params, cfg, Path(output_dir))


def _run_export(params: dict, cfg: dict, out_dir: Path) -> None:
    model = qcp_family(params["omega"])
    try:
        if params["problem"] == "steady":
            obs = _objective_or_fail(params["objective"], params["n"])
            prob = build_steady_state_sdp(model, params["n"], obs,
                                          params["direction"],
                                          realness=cfg["realness"])
        elif params["problem"] == "ratio":
            obs = _objective_or_fail(params["objective"], params["n"])
            prob = build_ratio_sdp(model, params["n"], obs,
                                   params["direction"])
        else:
            if params["delta"] is None:
                raise click.ClickException("--delta is required for the "
                                           "gap problem")
            prob = build_gap_sdp(model, params["n"], params["delta"])
    except LindbladBoundsError as exc:
        raise click.ClickException(str(exc))
    out_dir.mkdir(parents=True, exist_ok=True)
    name = params["out"] or f"{params['problem']}.dat-s"
    path = out_dir / name
    export_sdpa(prob, path)
    _write_manifest(out_dir, "export-sdpa", params, cfg, None,
                    [{"file": name}])
    click.echo(f"wrote {path}")


_RUNNERS = {
    "steady": _run_steady,
    "scan": _run_scan,
    "critical": _run_critical,
    "ratio": _run_ratio,
    "gap": _run_gap,
    "export-sdpa": _run_export,
}


@main.command()
@click.argument("manifest", type=click.Path(exists=True))
@_output_option
def rerun(manifest, output_dir):
    """Replay a run from its JSON manifest."""
    data = json.loads(Path(manifest).read_text())
    command = data.get("command")
    runner = _RUNNERS.get(command)
    if runner is None:
        raise click.ClickException(f"manifest has unknown command "
                                   f"{command!r}")
    cfg = dict(_CONFIG_DEFAULTS)
    cfg.update(data.get("config", {}))
    runner(data["params"], cfg, Path(output_dir))


if __name__ == "__main__":
    sys.exit(main())
