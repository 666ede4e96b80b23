"""Run orchestration: config parsing, evolution drivers, CSV artifacts.

Command shape:  ewkg <mode> --config <path> [--output-dir <path>]
Config files are plain `key = value` lines with `#` comments; keys mirror
the SimConfig fields plus the data-family fields and `output_dir`.

Exit codes: 0 success; 2 physics-degenerate (blowup / cone degeneracy);
3 numerical failure (non-finite states, quadrature); 4 config errors.
CSV bodies are deterministic: floats carry 17 significant digits and no
wall-clock content appears in data rows.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from dataclasses import dataclass, fields as dc_fields, replace
from pathlib import Path

import numpy as np

from .core import CauchyState, InitialDataFamily, SimConfig, apply_axis_parity, axis_value, build_grid
from .cauchy import CauchyRun, run_cauchy
from .diagnostics import DiagnosticsRecord, assemble_records, null_run_records
from .errors import (BlowupError, CFLError, ConeOutOfRangeError, ConfigError,
                     DegenerateConeError, NonFiniteError, QuadratureError)
from .initial_data import beta_t_from_momentum, validate_data
from .nullev import residual_raychaudhuri, run_null

SNAPSHOT_COLUMNS = ("r", "gamma", "gamma_t", "phi", "phi_t", "alpha", "beta")


@dataclass(frozen=True)
class RunArtifacts:
    diagnostics_csv_path: Path | None
    snapshots_path: Path | None
    report_path: Path | None
    exit_code: int


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


_BOOL_KEYS = {"frozen_metric"}
_INT_KEYS = {"n_cells", "snapshot_every"}
_STR_KEYS = {"mode", "kind", "output_dir", "snapshots_dir"}
_FAMILY_KEYS = {"kind", "amp_phi", "amp_gamma", "center", "width",
                "amp_phi_t", "amp_gamma_t"}


def parse_config(path) -> tuple[SimConfig, dict]:
    """Parse a key=value config file into a SimConfig plus extra settings."""
    cfg_fields = {f.name for f in dc_fields(SimConfig)}
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value

    family_kwargs = {}
    config_kwargs = {}
    extras = {}
    for key, value in raw.items():
        if key in _STR_KEYS:
            parsed = value
        elif key in _BOOL_KEYS:
            parsed = value.lower() in ("1", "true", "yes", "on")
        elif key in _INT_KEYS:
            try:
                parsed = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: expected integer, got {value!r}") from exc
        else:
            try:
                parsed = float(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: expected number, got {value!r}") from exc
            if not np.isfinite(parsed):
                raise ConfigError(f"{key}: value must be finite, got {value!r}")
        if key in _FAMILY_KEYS:
            family_kwargs[key] = parsed
        elif key in cfg_fields:
            config_kwargs[key] = parsed
        elif key in ("output_dir", "snapshots_dir", "v_max"):
            extras[key] = parsed
        else:
            raise ConfigError(f"unknown config key {key!r}")
    config = SimConfig(data_family=InitialDataFamily(**family_kwargs), **config_kwargs)
    return config, extras


def write_snapshots(run: CauchyRun, outdir: Path) -> Path:
    snapdir = outdir / "snapshots"
    snapdir.mkdir(parents=True, exist_ok=True)
    rows = []
    r = run.grid.centers
    for i, st in enumerate(run.snapshots):
        name = f"snapshot_{i:06d}.csv"
        cols = [r] + [st.interior(c) for c in SNAPSHOT_COLUMNS[1:]]
        write_csv(snapdir / name, SNAPSHOT_COLUMNS, zip(*cols))
        rows.append((i, st.time))
    write_csv(snapdir / "index.csv", ("index", "time"), rows)
    return snapdir


def load_run(config: SimConfig, snapdir: Path) -> CauchyRun:
    """Rebuild a CauchyRun from stored snapshot CSVs (for diagnose mode)."""
    index = np.loadtxt(snapdir / "index.csv", delimiter=",", skiprows=1, ndmin=2)
    grid = build_grid(config)
    g = grid.n_ghost
    run = CauchyRun(config=config, grid=grid,
                    dt=(index[1, 1] - index[0, 1]) if len(index) > 1 else config.dt_bound)
    for i, t in index:
        data = np.loadtxt(snapdir / f"snapshot_{int(i):06d}.csv",
                          delimiter=",", skiprows=1)
        if data.shape[0] != grid.n_cells:
            raise ConfigError("stored snapshots do not match n_cells")
        st = CauchyState.zero(grid, time=float(t))
        for c, name in enumerate(SNAPSHOT_COLUMNS[1:], start=1):
            getattr(st, name)[g:-g] = data[:, c]
        st.beta_t[g:-g] = beta_t_from_momentum(st)
        apply_axis_parity(st)
        run.snapshots.append(st)
    return run


def write_diagnostics(run: CauchyRun, outdir: Path) -> Path:
    records = assemble_records(run)
    path = outdir / "diagnostics.csv"
    write_csv(path, DiagnosticsRecord.CSV_COLUMNS,
              [[getattr(rec, c) for c in DiagnosticsRecord.CSV_COLUMNS]
               for rec in records])
    return path


AXIS_COLUMNS = ("time", "max_dev_ru", "max_dev_rv", "max_dev_r",
                "slope_ru", "slope_rv", "slope_r", "res_ray_u", "res_ray_v")


def write_null_diagnostics(null_run, outdir: Path) -> Path:
    rows = null_run_records(null_run)
    path = outdir / "axis_geometry.csv"

    def clean(v):
        return 0.0 if not np.isfinite(v) else v

    write_csv(path, AXIS_COLUMNS, [[clean(row[c]) for c in AXIS_COLUMNS] for row in rows])
    return path


def cauchy_axis_series(run: CauchyRun):
    t = run.times
    gam = np.array([axis_value(s.interior("gamma")) for s in run.snapshots])
    phi = np.array([axis_value(s.interior("phi")) for s in run.snapshots])
    return t, gam, phi


def crosscheck_table(config: SimConfig, n_events: int = 20):
    """Axis-event comparison of the two schemes (axis time is gauge-shared)."""
    crun = run_cauchy(config, collect_residuals=False)
    nrun = run_null(config)
    tc, gc, pc = cauchy_axis_series(crun)
    tn, gn, pn = nrun.axis_series()
    t_hi = min(tc[-1], tn[-1])
    times = np.linspace(0.15 * t_hi, 0.95 * t_hi, n_events)
    rows = []
    scale_g = max(np.max(np.abs(gc)), 1e-30)
    scale_p = max(np.max(np.abs(pc)), 1e-30)
    for t in times:
        gamma_c = np.interp(t, tc, gc)
        gamma_n = np.interp(t, tn, gn)
        phi_c = np.interp(t, tc, pc)
        phi_n = np.interp(t, tn, pn)
        rows.append((t, gamma_c, gamma_n, abs(gamma_c - gamma_n) / scale_g,
                     phi_c, phi_n, abs(phi_c - phi_n) / scale_p))
    return crun, nrun, rows


def _converge_events(config: SimConfig):
    t_hi = 0.9 * config.t_final
    times = np.linspace(0.3 * t_hi, t_hi, 5)
    radii = (0.0, 0.5 * config.data_family.center, config.data_family.center)
    return [(t, r) for t in times for r in radii]


def _converge_worker(args):
    config, v_max = args
    from .cauchy import residual_evolution_2_13, residual_momentum, sample_field

    crun = run_cauchy(config, collect_residuals=False)
    mid = len(crun.snapshots) // 2
    res_mom = residual_momentum(crun, mid)
    res_213 = residual_evolution_2_13(crun, mid)
    nrun = run_null(config, v_max=v_max)
    k = max(2, len(nrun.slices) * 3 // 4)
    res_u, res_v = residual_raychaudhuri(
        nrun.slices[k], nrun.slices[k - 1],
        nrun.slices[k + 1] if k + 1 < len(nrun.slices) else None)
    samples = [sample_field(crun, "phi", t, r) for t, r in _converge_events(config)]
    return config.n_cells, res_mom, res_213, res_u, res_v, samples


def converge_mode(config: SimConfig, outdir: Path):
    """Three-resolution order report for every residual detector.

    In the frozen-metric massless mode the field error is measured against
    the flat retarded-kernel oracle; otherwise against the finest grid
    (plain self-convergence).
    """
    v_max = min(config.t_final, 0.45 * config.r_max)
    # one snapshot cadence for all three runs so the snapshot spacing
    # refines with the grid (the residual time differences and the event
    # interpolation both must)
    n_steps = int(np.ceil(config.t_final / config.dt_bound))
    se = max(1, min(4, n_steps // 2))
    configs = [(replace(config, n_cells=config.n_cells * (2 ** k),
                        snapshot_every=se), v_max)
               for k in range(3)]
    with concurrent.futures.ProcessPoolExecutor(max_workers=3) as pool:
        results = list(pool.map(_converge_worker, configs))

    events = _converge_events(config)
    samples = np.array([row[5] for row in results])
    fam = config.data_family
    if config.frozen_metric and config.mass_m == 0.0:
        from .flat_oracle import AnalyticData, data_layer

        an = AnalyticData.gaussian(fam.amp_phi, fam.center, fam.width, fam.amp_phi_t)
        ref = np.array([data_layer(an, t, r, tol=1e-9) for t, r in events])
        err_field = [float(np.max(np.abs(samples[i] - ref))) for i in range(3)]
    else:
        ref = samples[2]
        err_field = [float(np.max(np.abs(samples[i] - ref))) for i in range(2)]
        err_field.append(0.0)

    header = ("n_cells", "res_momentum", "res_213", "res_ray_u", "res_ray_v",
              "err_field")
    rows = [row[:5] + (err_field[i],) for i, row in enumerate(results)]
    write_csv(outdir / "convergence.csv", header, rows)

    def safe_order(a, b):
        return float(np.log2(a / b)) if a > 1e-300 and b > 1e-300 else 0.0

    orders = []
    for c, name in enumerate(header[1:], start=1):
        vals = [row[c] for row in rows]
        orders.append((name, safe_order(vals[0], vals[1]),
                       safe_order(vals[1], vals[2])))
    write_csv(outdir / "orders.csv", ("quantity", "order_coarse", "order_fine"),
              [(i, o1, o2) for i, (_, o1, o2) in enumerate(orders)])
    lines = ["convergence order report (residual ratios per grid doubling)"]
    for name, o1, o2 in orders:
        lines.append(f"{name}: order {o1:.3f} (coarse pair), {o2:.3f} (fine pair)")
    return lines


def run(config_path, output_dir=None, mode=None) -> RunArtifacts:
    """Execute a configured run; never raises, maps failures to exit codes."""
    try:
        config, extras = parse_config(config_path)
        if mode is not None:
            config = replace(config, mode=mode)
        outdir = Path(output_dir or extras.get("output_dir") or "ewkg_out")
        outdir.mkdir(parents=True, exist_ok=True)
        return _dispatch(config, extras, outdir)
    except (ConfigError, ConeOutOfRangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return RunArtifacts(None, None, None, 4)
    except (BlowupError, DegenerateConeError) as exc:
        print(f"physics-degenerate run: {exc}", file=sys.stderr)
        return RunArtifacts(None, None, None, 2)
    except (NonFiniteError, QuadratureError, CFLError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return RunArtifacts(None, None, None, 3)


def _dispatch(config: SimConfig, extras: dict, outdir: Path) -> RunArtifacts:
    report_lines = [f"mode: {config.mode}", f"n_cells: {config.n_cells}",
                    f"mass_m: {_fmt(config.mass_m)}"]
    diag_path = snap_path = None

    if config.mode in ("cauchy", "diagnose"):
        if config.mode == "diagnose" and "snapshots_dir" in extras:
            crun = load_run(config, Path(extras["snapshots_dir"]))
            snap_path = Path(extras["snapshots_dir"])
        else:
            crun = run_cauchy(config)
            snap_path = write_snapshots(crun, outdir)
        diag_path = write_diagnostics(crun, outdir)
        report = validate_data(crun.snapshots[0], config)
        report_lines += [
            f"E0: {_fmt(report.total_energy)}",
            f"energy_below_2pi: {report.energy_below_2pi}",
            f"cond_1_19_ok: {report.cond_1_19_ok}",
            f"snapshots: {len(crun.snapshots)}",
        ]
    elif config.mode == "null":
        nrun = run_null(config, v_max=extras.get("v_max"))
        diag_path = write_null_diagnostics(nrun, outdir)
        report_lines.append(f"slices: {len(nrun.slices)}")
    elif config.mode == "crosscheck":
        crun, nrun, rows = crosscheck_table(config)
        snap_path = write_snapshots(crun, outdir)
        diag_path = write_diagnostics(crun, outdir)
        write_null_diagnostics(nrun, outdir)
        write_csv(outdir / "crosscheck.csv",
                  ("time", "gamma_cauchy", "gamma_null", "gamma_rel_diff",
                   "phi_cauchy", "phi_null", "phi_rel_diff"), rows)
        worst = max(max(r[3] for r in rows), max(r[6] for r in rows))
        report_lines.append(f"max_axis_rel_diff: {_fmt(worst)}")
    elif config.mode == "converge":
        report_lines += converge_mode(config, outdir)
        diag_path = outdir / "convergence.csv"
    else:
        raise ConfigError(f"unhandled mode {config.mode!r}")

    report_path = outdir / "report.txt"
    report_path.write_text("\n".join(report_lines) + "\n")
    return RunArtifacts(diagnostics_csv_path=diag_path, snapshots_path=snap_path,
                        report_path=report_path, exit_code=0)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ewkg",
        description="Evolve the radially symmetric Einstein-wave-Klein-Gordon "
                    "system and compute its energy/flux diagnostics.")
    parser.add_argument("mode", choices=("cauchy", "null", "crosscheck",
                                         "converge", "diagnose"))
    parser.add_argument("--config", required=True)
    parser.add_argument("--output-dir", default=None)
    args = parser.parse_args(argv)
    artifacts = run(args.config, output_dir=args.output_dir, mode=args.mode)
    return artifacts.exit_code


if __name__ == "__main__":
    sys.exit(main())
