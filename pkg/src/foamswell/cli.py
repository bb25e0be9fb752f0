"""Command-line interface: ``foamswell run | verify | check-config``.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 invariant failure, 5 convergence-order violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import constitutive as cl
from . import diagnostics as dg
from .config import ConfigError, SimConfig, defaults_table, load_config
from .coupling import COLUMNS, CoupledState, RunReport, SimulationError, run_simulation
from .verification import SUITES, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVARIANT, EXIT_ORDER = 0, 2, 3, 4, 5
ENV_OUT = "FOAMSWELL_OUT"

log = logging.getLogger("foamswell")


def output_dir(default: str | os.PathLike) -> Path:
    return Path(os.environ.get(ENV_OUT) or default)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def write_timeseries(path: Path, report: RunReport) -> None:
    _write_csv(path, COLUMNS, ([getattr(r, c) for c in COLUMNS] for r in report.rows))


def write_snapshot(path: Path, state: CoupledState) -> None:
    """Nodal values on the beam grid; ``p_bar`` is sampled at the same reference abscissae."""
    snap = state.beam
    x = snap.x
    xp = np.linspace(0.0, 1.0, len(state.p_bar))
    p_bar = np.interp(x, xp, state.p_bar)
    _write_csv(path, ("x", "u", "v", "p_bar", "p_hat"),
               zip(x, snap.u, snap.v, p_bar, state.p_hat))


def _versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        own = "unknown"
    return {"foamswell": own, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def evaluate_invariants(report: RunReport, cfg: SimConfig) -> list[dg.InvariantEntry]:
    sysm = cfg.material_system()
    floor = cfg.checks["strain_floor"]
    ms = float(report.column("min_strain").min())
    entries = [
        dg.InvariantEntry("min_strain_positive", ms > 0.0, ms, 0.0, ms, "lower"),
        dg.check_strain_series(report),
        dg.check_mass_series(report, sysm.h0, rel_tol=cfg.checks["mass_rel_tol"]),
        dg.check_energy_series(report),
    ]
    if floor > 0.0:
        entries.append(dg.check_min_strain(report, floor))
    if sysm.nu.bound == 0.0 and sysm.phi.bound == 0.0:
        # unforced beam: the energy can only decay
        entries.append(dg.check_energy_monotone(report))
    return entries


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _load(path) -> SimConfig:
    cfg = load_config(path)
    cl.validate_assumptions(cfg.material_system())
    return cfg


def cmd_check_config(args) -> int:
    try:
        cfg = _load(args.config)
        beta = cfg.velocity_slope()
        residual = cfg.compatibility_residual()
        report = cl.validate_assumptions(cfg.material_system())
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, cl.AssumptionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"config ok: {args.config}")
    print(f"hash             {cfg.hash}")
    print(f"v0 slope         {beta:.12g}")
    print(f"compatibility    {residual:.3e}")
    print(f"mu               {report.mu:.6g}")
    print(f"C_rho            {report.C_rho:.6g}")
    print(f"C_phi C_psi C_nu {report.C_phi:.6g} {report.C_psi:.6g} {report.C_nu:.6g}")
    if args.show_defaults:
        print(defaults_table())
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
        beam_prob, diff_prob, coupling = cfg.problems()
        initial = cfg.initial_state()
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, cl.AssumptionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = output_dir(cfg.output["directory"])
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    stride = cfg.output["snapshot_stride"]
    t_final = cfg.discretization["t_final"]
    last = {"index": 0, "state": initial}

    def on_step(index, state):
        last["index"], last["state"] = index, state
        if stride and index % stride == 0:
            write_snapshot(snap_dir / f"{index:04d}.csv", state)

    meta = {"config": str(args.config), "config_hash": cfg.hash, "versions": _versions(),
            "dt": beam_prob.dt, "t_final": t_final, "n_beam": beam_prob.n_cells,
            "n_pore": diff_prob.n_cells}
    t0 = time.perf_counter()
    error = None
    try:
        report = run_simulation(initial, t_final, beam_prob, diff_prob, coupling, on_step)
    except SimulationError as exc:
        report, error = exc.report, exc
    meta["wall_time_s"] = round(time.perf_counter() - t0, 3)
    if stride and last["index"] % stride:
        write_snapshot(snap_dir / f"{last['index']:04d}.csv", last["state"])
    write_timeseries(out / "timeseries.csv", report)
    meta["rows"] = len(report.rows)

    if error is not None:
        doc = {"status": "solver_failure", "exit_code": EXIT_SOLVER, "error": report.error,
               "invariants": [], "metadata": meta}
        code = EXIT_SOLVER
        print(f"solver failure: {error}", file=sys.stderr)
    else:
        entries = evaluate_invariants(report, cfg) if cfg.checks["enabled"] else []
        ok = all(e.passed for e in entries)
        code = EXIT_OK if ok else EXIT_INVARIANT
        doc = {"status": "ok" if ok else "invariant_failure", "exit_code": code, "error": None,
               "invariants": [e.to_dict() for e in entries], "metadata": meta}
        for e in entries:
            print(f"{e.status:4} {e.name:<22} measured={e.measured:.6g} bound={e.bound:.6g} "
                  f"margin={e.margin:.3g}")
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} (exit {code})")
    return code


def cmd_verify(args) -> int:
    out = output_dir("out") / f"verify-{args.suite}"
    out.mkdir(parents=True, exist_ok=True)
    try:
        rows = run_suite(args.suite)
    except Exception as exc:  # solver or basis failure inside a ladder
        print(f"solver failure in suite {args.suite}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    header = ("suite", "check", "level", "value", "slope", "lower", "upper", "passed")
    _write_csv(out / "orders.csv", header,
               ([r.suite, r.check, r.level, r.value, r.slope, r.lower, r.upper,
                 "true" if r.passed else "false"] for r in rows))
    for r in rows:
        print(f"{'pass' if r.passed else 'FAIL'} {r.suite:<15} {r.check:<28} {r.level:<14} "
              f"value={r.value:.4e} slope={r.slope:.3f} band=[{r.lower:g}, {r.upper:g}]")
    if all(r.passed for r in rows):
        return EXIT_OK
    return EXIT_ORDER if args.suite.startswith("mms-") else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foamswell", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a coupled simulation from a config file")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run a verification suite and write orders.csv")
    v.add_argument("suite", choices=SUITES)
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("check-config", help="parse and validate a config file")
    c.add_argument("config")
    c.add_argument("--show-defaults", action="store_true", help="print the defaults table")
    c.set_defaults(func=cmd_check_config)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
