"""Locate a time step that makes the strongly coupled first step fail.

Scans dt on a doubling ladder, then bisects between the last passing and the
first failing value. The failure is not monotone in dt (very large steps can
land close to the static solution and pass again), so the reported fixture
value is taken from inside the failing band found by the scan.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from foamswell.config import parse_config
from foamswell.coupling import SimulationError, run_simulation

BASE = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "huge_dt.ini"


def fails(dt: float, text: str) -> str | None:
    text = text.replace("dt = 8.0", f"dt = {dt!r}").replace("t_final = 8.0", f"t_final = {dt!r}")
    cfg = parse_config(text)
    beam, pore, coupling = cfg.problems()
    try:
        run_simulation(cfg.initial_state(), dt, beam, pore, coupling)
    except SimulationError as exc:
        return exc.report.error
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=0.05, help="bisection width")
    args = ap.parse_args()
    text = BASE.read_text()
    lo, hi = None, None
    dt = 0.25
    while dt <= 64.0:
        err = fails(dt, text)
        print(f"scan dt={dt:<8g} {'FAIL ' + err if err else 'ok'}")
        if err and hi is None:
            hi = dt
            break
        lo = dt
        dt *= 2.0
    if hi is None:
        print("no failure found on the ladder")
        return
    while hi - lo > args.tol:
        mid = 0.5 * (lo + hi)
        if fails(mid, text):
            hi = mid
        else:
            lo = mid
    print(f"first failure between dt={lo:.4g} (ok) and dt={hi:.4g} (fail)")
    for probe in (4.0, 5.0, 6.0, 8.0, 10.0):
        err = fails(probe, text)
        print(f"probe dt={probe:<5g} {'FAIL' if err else 'ok'}")


if __name__ == "__main__":
    main()
