"""Mass drift of the reference scenario under dt halving and joint (h, dt) refinement."""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from foamswell.config import parse_config
from foamswell.coupling import run_simulation

REFERENCE = Path(__file__).resolve().parent / "configs" / "reference.ini"


def drift(n: int, dt: float, t_final: float) -> tuple[float, float]:
    text = REFERENCE.read_text()
    text = (text.replace("n_beam = 128", f"n_beam = {n}").replace("n_pore = 128", f"n_pore = {n}")
            .replace("dt = 1e-3", f"dt = {dt!r}").replace("t_final = 1.0", f"t_final = {t_final!r}"))
    cfg = parse_config(text)
    beam, pore, cc = cfg.problems()
    m = run_simulation(cfg.initial_state(), t_final, beam, pore, cc).column("mass")
    return float(np.max(np.abs(m - m[0]))), float(m[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-final", type=float, default=1.0)
    args = ap.parse_args()
    print("dt halving at N=64")
    prev = None
    for dt in (8e-3, 4e-3, 2e-3, 1e-3):
        d, m0 = drift(64, dt, args.t_final)
        ratio = "" if prev is None else f"ratio {prev / d:.3f}"
        print(f"  dt={dt:<7g} drift={d:.4e} rel={d / m0:.3e} {ratio}")
        prev = d
    print("joint refinement (h, dt)")
    for n, dt in ((16, 8e-3), (32, 4e-3), (64, 2e-3), (128, 1e-3)):
        d, m0 = drift(n, dt, args.t_final)
        print(f"  N={n:<4d} dt={dt:<7g} drift={d:.4e} rel={d / m0:.3e}")


if __name__ == "__main__":
    main()
