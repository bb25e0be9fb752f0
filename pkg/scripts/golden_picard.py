"""Record the Picard residual history of the moderate-coupling desk case.

Desk case: k = 1, gamma = 0.01, k_v = 0.5, kappa = 1, c_nu = 0.1 (the
reference configuration at N = 64, dt = 0.01). The first ten steps are
written to tests/golden/picard_desk.json; the test suite replays them.
"""
from __future__ import annotations

import json
from pathlib import Path

from foamswell.config import parse_config
from foamswell.coupling import coupled_step

ROOT = Path(__file__).resolve().parents[1]
STEPS = 10


def desk_config():
    text = (ROOT / "scripts" / "configs" / "reference.ini").read_text()
    text = (text.replace("n_beam = 128", "n_beam = 64").replace("n_pore = 128", "n_pore = 64")
            .replace("dt = 1e-3", "dt = 1e-2"))
    return parse_config(text)


def picard_history(steps: int = STEPS) -> list[dict]:
    cfg = desk_config()
    beam, pore, coupling = cfg.problems()
    state = cfg.initial_state()
    log = []
    for _ in range(steps):
        state, rep = coupled_step(state, beam, pore, coupling)
        log.append({"t": state.t, "iterations": rep.iterations, "residuals": rep.residuals,
                    "relaxation": rep.relaxation})
    return log


def main():
    out = ROOT / "tests" / "golden" / "picard_desk.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    hist = picard_history()
    out.write_text(json.dumps(hist, indent=1) + "\n")
    for row in hist:
        res = ", ".join(f"{r:.2e}" for r in row["residuals"])
        print(f"t={row['t']:.2f} iters={row['iterations']} residuals=[{res}]")


if __name__ == "__main__":
    main()
