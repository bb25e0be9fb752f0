"""Run every shipped scenario through the CLI and summarise the invariants.

Each scenario writes to ``<out>/<name>``; ``--out`` defaults to ``out``.
"""
from __future__ import annotations

import argparse
import json
import os
from pathlib import Path

from foamswell.cli import main as cli_main

CONFIGS = Path(__file__).resolve().parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    worst = 0
    for cfg in sorted(CONFIGS.glob("*.ini")):
        target = Path(args.out) / cfg.stem
        os.environ["FOAMSWELL_OUT"] = str(target)
        code = cli_main(["run", str(cfg)])
        worst = max(worst, code)
        report = json.loads((target / "report.json").read_text())
        print(f"{cfg.stem:<12} exit={code} wall={report['metadata']['wall_time_s']} s")
    raise SystemExit(worst)


if __name__ == "__main__":
    main()
