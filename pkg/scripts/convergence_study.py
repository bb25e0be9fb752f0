"""Print every verification table: MMS ladders, lemma fuzz and the Galerkin cross-check.

``--suite`` restricts the output to one suite; the same tables are written
as CSV by ``foamswell verify <suite>``.
"""
from __future__ import annotations

import argparse
import time

from foamswell.verification import SUITES, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suite", choices=SUITES, action="append")
    args = ap.parse_args()
    for name in args.suite or SUITES:
        t0 = time.perf_counter()
        rows = run_suite(name)
        print(f"== {name} ({time.perf_counter() - t0:.1f} s)")
        for r in rows:
            flag = "ok  " if r.passed else "FAIL"
            label = "margin" if r.check.endswith("violations") else "slope"
            print(f"  {flag} {r.check:<28} {r.level:<14} value={r.value:.4e} {label}={r.slope:.3f}")


if __name__ == "__main__":
    main()
