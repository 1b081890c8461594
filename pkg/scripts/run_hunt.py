#!/usr/bin/env python3
"""Run the seeded descent hunt and print a short summary.

    python3 scripts/run_hunt.py --n 3 --trials 1000 --seed 5 --out results/hunt_n3_s5.json
"""
from __future__ import annotations

import argparse
import os
import time
from pathlib import Path

from mts.descent import hunt
from mts.extremality import Tolerances
from mts.fileformat import StateFile


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=int(os.getenv("MTS_JOBS", 1)))
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=Path, default=None)
    args = p.parse_args()

    tols = Tolerances(args.tol, args.tol, args.tol)
    t0 = time.perf_counter()
    rep = hunt(args.n, args.trials, args.seed, tols, jobs=args.jobs)
    dt = time.perf_counter() - t0

    print(f"n={rep['n']} trials={rep['trials']} seed={rep['seed']} ({dt:.1f}s)")
    print(f"  extremal terminals  {rep['extremal_count']}")
    print(f"  pure                {rep['pure_count']}")
    print(f"  non-pure candidates {rep['candidate_count']}")
    print(f"  failures            {rep['failure_count']}")
    print(f"  inconsistencies     {rep['inconsistent_count']}")
    print(f"  terminal ranks      {rep['rank_histogram']}")
    if rep["max_probe_value"] is not None:
        print(f"  max probe value     {rep['max_probe_value']:.6f}")
    confirmed = sum(c["recheck_confirms"] for c in rep["candidates"])
    print(f"  candidates confirmed at tol/10: {confirmed}/{rep['candidate_count']}")

    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        StateFile(args.n, "report", rep, {"provenance": "scripts/run_hunt.py"}).save(args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
