#!/usr/bin/env python3
"""Walk the tracial state (and a few samples) down to extreme points and print each step."""
from __future__ import annotations

import argparse

from mts.descent import descend
from mts.margstates import sample_mts, state_tau


def show(label, tr):
    c = tr.terminal_certificate
    print(f"{label}: {tr.status}, {len(tr.steps)} steps, terminal rank {c.rank}, pure={c.verdict_pure}")
    for i, s in enumerate(tr.steps):
        print(f"   step {i}: rank {s.rank_before} -> {s.rank_after}  t={s.step_size:.4g}  "
              f"sign={s.direction_sign:+d}  marginal residual {s.marginal_residual:.1e}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--samples", type=int, default=2)
    args = p.parse_args()
    for n in args.n:
        show(f"tau n={n}", descend(state_tau(n)))
        for seed in range(args.samples):
            for method in ("mixture", "project_shrink"):
                show(f"{method} n={n} seed={seed}", descend(sample_mts(n, seed, method)))


if __name__ == "__main__":
    main()
