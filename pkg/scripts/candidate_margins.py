#!/usr/bin/env python3
"""How far are the hunt's non-pure extremal candidates from the decision thresholds?

For every candidate in a hunt report this recomputes, independently of the
certificate, the smallest principal-angle sine between the compression space
and V (zero would mean non-extremal), the smallest relative singular value of
the brute-force constraint system P(UXU*) = Q(UXU*) = 0 over Hermitian X,
and the purity leak.  Large margins mean the verdicts are not tolerance
artifacts.

    python3 scripts/candidate_margins.py results/hunt_n3_s5.json
"""
from __future__ import annotations

import argparse

import numpy as np

from mts.extremality import compression_basis_from_range, hermitian_basis, test_pure_T29
from mts.fileformat import StateFile, decode_matrix
from mts.hsspace import principal_sines, range_basis
from mts.margstates import StateElement, basis_V, partial_trace_first, partial_trace_second


def constraint_margin(h, n, U):
    cols = []
    for E in hermitian_basis(U.shape[1]):
        x = U @ E @ U.conj().T
        cols.append(np.concatenate([partial_trace_second(x, n).ravel(),
                                    partial_trace_first(x, n).ravel()]))
    M = np.array(cols).T
    s = np.linalg.svd(np.vstack([M.real, M.imag]), compute_uv=False)
    return s[-1] / s[0]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("report")
    p.add_argument("--limit", type=int, default=None)
    args = p.parse_args()

    rep = StateFile.load(args.report)
    n = rep.n
    rows = []
    for c in rep.data["candidates"][: args.limit]:
        h = StateElement(n, decode_matrix(c["state"]))
        _, U, r = range_basis(h.h)
        w = np.linalg.eigvalsh(h.h)[::-1]
        sines, _ = principal_sines(compression_basis_from_range(U), basis_V(n))
        rows.append((c["trial"], r, w[r - 1] / w[0], w[r] / w[0] if r < w.size else 0.0,
                     sines[0], constraint_margin(h.h, n, U), test_pure_T29(h).max_leak))
    print("trial rank  lam_r/lam_1  lam_r+1/lam_1  min_sine  constraint_sv  purity_leak")
    for t, r, lr, lz, s, cm, leak in rows:
        print(f"{t:5d} {r:4d}  {lr:11.3e}  {lz:13.3e}  {s:8.2e}  {cm:13.2e}  {leak:11.3e}")
    if rows:
        a = np.array([row[1:] for row in rows], dtype=float)
        print(f"\n{len(rows)} candidates; smallest min_sine {a[:, 3].min():.2e}, smallest constraint "
              f"sv {a[:, 4].min():.2e}, smallest kept eigenvalue ratio {a[:, 1].min():.2e}, "
              f"largest discarded ratio {a[:, 2].max():.2e}, smallest leak {a[:, 5].min():.2e}")


if __name__ == "__main__":
    main()
