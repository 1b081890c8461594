"""Command-line front end: ``mts gen|check|descend|hunt|schmidt|probe``.

Every command prints one JSON document on stdout and logs to stderr.
Exit codes: 0 success, 1 the two extremality tests (or the purity tests)
disagree, 2 usage or invalid input, 3 I/O, 4 descent did not terminate.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .descent import descend, hunt, probe_max, probe_problem
from .extremality import NotExtremalError, Tolerances, certify
from .fileformat import FileFormatError, StateFile, certificate_file, dumps, state_file, vector_file
from .margstates import NotMarginalError, StateElement, haar_unitary, mix, sample_mts, state_tau
from .schmidt import pure_mts_from_unitary, schmidt_report

log = logging.getLogger("mts")

EXIT_OK, EXIT_INCONSISTENT, EXIT_USAGE, EXIT_IO, EXIT_NONTERMINATION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _tols(args) -> Tolerances:
    t = Tolerances(args.tol, args.rank_tol, args.angle_tol, args.null_tol)
    if min(t.tol, t.rank_tol, t.angle_tol, t.null_tol) <= 0:
        raise UsageError("tolerances must be positive")
    return t


def _meta(args, **extra) -> dict:
    d = {"provenance": f"mts {__version__} {args.command}"}
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
    if hasattr(args, "tol"):
        d["tolerances"] = _tols(args).as_dict()
    d.update(extra)
    return d


def _load_state(path) -> StateElement:
    return StateFile.load(path).state()


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))
    sys.stdout.flush()


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if args.kind == "mix":
        if not args.inputs:
            raise UsageError("gen mix needs --inputs")
        states = [_load_state(p) for p in args.inputs]
        weights = args.weights or [1.0 / len(states)] * len(states)
        if len(weights) != len(states):
            raise UsageError("--weights must match --inputs")
        st = mix(states, weights)
        meta = _meta(args, inputs=list(args.inputs), weights=list(weights))
    else:
        if args.n is None or args.n < 2:
            raise UsageError("--n must be at least 2")
        if args.kind == "tau":
            st = state_tau(args.n)
            meta = _meta(args)
        elif args.kind == "pure":
            u = haar_unitary(args.n, np.random.default_rng(args.seed))
            xi, st = pure_mts_from_unitary(u)
            meta = _meta(args)
            if args.vector_out:
                vector_file(xi, **meta).save(args.vector_out)
        else:
            st = sample_mts(args.n, args.seed, args.method)
            meta = _meta(args, method=args.method)
    f = state_file(st, **meta)
    f.save(args.out)
    log.info("wrote %s state n=%d rank=%d to %s", args.kind, st.n, st.rank(), args.out)
    _emit({"out": str(args.out), "n": st.n, "rank": st.rank()})
    return EXIT_OK


def cmd_check(args) -> int:
    st = _load_state(args.state)
    cert = certify(st, _tols(args))
    if args.out:
        certificate_file(cert, st, **_meta(args, source=str(args.state))).save(args.out)
    _emit(cert.to_dict())
    if not cert.consistent:
        for msg in cert.inconsistencies:
            log.error("%s", msg)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_descend(args) -> int:
    st = _load_state(args.state)
    tr = descend(st, _tols(args), max_steps=args.max_steps)
    meta = _meta(args, source=str(args.state), status=tr.status)
    state_file(tr.terminal, **meta).save(args.out)
    if args.trace:
        StateFile(st.n, "trace", tr.to_dict(), meta).save(args.trace)
    cert = tr.terminal_certificate
    log.info("descent %s after %d steps, terminal rank %d", tr.status, len(tr.steps), cert.rank)
    _emit({"status": tr.status, "steps": len(tr.steps),
           "ranks": [s.rank_before for s in tr.steps] + [cert.rank],
           "terminal_certificate": cert.to_dict()})
    if tr.status != "extremal":
        return EXIT_NONTERMINATION
    return EXIT_OK if cert.consistent else EXIT_INCONSISTENT


def cmd_hunt(args) -> int:
    if args.trials < 1 or args.jobs < 1 or args.n < 2:
        raise UsageError("need --n >= 2, --trials >= 1, --jobs >= 1")
    t0 = time.perf_counter()
    report = hunt(args.n, args.trials, args.seed, _tols(args), jobs=args.jobs,
                  probe_samples=args.probe_samples,
                  candidate_probe_samples=args.candidate_probe_samples)
    log.info("hunt n=%d trials=%d done in %.1fs", args.n, args.trials, time.perf_counter() - t0)
    # jobs is deliberately left out of the file so that reports compare byte for byte
    StateFile(args.n, "report", report, _meta(args)).save(args.out)
    summary = {k: v for k, v in report.items() if k not in ("candidates", "records")}
    summary["out"] = str(args.out)
    _emit(summary)
    return EXIT_INCONSISTENT if report["inconsistent_count"] else EXIT_OK


def cmd_schmidt(args) -> int:
    xi = StateFile.load(args.vector).vector()
    try:
        rep = schmidt_report(xi)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(rep)
    return EXIT_OK


def cmd_probe(args) -> int:
    st = _load_state(args.state)
    tols = _tols(args)
    if args.k:
        res = probe_problem(st, _load_state(args.k), tols)
        _emit({"value": res.value, "projected_psd": res.projected_psd,
               "projected_marginal": res.projected_marginal})
    else:
        _emit(probe_max(st, args.samples, args.seed, tols))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_tol_flags(p):
    p.add_argument("--tol", type=float, default=1e-9, help="marginality tolerance")
    p.add_argument("--rank-tol", type=float, default=1e-9, help="relative eigenvalue cutoff")
    p.add_argument("--angle-tol", type=float, default=1e-9, help="principal angle cutoff (sine)")
    p.add_argument("--null-tol", type=float, default=1e-8,
                   help="relative singular value cutoff for kernels")


def _default_jobs() -> int:
    raw = os.environ.get("MTS_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mts", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a state file")
    g.add_argument("kind", choices=["tau", "pure", "mix", "sample"])
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--method", choices=["mixture", "project_shrink"], default="mixture")
    g.add_argument("--inputs", nargs="+", help="state files to mix")
    g.add_argument("--weights", nargs="+", type=float)
    g.add_argument("--vector-out", help="also write the vector of a pure state")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="certify a state")
    c.add_argument("state")
    c.add_argument("--out", help="also write a certificate file")
    _add_tol_flags(c)
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("descend", help="walk a state down to an extreme point")
    d.add_argument("state")
    d.add_argument("--out", required=True, help="terminal state file")
    d.add_argument("--trace", help="trace file")
    d.add_argument("--max-steps", type=int)
    _add_tol_flags(d)
    d.set_defaults(func=cmd_descend)

    h = sub.add_parser("hunt", help="seeded search for non-pure extreme points")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--trials", type=int, required=True)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--jobs", type=int, default=_default_jobs(), help="default: $MTS_JOBS or 1")
    h.add_argument("--probe-samples", type=int, default=16)
    h.add_argument("--candidate-probe-samples", type=int, default=1000)
    h.add_argument("--out", required=True)
    _add_tol_flags(h)
    h.set_defaults(func=cmd_hunt)

    s = sub.add_parser("schmidt", help="Schmidt decomposition of a vector file")
    s.add_argument("vector")
    s.set_defaults(func=cmd_schmidt)

    q = sub.add_parser("probe", help="trace-norm probe on an extremal state")
    q.add_argument("state")
    q.add_argument("--k", help="state supported on the range of STATE; default: random samples")
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    _add_tol_flags(q)
    q.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, FileFormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (UsageError, NotMarginalError, NotExtremalError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
