"""Descent to extreme points of the set of marginal tracial states, and the conjecture hunt.

A non-extremal state ``h`` has a unit Hermitian direction ``v`` in
``R (B(x)B) R`` intersected with ``V``.  Moving along ``-v`` (or ``+v``)
keeps ``P(h) = Q(h) = I`` and ``tau(h) = 1``; stopping exactly where ``h``
loses positivity lowers its rank by at least one.  Repeating reaches an
extreme point in at most ``rank(h)`` steps.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .extremality import (
    DEFAULT_TOLS,
    Certificate,
    NotExtremalError,
    Tolerances,
    certify,
    test_extremal_T23,
)
from .fileformat import encode_matrix
from .hsspace import dag, range_basis, tau
from .margstates import (
    NotMarginalError,
    StateElement,
    check_marginal,
    proj_CI_plus_V,
    sample_mts,
)

log = logging.getLogger(__name__)

ILL_CONDITIONED = 1e-10


@dataclass
class DescentStep:
    rank_before: int
    rank_after: int
    step_size: float
    direction_norm: float
    direction_sign: int
    marginal_residual: float
    trace_residual: float
    min_eigenvalue: float


@dataclass
class DescentTrace:
    steps: list
    terminal: StateElement
    terminal_certificate: Certificate
    seed: int | None = None
    status: str = "extremal"

    @property
    def ok(self) -> bool:
        return self.status == "extremal"

    def to_dict(self) -> dict:
        return {
            "steps": [asdict(s) for s in self.steps],
            "terminal": encode_matrix(self.terminal.h),
            "terminal_certificate": self.terminal_certificate.to_dict(),
            "seed": self.seed,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "DescentTrace":
        from .fileformat import decode_matrix

        return cls(
            steps=[DescentStep(**s) for s in d["steps"]],
            terminal=StateElement(n, decode_matrix(d["terminal"])),
            terminal_certificate=Certificate.from_dict(d["terminal_certificate"]),
            seed=d.get("seed"),
            status=d.get("status", "extremal"),
        )


def _bisect_step(g: np.ndarray, vv: np.ndarray, sign: int) -> float:
    """Largest ``t`` with ``g - sign * t * vv`` PSD, by bisection on the minimum eigenvalue."""
    lam = np.linalg.eigvalsh(g)[-1]

    def feasible(t):
        return np.linalg.eigvalsh(g - sign * t * vv)[0] >= -1e-14 * lam

    hi = lam / max(np.linalg.norm(vv, 2), 1e-300)
    while feasible(hi):
        hi *= 2
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo


def boundary_steps(h: np.ndarray, v: np.ndarray, U: np.ndarray) -> tuple[float, float]:
    """Maximal step sizes ``(t_minus, t_plus)`` keeping ``h -/+ t v`` PSD.

    ``v`` must be supported on the range ``U`` of ``h``; the problem then
    reduces to the generalized eigenvalues of ``(U* v U, U* h U)``.
    """
    g = dag(U) @ h @ U
    g = 0.5 * (g + dag(g))
    vv = dag(U) @ v @ U
    vv = 0.5 * (vv + dag(vv))
    w = np.linalg.eigvalsh(g)
    if w[0] / w[-1] < ILL_CONDITIONED:
        return _bisect_step(g, vv, 1), _bisect_step(g, vv, -1)
    mu = scipy.linalg.eigh(vv, g, eigvals_only=True)
    t_minus = 1.0 / mu[-1] if mu[-1] > 0 else np.inf
    t_plus = -1.0 / mu[0] if mu[0] < 0 else np.inf
    return t_minus, t_plus


def _step(state: StateElement, v: np.ndarray, tols: Tolerances):
    h = state.h
    _, U, r = range_basis(h, tols.rank_tol)
    t_minus, t_plus = boundary_steps(h, v, U)
    if not (np.isfinite(t_minus) and np.isfinite(t_plus)):
        # an unbounded direction would leave the compact set of states
        raise RuntimeError("witness direction is unbounded; witness is not in V")
    sign = -1 if t_minus >= t_plus else 1
    t = t_minus if sign < 0 else t_plus
    h_new = h + sign * t * v
    h_new = 0.5 * (h_new + dag(h_new))
    return h_new, t, sign, r


def descend(state: StateElement, tols: Tolerances = DEFAULT_TOLS,
            max_steps: int | None = None, seed: int | None = None) -> DescentTrace:
    """Walk from ``state`` to an extreme point, recording every step."""
    n = state.n
    rep = check_marginal(state, tols.tol)
    if not rep.is_marginal_tracial:
        raise NotMarginalError("descent requires a marginal tracial state")
    if max_steps is None:
        max_steps = n * n
    cur = StateElement(n, state.h, tols.rank_tol)
    steps: list[DescentStep] = []
    status = "extremal"
    while True:
        t23 = test_extremal_T23(cur, tols)
        if t23.extremal:
            break
        if len(steps) >= max_steps:
            status = "max_steps"
            break
        v = t23.witness
        h_new, t, sign, r = _step(cur, v, tols)
        r_new = range_basis(h_new, tols.rank_tol)[2]
        if r_new >= r:
            # one retry with a tighter rank threshold before calling it a stall
            tight = Tolerances(tols.tol, tols.rank_tol / 10, tols.angle_tol, tols.null_tol)
            t23 = test_extremal_T23(cur, tight)
            if not t23.extremal:
                h_new, t, sign, r = _step(cur, t23.witness, tight)
                v = t23.witness
                r_new = range_basis(h_new, tols.rank_tol)[2]
            if r_new >= r:
                log.warning("descent stalled at rank %d", r)
                status = "stalled"
                break
        try:
            nxt = StateElement(n, h_new, tols.rank_tol)
        except ValueError as exc:
            log.warning("descent step left the state space: %s", exc)
            status = "invalid_step"
            break
        mrep = check_marginal(nxt, tols.tol)
        w = np.linalg.eigvalsh(nxt.h)
        steps.append(DescentStep(
            rank_before=r, rank_after=r_new, step_size=float(t),
            direction_norm=float(np.linalg.norm(v) / np.sqrt(n * n)),
            direction_sign=sign,
            marginal_residual=max(mrep.p_residual, mrep.q_residual),
            trace_residual=float(abs(tau(nxt.h) - 1)),
            min_eigenvalue=float(w[0] / w[-1]),
        ))
        cur = nxt
    return DescentTrace(steps, cur, certify(cur, tols), seed, status)


# --------------------------------------------------------------------------
# the trace-norm probe


class ProbeResult(NamedTuple):
    value: float
    projected_psd: bool
    projected_marginal: bool | None


def _compression_check(h0: StateElement, k: StateElement, tols: Tolerances):
    if k.n != h0.n:
        raise ValueError("k and h0 must share n")
    R, _, _ = range_basis(h0.h, tols.rank_tol)
    if np.linalg.norm(R @ k.h @ R - k.h) > 1e-8 * max(1.0, np.linalg.norm(k.h)):
        raise ValueError("k is not supported on the range of h0")


def _probe_value(k: np.ndarray, n: int, tols: Tolerances) -> ProbeResult:
    ell = proj_CI_plus_V(k, n)
    ell = 0.5 * (ell + dag(ell))
    w = np.linalg.eigvalsh(ell)
    value = float(np.abs(w).sum() / w.size)  # trace norm of a Hermitian matrix
    psd = bool(w[0] >= -tols.rank_tol * max(abs(w[-1]), 1.0))
    marginal = None
    if value <= 1 + tols.tol:
        marginal = psd and check_marginal(StateElement(n, ell, 1.0), tols.tol).is_marginal_tracial
    return ProbeResult(value, psd, marginal)


def probe_problem(h0: StateElement, k: StateElement, tols: Tolerances = DEFAULT_TOLS,
                  check_extremal: bool = True) -> ProbeResult:
    """Trace norm of ``(I - (P-Q)^2)(k)`` for a state ``k`` supported on the range of ``h0``.

    The projected element is always a trace-one Hermitian element of
    ``C I + V``; it is a marginal tracial state exactly when the returned
    value is at most one.
    """
    if check_extremal and not test_extremal_T23(h0, tols).extremal:
        raise NotExtremalError("probe requires an extremal marginal tracial state")
    _compression_check(h0, k, tols)
    return _probe_value(k.h, k.n, tols)


def random_compressed_states(h0: StateElement, rng: np.random.Generator, count: int,
                             rank_tol: float = 1e-9, U: np.ndarray | None = None) -> np.ndarray:
    """``count`` random densities ``U X U*`` (``tau = 1``) on the range ``U`` of ``h0``.

    Returns an array of shape (count, n^2, n^2).
    """
    if U is None:
        _, U, _ = range_basis(h0.h, rank_tol)
    r = U.shape[1]
    g = rng.standard_normal((count, r, r)) + 1j * rng.standard_normal((count, r, r))
    x = U @ (g @ g.conj().transpose(0, 2, 1)) @ dag(U)
    x = 0.5 * (x + x.conj().transpose(0, 2, 1))
    tr = np.trace(x, axis1=1, axis2=2).real / x.shape[-1]
    return x / tr[:, None, None]


def probe_max(h0: StateElement, samples: int, seed: int,
              tols: Tolerances = DEFAULT_TOLS, chunk: int = 250) -> dict:
    """Largest probe value over ``k = h0`` and ``samples`` random states on its range."""
    if not test_extremal_T23(h0, tols).extremal:
        raise NotExtremalError("probe requires an extremal marginal tracial state")
    rng = np.random.default_rng(seed)
    n = h0.n
    _, U, r = range_basis(h0.h, tols.rank_tol)
    base = _probe_value(h0.h, n, tols)
    best, exceed = base.value, 0
    # a rank-one h0 admits no other state on its range
    count = samples if r > 1 else 0
    for start in range(0, count, chunk):
        ks = random_compressed_states(h0, rng, min(chunk, count - start), U=U)
        ell = proj_CI_plus_V(ks, n)
        w = np.linalg.eigvalsh(0.5 * (ell + ell.conj().transpose(0, 2, 1)))
        values = np.abs(w).sum(axis=1) / w.shape[1]
        best = max(best, float(values.max()))
        exceed += int(np.sum(values > 1 + tols.tol))
    return {"max_value": best, "samples": count, "exceed_count": exceed,
            "value_at_h0": base.value}


# --------------------------------------------------------------------------
# the hunt


def trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint32)[0])


@dataclass
class HuntConfig:
    n: int
    trials: int
    seed: int
    tols: Tolerances = field(default_factory=Tolerances)
    probe_samples: int = 16
    candidate_probe_samples: int = 1000


def run_trial(cfg: HuntConfig, index: int) -> dict:
    method = "mixture" if index % 2 == 0 else "project_shrink"
    sseed = trial_seed(cfg.seed, index)
    rec = {"trial": index, "method": method, "sample_seed": sseed}
    try:
        h = sample_mts(cfg.n, sseed, method)
        tr = descend(h, cfg.tols, seed=sseed)
    except Exception as exc:  # recorded per trial, never fatal
        rec.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return rec
    cert = tr.terminal_certificate
    rec.update(
        status=tr.status,
        initial_rank=tr.steps[0].rank_before if tr.steps else cert.rank,
        steps=len(tr.steps),
        terminal_rank=cert.rank,
        extremal_T23=cert.verdict_extremal_T23,
        extremal_A2=cert.verdict_extremal_A2,
        pure=cert.verdict_pure,
        pure_conditions=cert.pure_conditions,
        consistent=cert.consistent,
        max_marginal_residual=max((s.marginal_residual for s in tr.steps), default=0.0),
    )
    if cert.extremal:
        rec["probe"] = probe_max(tr.terminal, cfg.probe_samples, sseed, cfg.tols)
    if cert.extremal and cert.verdict_pure is False:
        recheck = certify(tr.terminal, cfg.tols.scaled(0.1))
        rec["candidate"] = {
            "state": encode_matrix(tr.terminal.h),
            "certificate": cert.to_dict(),
            "recheck_certificate": recheck.to_dict(),
            "recheck_confirms": bool(recheck.extremal and recheck.verdict_pure is False
                                     and recheck.consistent),
            "probe": probe_max(tr.terminal, cfg.candidate_probe_samples, sseed + 1, cfg.tols),
            "trace": [asdict(s) for s in tr.steps],
        }
    return rec


def _run_trial_args(args):
    return run_trial(*args)


def hunt(n: int, trials: int, seed: int, tols: Tolerances = DEFAULT_TOLS, jobs: int = 1,
         probe_samples: int = 16, candidate_probe_samples: int = 1000) -> dict:
    """Sample, descend and certify ``trials`` states; aggregate a deterministic report.

    Trial ``i`` uses the sampler ``mixture`` for even ``i`` and
    ``project_shrink`` for odd ``i`` with a seed derived from ``(seed, i)``,
    so the report does not depend on ``jobs``.
    """
    if n < 2 or trials < 1 or jobs < 1:
        raise ValueError("need n >= 2, trials >= 1, jobs >= 1")
    cfg = HuntConfig(n, trials, seed, tols, probe_samples, candidate_probe_samples)
    args = [(cfg, i) for i in range(trials)]
    if jobs == 1:
        records = [run_trial(cfg, i) for i in range(trials)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_run_trial_args, args, chunksize=max(1, trials // (4 * jobs))))
    return summarize(cfg, records)


def summarize(cfg: HuntConfig, records: list) -> dict:
    hist: dict[str, int] = {}
    extremal = [r for r in records if r.get("extremal_T23") and r.get("extremal_A2")]
    for r in extremal:
        key = str(r["terminal_rank"])
        hist[key] = hist.get(key, 0) + 1
    probes = [r["probe"]["max_value"] for r in records if "probe" in r]
    probes += [r["candidate"]["probe"]["max_value"] for r in records if "candidate" in r]
    candidates = [dict(r["candidate"], trial=r["trial"]) for r in records if "candidate" in r]
    return {
        "n": cfg.n,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "tolerances": cfg.tols.as_dict(),
        "probe_samples": cfg.probe_samples,
        "candidate_probe_samples": cfg.candidate_probe_samples,
        "extremal_count": len(extremal),
        "pure_count": sum(1 for r in extremal if r.get("pure") is True),
        "candidate_count": len(candidates),
        "inconsistent_count": sum(1 for r in records if r.get("consistent") is False),
        "failure_count": sum(1 for r in records if r.get("status") != "extremal"),
        "rank_histogram": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
        "max_probe_value": max(probes) if probes else None,
        "candidates": candidates,
        "records": [{k: v for k, v in r.items() if k != "candidate"} for r in records],
    }
