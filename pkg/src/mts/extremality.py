"""Extremality and purity certificates for marginal tracial states.

Two independent extremality tests are implemented:

* ``test_extremal_T23`` intersects the compression space ``R (B(x)B) R``
  (``R`` the range projection of ``h``) with ``V = N (x) N`` using principal
  angles.  ``h`` is extremal iff the intersection is zero.
* ``test_extremal_A2`` writes ``h`` in pivoted block form
  ``[[K, KA], [A*K, A*KA]]`` and looks for a nonzero Hermitian ``L`` whose
  lift ``[[L, LA], [A*L, A*LA]]`` lies in ``V``.  This is a homogeneous real
  linear system with ``2n^2 - 1`` equations in ``r^2`` unknowns.

Both tests are run by :func:`certify`, which also decides purity of extremal
states via the invariance of the compression space under ``I - (P-Q)^2``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .hsspace import (
    DEFAULT_ANGLE_TOL,
    DEFAULT_RANK_TOL,
    SubspaceBasis,
    dag,
    hs_norm,
    range_basis,
    sqrt_spectral,
    subspace_intersection,
    tau,
)
from .margstates import (
    NotMarginalError,
    StateElement,
    basis_CI_offdiag,
    basis_offdiag,
    basis_V,
    check_marginal,
    cond_exp_P,
    cond_exp_Q,
    proj_CI_plus_V,
    proj_offdiag,
)


class NotExtremalError(ValueError):
    pass


class BlockFormError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    tol: float = 1e-9
    rank_tol: float = DEFAULT_RANK_TOL
    angle_tol: float = DEFAULT_ANGLE_TOL
    null_tol: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(*(factor * v for v in asdict(self).values()))

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLS = Tolerances()


def _range(state: StateElement, tols: Tolerances):
    return range_basis(state.h, tols.rank_tol)


def project_V(x: np.ndarray, n: int) -> np.ndarray:
    """HS-orthogonal projection onto ``V``: ``x - P(x) - Q(x) + tau(x) I``."""
    return x - cond_exp_P(x, n) - cond_exp_Q(x, n) + tau(x) * np.eye(n * n)


# --------------------------------------------------------------------------
# compression space and the intersection test


def compression_basis_from_range(U: np.ndarray) -> SubspaceBasis:
    """``{sqrt(m) u_i u_j*}`` for orthonormal columns ``u_i`` of ``U``."""
    m, r = U.shape
    vecs = np.einsum("ai,bj->ijab", U, U.conj()).reshape(r * r, m, m) * np.sqrt(m)
    return SubspaceBasis(vecs, m)


def compression_basis(R: np.ndarray, r: int, tol: float = 1e-10) -> SubspaceBasis:
    """HS-orthonormal basis of ``R (B(x)B) R`` for a rank-``r`` orthogonal projection ``R``."""
    R = np.asarray(R, dtype=complex)
    if np.linalg.norm(R @ R - R) > tol * max(1, r) or np.linalg.norm(R - dag(R)) > tol:
        raise ValueError("R is not an orthogonal projection")
    w, u = np.linalg.eigh(0.5 * (R + dag(R)))
    if int(np.sum(w > 0.5)) != r:
        raise ValueError(f"R does not have rank {r}")
    return compression_basis_from_range(u[:, w > 0.5])


def hermitize(w: np.ndarray) -> np.ndarray:
    """Unit-norm Hermitian element of ``span{w, w*}``: the larger of ``w + w*`` and ``i(w - w*)``."""
    a = w + dag(w)
    b = 1j * (w - dag(w))
    v = a if hs_norm(a) >= hs_norm(b) else b
    return v / hs_norm(v)


def polish_witness(v: np.ndarray, R: np.ndarray, n: int, rounds: int = 4) -> np.ndarray:
    """Alternate projections onto ``V`` and the compression space, ending in the latter."""
    for _ in range(rounds):
        v = R @ project_V(v, n) @ R
        v = 0.5 * (v + dag(v))
    return v / hs_norm(v)


def witness_residuals(v: np.ndarray, R: np.ndarray, n: int) -> dict:
    return {
        "witness_hermitian": hs_norm(v - dag(v)),
        "witness_norm_defect": abs(hs_norm(v) - 1.0),
        "witness_compression": hs_norm(v - R @ v @ R),
        "witness_P_plus_Q": hs_norm(cond_exp_P(v, n) + cond_exp_Q(v, n)),
    }


class T23Result(NamedTuple):
    extremal: bool
    intersection_dim: int
    witness: np.ndarray | None


def _require_marginal(state: StateElement, tols: Tolerances):
    rep = check_marginal(state, tols.tol)
    if not rep.is_marginal_tracial:
        raise NotMarginalError(
            f"state is not marginal tracial (P residual {rep.p_residual:.2e}, "
            f"Q residual {rep.q_residual:.2e})")


def test_extremal_T23(state: StateElement, tols: Tolerances = DEFAULT_TOLS) -> T23Result:
    """Extremal iff ``R (B(x)B) R`` meets ``V`` only in zero."""
    _require_marginal(state, tols)
    R, U, r = _range(state, tols)
    inter = subspace_intersection(compression_basis_from_range(U), basis_V(state.n),
                                  tols.angle_tol)
    if len(inter) == 0:
        return T23Result(True, 0, None)
    v = polish_witness(hermitize(inter.vectors[0]), R, state.n)
    return T23Result(False, len(inter), v)


# keep pytest from collecting these when imported into a test module
test_extremal_T23.__test__ = False


# --------------------------------------------------------------------------
# block form and the Hermitian-lift test


@dataclass(frozen=True)
class BlockForm:
    perm: np.ndarray
    K: np.ndarray
    A: np.ndarray
    residual: float

    @property
    def rank(self) -> int:
        return self.K.shape[0]

    def lift_map(self) -> np.ndarray:
        """``F`` (r x m) with ``sigma^-1 [[L, LA], [A*L, A*LA]] sigma = F* L F``."""
        r, m = self.K.shape[0], self.perm.size
        F = np.zeros((r, m), dtype=complex)
        F[:, self.perm[:r]] = np.eye(r)
        F[:, self.perm[r:]] = self.A
        return F

    def lift(self, L: np.ndarray) -> np.ndarray:
        F = self.lift_map()
        return dag(F) @ L @ F

    def assemble(self) -> np.ndarray:
        """``[[K, KA], [A*K, A*KA]]`` in permuted coordinates."""
        K, A = self.K, self.A
        KA = K @ A
        return np.block([[K, KA], [dag(A) @ K, dag(A) @ KA]])


def pivoted_selection(h: np.ndarray, r: int) -> np.ndarray:
    """Complete-pivoting symmetric elimination order; the first ``r`` entries index ``K``."""
    H = np.array(h, dtype=complex)
    m = H.shape[0]
    perm = np.arange(m)
    for k in range(r):
        j = k + int(np.argmax(np.diagonal(H).real[k:]))
        if j != k:
            H[[k, j]] = H[[j, k]]
            H[:, [k, j]] = H[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
        piv = H[k, k].real
        if piv <= 0:
            break
        H[k + 1:, k + 1:] -= np.outer(H[k + 1:, k], H[k, k + 1:]) / piv
    return perm


def block_form(state: StateElement, tols: Tolerances = DEFAULT_TOLS) -> BlockForm:
    h = state.h
    m = h.shape[0]
    _, _, r = _range(state, tols)
    if r >= m:
        raise BlockFormError("full-rank state has no block form (A would be empty)")
    perm = pivoted_selection(h, r)
    S, Sc = perm[:r], perm[r:]
    K = h[np.ix_(S, S)]
    kmin = np.linalg.eigvalsh(K)[0]
    if kmin <= tols.rank_tol * np.linalg.eigvalsh(h)[-1]:
        raise BlockFormError(f"no invertible {r}x{r} principal block found (lambda_min {kmin:.2e})")
    A = np.linalg.solve(K, h[np.ix_(S, Sc)])
    bf = BlockForm(perm, K, A, 0.0)
    res = float(np.linalg.norm(h[np.ix_(perm, perm)] - bf.assemble()))
    if res > 1e-10 * np.linalg.norm(h):
        raise BlockFormError(f"block form reassembly residual {res:.2e} too large")
    return replace(bf, residual=res)


def hermitian_basis(r: int) -> np.ndarray:
    """Real-orthonormal basis of r x r Hermitian matrices under ``Re Tr(a* b)``."""
    out = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for i in range(r):
        for j in range(i + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = e[j, i] = s
            out.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[i, j], e[j, i] = -1j * s, 1j * s
            out.append(e)
    return np.array(out).reshape(-1, r, r)


class A2Result(NamedTuple):
    extremal: bool
    kernel_dim: int
    L_witness: np.ndarray | None
    lifted: np.ndarray | None
    block: BlockForm


def lift_constraints(bf: BlockForm, n: int) -> np.ndarray:
    """Real matrix of ``tau(b F* E F)`` over ``b`` in ``{I} + basis_offdiag`` and Hermitian ``E``."""
    F = bf.lift_map()
    m = F.shape[1]
    cons = basis_CI_offdiag(n).vectors
    G = np.einsum("im,smk,jk->sij", F, cons, F.conj())  # F b F*
    E = hermitian_basis(bf.rank)
    return np.einsum("sij,tji->st", G, E).real / m


def test_extremal_A2(state: StateElement, tols: Tolerances = DEFAULT_TOLS) -> A2Result:
    """Extremal iff no nonzero Hermitian ``L`` lifts into ``V``."""
    _require_marginal(state, tols)
    bf = block_form(state, tols)
    C = lift_constraints(bf, state.n)
    r2 = C.shape[1]
    _, s, Vh = np.linalg.svd(C, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tols.null_tol * smax)) if smax > 0 else 0
    kdim = r2 - rank
    if kdim == 0:
        return A2Result(True, 0, None, None, bf)
    c = Vh[rank]
    L = np.einsum("t,tij->ij", c, hermitian_basis(bf.rank))
    D = bf.lift(L)
    scale = hs_norm(D)
    return A2Result(False, kdim, L / scale, D / scale, bf)


test_extremal_A2.__test__ = False


# --------------------------------------------------------------------------
# purity of extremal states


class T29Result(NamedTuple):
    pure: bool
    max_leak: float
    image_residual: float | None


def _require_extremal(state: StateElement, tols: Tolerances):
    _require_marginal(state, tols)
    if not test_extremal_T23(state, tols).extremal:
        raise NotExtremalError("purity tests require an extremal marginal tracial state")


def range_sqrt(h: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``h^1/2`` computed on the numerical range ``U`` so roundoff in the kernel stays zero."""
    g = dag(U) @ h @ U
    return U @ sqrt_spectral(0.5 * (g + dag(g))) @ dag(U)


def _scale(h: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(h, 2)))


def test_pure_T29(state: StateElement, tols: Tolerances = DEFAULT_TOLS,
                  check_extremal: bool = True) -> T29Result:
    """Pure iff ``I - (P-Q)^2`` maps the compression space into itself."""
    if check_extremal:
        _require_extremal(state, tols)
    n, h = state.n, state.h
    R, U, _ = _range(state, tols)
    leak = 0.0
    images = []
    for b in compression_basis_from_range(U):
        pb = proj_CI_plus_V(b, n)
        images.append((b, pb))
        leak = max(leak, hs_norm(pb - R @ pb @ R))
    pure = leak <= tols.tol * _scale(h)
    image_res = None
    if pure:
        image_res = max(hs_norm(pb - tau(b) * h) for b, pb in images)
    return T29Result(pure, leak, image_res)


test_pure_T29.__test__ = False


def test_pure_C210(state: StateElement, tols: Tolerances = DEFAULT_TOLS,
                   check_extremal: bool = True) -> tuple[dict, dict]:
    """Evaluate the four equivalent purity conditions on an extremal state.

    Returns ``(conditions, residuals)`` keyed by ``"ii"``, ``"iii"``, ``"iv"``, ``"v"``:

    ii   Pi(k) = tau(k) Pi(h) for k in the compression space
    iii  Pi(h^1/2 w h^1/2) = 0 for w in N(x)I + I(x)N
    iv   h^1/2 w h^1/2 lies in N(x)I + I(x)N
    v    h^1/2 (CI + V) h^1/2 lies in CI + V

    with ``Pi = I - (P-Q)^2``.
    """
    if check_extremal:
        _require_extremal(state, tols)
    n, h = state.n, state.h
    _, U, _ = _range(state, tols)
    ph = proj_CI_plus_V(h, n)
    sq = range_sqrt(h, U)
    res = {"ii": 0.0, "iii": 0.0, "iv": 0.0, "v": 0.0}
    for k in compression_basis_from_range(U):
        res["ii"] = max(res["ii"], hs_norm(proj_CI_plus_V(k, n) - tau(k) * ph))
    for w in basis_offdiag(n):
        x = sq @ w @ sq
        res["iii"] = max(res["iii"], hs_norm(proj_CI_plus_V(x, n)))
        res["iv"] = max(res["iv"], hs_norm(x - proj_offdiag(x, n)))
    for y in np.concatenate([np.eye(n * n)[None], basis_V(n).vectors]):
        res["v"] = max(res["v"], hs_norm(proj_offdiag(sq @ y @ sq, n)))
    thr = tols.tol * _scale(h)
    return {k: bool(v <= thr) for k, v in res.items()}, res


test_pure_C210.__test__ = False


def compressed_offdiag_span_dim(state: StateElement, tols: Tolerances = DEFAULT_TOLS) -> int:
    """``dim span{R x R : x in {I} + basis_offdiag(n)}``; equals ``r^2`` at extreme points."""
    R, _, _ = _range(state, tols)
    M = np.array([(R @ x @ R).reshape(-1) for x in basis_CI_offdiag(state.n)])
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tols.null_tol * s[0]))


# --------------------------------------------------------------------------
# certificate


@dataclass
class Certificate:
    n: int
    rank: int
    verdict_marginal: bool
    verdict_extremal_T23: bool | None = None
    verdict_extremal_A2: bool | None = None
    verdict_pure: bool | None = None
    pure_conditions: dict | None = None
    intersection_dim: int | None = None
    block_kernel_dim: int | None = None
    witness: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    inconsistencies: list = field(default_factory=list)

    @property
    def extremal(self) -> bool:
        return bool(self.verdict_extremal_T23 and self.verdict_extremal_A2)

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies

    def to_dict(self) -> dict:
        from .fileformat import encode_matrix

        d = asdict(self)
        d["witness"] = None if self.witness is None else encode_matrix(self.witness)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        from .fileformat import decode_matrix

        d = dict(d)
        if d.get("witness") is not None:
            d["witness"] = decode_matrix(d["witness"])
        return cls(**d)


def certify(state: StateElement, tols: Tolerances = DEFAULT_TOLS) -> Certificate:
    n, m = state.n, state.m
    rep = check_marginal(state, tols.tol)
    R, U, r = _range(state, tols)
    cert = Certificate(n=n, rank=r, verdict_marginal=rep.is_marginal_tracial,
                       tolerances=tols.as_dict())
    cert.residuals.update(p_residual=rep.p_residual, q_residual=rep.q_residual,
                          offdiag_residual=rep.offdiag_residual)
    if not rep.is_marginal_tracial:
        return cert

    t23 = test_extremal_T23(state, tols)
    cert.verdict_extremal_T23 = t23.extremal
    cert.intersection_dim = t23.intersection_dim

    a2 = None
    if r == m:
        # an invertible marginal tracial state is never extremal; the lift
        # problem degenerates to "Hermitian elements of V"
        cert.verdict_extremal_A2 = False
        cert.block_kernel_dim = (n * n - 1) ** 2
        cert.residuals["full_rank_fast_path"] = 1.0
    else:
        try:
            a2 = test_extremal_A2(state, tols)
        except ValueError as exc:
            cert.inconsistencies.append(f"block form failed: {exc}")
        if a2 is not None:
            cert.verdict_extremal_A2 = a2.extremal
            cert.block_kernel_dim = a2.kernel_dim
            cert.residuals["block_form_residual"] = a2.block.residual
            if a2.lifted is not None:
                for k, v in witness_residuals(a2.lifted, R, n).items():
                    cert.residuals["A2_" + k] = v

    if cert.verdict_extremal_T23 != cert.verdict_extremal_A2 and cert.verdict_extremal_A2 is not None:
        cert.inconsistencies.append(
            f"extremality tests disagree: T23={cert.verdict_extremal_T23} "
            f"(dim {cert.intersection_dim}), A2={cert.verdict_extremal_A2} "
            f"(kernel {cert.block_kernel_dim})")

    if t23.witness is not None:
        cert.witness = t23.witness
        cert.residuals.update(witness_residuals(t23.witness, R, n))
    elif a2 is not None and a2.lifted is not None:
        cert.witness = a2.lifted

    if cert.extremal:
        if r * r > 2 * n * n - 1:
            cert.inconsistencies.append(f"extremal verdict with r^2 = {r*r} > 2n^2 - 1")
        cert.residuals["compressed_offdiag_span_dim"] = float(compressed_offdiag_span_dim(state, tols))
        t29 = test_pure_T29(state, tols, check_extremal=False)
        conds, cres = test_pure_C210(state, tols, check_extremal=False)
        cert.verdict_pure = t29.pure
        cert.pure_conditions = conds
        cert.residuals["T29_max_leak"] = t29.max_leak
        if t29.image_residual is not None:
            cert.residuals["image_residual"] = t29.image_residual
        for k, v in cres.items():
            cert.residuals[f"C210_{k}"] = v
        if any(c != t29.pure for c in conds.values()):
            cert.inconsistencies.append(f"purity conditions disagree: T29={t29.pure}, C210={conds}")
    return cert
