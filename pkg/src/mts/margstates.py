"""Conditional expectations, canonical subspaces and samplers for marginal tracial states.

Index convention: the basis vector ``e_i (x) e_k`` of C^n (x) C^n sits at flat
index ``i*n + k``, which is what ``np.kron`` produces.  A state on
M_n (x) M_n is identified with a PSD matrix ``h`` of size n^2 with
``tau(h) = 1``, i.e. ``Tr(h) = n^2``; the tracial state is ``h = I``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hsspace import (
    DEFAULT_RANK_TOL,
    SubspaceBasis,
    as_matrix,
    dag,
    eigh,
    hermitian_defect,
    hs_norm,
    tau,
)


class NotMarginalError(ValueError):
    pass


def _check_dim(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[-2:] != (n * n, n * n):
        raise ValueError(f"expected a {n*n}x{n*n} matrix for n={n}, got {x.shape}")
    return x


def _split(x: np.ndarray, n: int) -> np.ndarray:
    return _check_dim(x, n).reshape(x.shape[:-2] + (n, n, n, n))


def _kron_eye_right(a: np.ndarray, n: int) -> np.ndarray:
    """``a (x) I`` over leading batch axes."""
    out = np.einsum("...ij,kl->...ikjl", a, np.eye(n))
    return out.reshape(a.shape[:-2] + (n * n, n * n))


def _kron_eye_left(b: np.ndarray, n: int) -> np.ndarray:
    """``I (x) b`` over leading batch axes."""
    out = np.einsum("ij,...kl->...ikjl", np.eye(n), b)
    return out.reshape(b.shape[:-2] + (n * n, n * n))


def infer_n(x: np.ndarray) -> int:
    n = int(round(np.sqrt(x.shape[0])))
    if n * n != x.shape[0]:
        raise ValueError(f"matrix size {x.shape[0]} is not a perfect square")
    return n


@dataclass(frozen=True)
class StateElement:
    """Positive element ``h`` of M_n (x) M_n with ``tau(h) = 1``."""

    n: int
    h: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        h = _check_dim(as_matrix(self.h, "h"), self.n).copy()
        if hermitian_defect(h) > 1e-12:
            raise ValueError("state is not Hermitian")
        h = 0.5 * (h + dag(h))
        w = np.linalg.eigvalsh(h)
        if w[0] < -self.rank_tol * max(abs(w[-1]), abs(w[0])):
            raise ValueError(f"state is not PSD (min eigenvalue {w[0]:.3e})")
        if abs(tau(h) - 1) > 1e-12:
            raise ValueError(f"state is not normalized: tau(h) = {tau(h).real!r}")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @classmethod
    def normalized(cls, n: int, h, rank_tol: float = DEFAULT_RANK_TOL) -> "StateElement":
        """Build a state from any nonzero PSD matrix by rescaling to ``tau(h) = 1``."""
        h = np.asarray(h, dtype=complex)
        return cls(n, h / tau(h).real, rank_tol)

    @property
    def m(self) -> int:
        return self.n * self.n

    def rank(self, rank_tol: float | None = None) -> int:
        tol = self.rank_tol if rank_tol is None else rank_tol
        w = np.linalg.eigvalsh(self.h)
        return int(np.sum(w > tol * w[-1]))


@dataclass(frozen=True)
class MarginalReport:
    p_residual: float
    q_residual: float
    is_marginal_tracial: bool
    tol: float
    offdiag_residual: float


def partial_trace_second(x: np.ndarray, n: int) -> np.ndarray:
    return np.einsum("...ikjk->...ij", _split(x, n))


def partial_trace_first(x: np.ndarray, n: int) -> np.ndarray:
    return np.einsum("...ikil->...kl", _split(x, n))


def cond_exp_P(x: np.ndarray, n: int) -> np.ndarray:
    """Trace-preserving conditional expectation onto ``B (x) I``: ``a (x) b -> tau(b) a (x) I``.

    Accepts leading batch axes, as do all maps below.
    """
    return _kron_eye_right(partial_trace_second(x, n) / n, n)


def cond_exp_Q(x: np.ndarray, n: int) -> np.ndarray:
    """Trace-preserving conditional expectation onto ``I (x) B``: ``a (x) b -> tau(a) I (x) b``."""
    return _kron_eye_left(partial_trace_first(x, n) / n, n)


def proj_offdiag(x: np.ndarray, n: int) -> np.ndarray:
    """``(P - Q)^2``: the HS-orthogonal projection onto ``N (x) I + I (x) N``."""
    d = cond_exp_P(x, n) - cond_exp_Q(x, n)
    return cond_exp_P(d, n) - cond_exp_Q(d, n)


def proj_CI_plus_V(x: np.ndarray, n: int) -> np.ndarray:
    """``I - (P - Q)^2``: the HS-orthogonal projection onto ``C I + N (x) N``."""
    return _check_dim(x, n) - proj_offdiag(x, n)


def slice_right(x: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    """Right slice map ``a (x) b -> tau(rho* b) a``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise ValueError(f"rho must be {n}x{n}")
    x4 = _check_dim(x, n).reshape(n, n, n, n)
    # tau(rho* b) = sum_kl conj(rho[k,l]) b[k,l] / n
    return np.einsum("ikjl,kl->ij", x4, rho.conj()) / n


def slice_left(x: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    """Left slice map ``a (x) b -> tau(rho* a) b``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise ValueError(f"rho must be {n}x{n}")
    x4 = _check_dim(x, n).reshape(n, n, n, n)
    return np.einsum("ikjl,ij->kl", x4, rho.conj()) / n


@lru_cache(maxsize=None)
def traceless_basis(n: int) -> np.ndarray:
    """Hermitian generalized Gell-Mann matrices scaled so that ``tau(g^2) = 1``.

    Returns an array of shape (n^2 - 1, n, n) spanning the traceless matrices N.
    """
    out = []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1
            out.append(s)
            a = np.zeros((n, n), dtype=complex)
            a[j, k], a[k, j] = -1j, 1j
            out.append(a)
    for l in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        d[np.arange(l), np.arange(l)] = 1
        d[l, l] = -l
        out.append(d * np.sqrt(2.0 / (l * (l + 1))))
    g = np.array(out).reshape(-1, n, n) * np.sqrt(n / 2.0)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def basis_V(n: int) -> SubspaceBasis:
    """Orthonormal Hermitian basis of ``V = N (x) N = ker(P + Q)``; (n^2-1)^2 elements."""
    if n < 2:
        raise ValueError("n must be at least 2")
    g = traceless_basis(n)
    return SubspaceBasis(np.array([np.kron(a, b) for a in g for b in g]), n * n)


@lru_cache(maxsize=None)
def basis_offdiag(n: int) -> SubspaceBasis:
    """Orthonormal Hermitian basis of ``N (x) I + I (x) N``; 2(n^2-1) elements."""
    if n < 2:
        raise ValueError("n must be at least 2")
    g = traceless_basis(n)
    eye = np.eye(n)
    vecs = [np.kron(a, eye) for a in g] + [np.kron(eye, a) for a in g]
    return SubspaceBasis(np.array(vecs), n * n)


@lru_cache(maxsize=None)
def basis_CI_offdiag(n: int) -> SubspaceBasis:
    """``{I} + basis_offdiag(n)``: the orthogonal complement of V."""
    vecs = np.concatenate([np.eye(n * n)[None], basis_offdiag(n).vectors])
    return SubspaceBasis(vecs, n * n)


def check_marginal(state: StateElement, tol: float = 1e-9) -> MarginalReport:
    """Residuals of ``P(h) = I`` and ``Q(h) = I`` in the HS norm."""
    n, h = state.n, state.h
    eye = np.eye(n * n)
    p = hs_norm(cond_exp_P(h, n) - eye)
    q = hs_norm(cond_exp_Q(h, n) - eye)
    off = hs_norm(proj_offdiag(h, n))
    return MarginalReport(p, q, max(p, q) <= tol, tol, off)


def state_tau(n: int) -> StateElement:
    if n < 2:
        raise ValueError("n must be at least 2")
    return StateElement(n, np.eye(n * n, dtype=complex))


def mix(states, weights) -> StateElement:
    states = list(states)
    w = np.asarray(weights, dtype=float)
    if not states or len(states) != len(w):
        raise ValueError("need one weight per state")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to one")
    n = states[0].n
    if any(s.n != n for s in states):
        raise ValueError("all states must share n")
    h = sum(wi * s.h for wi, s in zip(w, states))
    h = h / tau(h).real  # absorb the 1e-12 slack in sum(w)
    return StateElement(n, h, states[0].rank_tol)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """QR of a complex Gaussian matrix with the diagonal of R made positive."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def pure_mts_matrix(unitary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vector ``sum_ij U_ij/sqrt(n) e_i (x) e_j`` and the state ``n^2 |xi><xi|``."""
    n = unitary.shape[0]
    xi = unitary.reshape(-1) / np.sqrt(n)
    return xi, n * n * np.outer(xi, xi.conj())


def random_pure_mts(n: int, rng: np.random.Generator) -> StateElement:
    _, h = pure_mts_matrix(haar_unitary(n, rng))
    return StateElement(n, h)


def random_psd(m: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return g @ dag(g)


def shrink_to_boundary(g: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    """Largest ``t`` in (0, 1] with ``(1-t) I + t g`` PSD, for Hermitian ``g`` with tau(g) = 1.

    lambda_min((1-t)I + t g) = 1 - t (1 - lambda_min(g)) is affine in t, so
    the boundary is found in closed form rather than by bisection.
    """
    lam = eigh(g)[0][-1]
    t = 1.0 if lam >= 0 else 1.0 / (1.0 - lam)
    return (1 - t) * np.eye(n * n) + t * g, t


def sample_mts(n: int, seed: int, method: str = "mixture") -> StateElement:
    """Random marginal tracial state, deterministic in ``seed``.

    ``mixture``: Dirichlet-weighted mixture of k random pure states, k uniform
    in 1..n^2.  ``project_shrink``: project a random density onto ``C I + V``
    and shrink toward ``I`` until it sits on the positivity boundary.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    if method == "mixture":
        k = int(rng.integers(1, n * n + 1))
        states = [random_pure_mts(n, rng) for _ in range(k)]
        return mix(states, rng.dirichlet(np.ones(k)))
    if method == "project_shrink":
        w = random_psd(n * n, rng)
        w = w / tau(w).real
        return project_shrink(w, n)
    raise ValueError(f"unknown sampling method {method!r}")


def project_shrink(w: np.ndarray, n: int) -> StateElement:
    g = proj_CI_plus_V(w, n)
    g = 0.5 * (g + dag(g))
    h, _ = shrink_to_boundary(g, n)
    return StateElement(n, h / tau(h).real)
