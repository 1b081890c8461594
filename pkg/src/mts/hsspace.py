"""Dense complex linear algebra on the Hilbert-Schmidt space of m x m matrices.

Matrices are plain complex ``numpy`` arrays of shape ``(m, m)``.  All inner
products and norms use the normalized trace ``tau(x) = Tr(x) / m`` so that
``<I, I> = 1`` in every dimension.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-9
DEFAULT_ANGLE_TOL = 1e-9
DROP_TOL = 1e-10


class ConvergenceError(RuntimeError):
    pass


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return a complex copy."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def tau(a: np.ndarray) -> complex:
    return np.trace(a) / a.shape[0]


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a, b> = tau(b* a)``, linear in ``a``."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.vdot(b, a) / a.shape[0]


def hs_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(hs_inner(a, a).real, 0.0)))


def trace_norm(a: np.ndarray) -> float:
    """Normalized trace norm ``tau(|a|)``: singular values summed, divided by m."""
    return float(np.linalg.svd(a, compute_uv=False).sum() / a.shape[0])


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dag(a)) / max(1.0, np.linalg.norm(a)))


def eigh(a: np.ndarray, herm_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.

    Columns of the returned unitary are the eigenvectors.  Raises
    ``ValueError`` when ``a`` is not Hermitian to within ``herm_tol`` (relative).
    """
    a = as_matrix(a)
    if hermitian_defect(a) > herm_tol:
        raise ValueError("eigh requires a Hermitian matrix")
    w, u = np.linalg.eigh(0.5 * (a + dag(a)))
    return w[::-1].copy(), u[:, ::-1].copy()


def _psd_spectrum(c: np.ndarray, rank_tol: float) -> tuple[np.ndarray, np.ndarray, float]:
    w, u = eigh(c)
    lam_max = max(float(np.abs(w).max()), 0.0)
    if lam_max > 0 and w[-1] < -rank_tol * lam_max:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[-1]:.3e}, max {lam_max:.3e}")
    return w, u, lam_max


def range_projection(h: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[np.ndarray, int]:
    """Orthogonal projection onto the span of eigenvectors with ``lambda > rank_tol * lambda_max``."""
    R, _, rank = range_basis(h, rank_tol)
    return R, rank


def range_basis(h: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[np.ndarray, np.ndarray, int]:
    """Like :func:`range_projection` but also returns the orthonormal columns spanning the range."""
    w, u, lam_max = _psd_spectrum(h, rank_tol)
    keep = w > rank_tol * lam_max
    U = u[:, keep]
    R = U @ dag(U)
    return R, U, int(keep.sum())


def sqrt_spectral(c: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    w, u, _ = _psd_spectrum(c, rank_tol)
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ dag(u)


def sqrt_sznagy(c: np.ndarray, max_iters: int = 200_000, tol: float = 1e-12) -> np.ndarray:
    """Square root of a PSD matrix by the fixed-point iteration ``X <- X + (C - X^2)/2``.

    The iteration starts at zero and only converges for ``||C|| <= 1``, so the
    input is first divided by its trace (an upper bound on the spectral norm of
    a PSD matrix) and the result is multiplied back by the square root of the
    trace.  Convergence is declared once ``||X^2 - C||_F <= tol`` on the
    rescaled problem; it is slow when ``C`` has tiny nonzero eigenvalues.
    """
    c = as_matrix(c)
    _psd_spectrum(c, DEFAULT_RANK_TOL)
    s = float(np.trace(c).real)
    if s <= 0:
        return np.zeros_like(c)
    C = 0.5 * (c + dag(c)) / s
    X = np.zeros_like(C)
    for _ in range(max_iters):
        res = C - X @ X
        if np.linalg.norm(res) <= tol:
            return np.sqrt(s) * X
        X = X + 0.5 * res
    raise ConvergenceError(f"Sz.-Nagy iteration did not converge in {max_iters} steps")


@dataclass(frozen=True)
class SubspaceBasis:
    """HS-orthonormal family of m x m matrices, stored as an array of shape (k, m, m)."""

    vectors: np.ndarray
    m: int

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex).reshape(-1, self.m, self.m)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __iter__(self):
        return iter(self.vectors)

    @property
    def ambient_dim(self) -> int:
        return self.m * self.m

    def coords(self) -> np.ndarray:
        """Euclidean-orthonormal coordinate columns, shape (m*m, k)."""
        return self.vectors.reshape(len(self), -1).T / np.sqrt(self.m)

    def gram(self) -> np.ndarray:
        Q = self.coords()
        return dag(Q) @ Q

    def project(self, x: np.ndarray) -> np.ndarray:
        Q = self.coords()
        y = Q @ (dag(Q) @ (x.reshape(-1) / np.sqrt(self.m)))
        return y.reshape(self.m, self.m) * np.sqrt(self.m)

    @classmethod
    def from_coords(cls, Q: np.ndarray, m: int) -> "SubspaceBasis":
        return cls((Q.T * np.sqrt(m)).reshape(-1, m, m), m)

    @classmethod
    def empty(cls, m: int) -> "SubspaceBasis":
        return cls(np.zeros((0, m, m), dtype=complex), m)


def orthonormalize(vs, m: int | None = None, drop_tol: float = DROP_TOL) -> SubspaceBasis:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    A vector whose residual after projection is below ``drop_tol`` times its
    original norm is treated as dependent and dropped.
    """
    vs = [np.asarray(v, dtype=complex) for v in vs]
    if m is None:
        if not vs:
            raise ValueError("cannot infer dimension of an empty family")
        m = vs[0].shape[0]
    out: list[np.ndarray] = []
    for v in vs:
        if v.shape != (m, m):
            raise ValueError(f"dimension mismatch: expected {(m, m)}, got {v.shape}")
        x = v.reshape(-1) / np.sqrt(m)
        norm0 = np.linalg.norm(x)
        if norm0 == 0:
            continue
        for _ in range(2):
            for q in out:
                x = x - np.vdot(q, x) * q
        nx = np.linalg.norm(x)
        if nx < drop_tol * norm0:
            continue
        out.append(x / nx)
    if not out:
        return SubspaceBasis.empty(m)
    return SubspaceBasis.from_coords(np.stack(out, axis=1), m)


def principal_cosines(A: SubspaceBasis, B: SubspaceBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of the cross-Gram matrix ``<a_i, b_j>``: (U, cosines, Wh)."""
    if A.m != B.m:
        raise ValueError("subspaces live in different ambient spaces")
    M = dag(A.coords()) @ B.coords()
    return np.linalg.svd(M)


def principal_sines(A: SubspaceBasis, B: SubspaceBasis) -> tuple[np.ndarray, np.ndarray]:
    """Sines of the principal angles of ``A`` against ``B``, ascending, with directions in ``A``.

    Computed from the singular values of ``(I - P_B) Q_A``, which stay accurate
    for small angles where the cosines are indistinguishable from one.
    Returns ``(sines, C)`` where column ``i`` of ``C`` holds the coefficients
    (in the basis of ``A``) of the direction attaining ``sines[i]``.
    """
    if A.m != B.m:
        raise ValueError("subspaces live in different ambient spaces")
    QA, QB = A.coords(), B.coords()
    Z = QA - QB @ (dag(QB) @ QA) if len(B) else QA
    _, s, Vh = np.linalg.svd(Z, full_matrices=True)
    return s[::-1], dag(Vh)[:, ::-1]


def subspace_intersection(A: SubspaceBasis, B: SubspaceBasis,
                          angle_tol: float = DEFAULT_ANGLE_TOL,
                          measure: str = "sine") -> SubspaceBasis:
    """Basis of ``span(A) & span(B)`` from principal angles.

    With ``measure="sine"`` a direction counts when the sine of its principal
    angle is at most ``angle_tol``; ``measure="cosine"`` counts cosines at
    least ``1 - angle_tol`` (coarser: it cannot see angles below ~1e-8 and at
    ``angle_tol = 1e-9`` accepts angles up to ~4.5e-5).  The returned vectors
    are combinations of ``A``.
    """
    if A.m != B.m:
        raise ValueError("subspaces live in different ambient spaces")
    if len(A) == 0 or len(B) == 0:
        return SubspaceBasis.empty(A.m)
    if measure == "sine":
        sines, C = principal_sines(A, B)
        k = int(np.sum(sines <= angle_tol))
        C = C[:, :k]
    elif measure == "cosine":
        U, cos, _ = principal_cosines(A, B)
        k = int(np.sum(cos >= 1.0 - angle_tol))
        C = U[:, :k]
    else:
        raise ValueError(f"unknown measure {measure!r}")
    if k == 0:
        return SubspaceBasis.empty(A.m)
    Q, _ = np.linalg.qr(A.coords() @ C)
    return SubspaceBasis.from_coords(Q, A.m)
