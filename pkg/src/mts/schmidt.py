"""Schmidt decomposition of vectors in C^n (x) C^n and pure marginal tracial states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .margstates import StateElement, pure_mts_matrix


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray  # column i is f_i
    right_basis: np.ndarray  # column i is g_i
    schmidt_rank: int

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.left_basis,
                         self.right_basis).reshape(-1)


def _unit_vector(xi, tol: float = 1e-10) -> tuple[np.ndarray, int]:
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    n = int(round(np.sqrt(xi.size)))
    if n * n != xi.size:
        raise ValueError(f"vector length {xi.size} is not a perfect square")
    if abs(np.linalg.norm(xi) - 1) > tol:
        raise ValueError(f"vector is not a unit vector (norm {np.linalg.norm(xi):.15g})")
    return xi, n


def coefficient_matrix(xi) -> np.ndarray:
    """``X[i, j]`` is the component of ``xi`` on ``e_i (x) e_j``."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    n = int(round(np.sqrt(xi.size)))
    return xi.reshape(n, n)


def schmidt_decompose(xi, tol: float = 1e-10) -> SchmidtDecomposition:
    xi, n = _unit_vector(xi)
    U, s, Wh = np.linalg.svd(xi.reshape(n, n))
    F, G = U.copy(), Wh.T.copy()
    # canonical phase: first nonzero entry of each f_i real positive, g_i takes the conjugate phase
    for i in range(n):
        j = int(np.argmax(np.abs(F[:, i]) > 1e-12))
        ph = F[j, i] / abs(F[j, i])
        F[:, i] *= ph.conjugate()
        G[:, i] *= ph
    return SchmidtDecomposition(s, F, G, int(np.sum(s > tol)))


def is_maximally_entangled(xi, tol: float = 1e-10) -> bool:
    d = schmidt_decompose(xi)
    n = d.coefficients.size
    return bool(np.all(np.abs(d.coefficients - 1 / np.sqrt(n)) <= tol))


def pure_mts_from_unitary(unitary, tol: float = 1e-10) -> tuple[np.ndarray, StateElement]:
    """Vector ``xi = sum_ij U_ij / sqrt(n) e_i (x) e_j`` and the state ``n^2 |xi><xi|``.

    Any global phase on ``unitary`` changes ``xi`` by that phase and leaves
    the state unchanged; determinant one is not required.
    """
    U = np.asarray(unitary, dtype=complex)
    n = U.shape[0]
    if U.shape != (n, n) or np.linalg.norm(U.conj().T @ U - np.eye(n)) > tol:
        raise ValueError("input is not unitary")
    xi, h = pure_mts_matrix(U)
    return xi, StateElement(n, h)


def vector_of_pure_state(state: StateElement, rank_tol: float = 1e-9) -> np.ndarray:
    """Unit vector ``xi`` with ``h = n^2 |xi><xi|`` for a rank-one state."""
    w, u = np.linalg.eigh(state.h)
    if np.sum(w > rank_tol * w[-1]) != 1:
        raise ValueError("state is not rank one")
    return u[:, -1]


def check_remark12(xi, tol: float = 1e-10) -> bool:
    """For a unit vector whose first marginal is ``I/n``, report whether the second one is too.

    The answer is always yes for exact inputs; this is a property validator.
    """
    xi, n = _unit_vector(xi)
    X = xi.reshape(n, n)
    if np.linalg.norm(X @ X.conj().T - np.eye(n) / n) > tol:
        raise ValueError("first marginal of the vector state is not tracial")
    return bool(np.linalg.norm(X.T @ X.conj() - np.eye(n) / n) <= tol)


def solve_slice_operator(xi, eta, tol: float = 1e-10) -> np.ndarray:
    """Operator ``Phi`` on C^n with ``(Phi (x) I) xi = eta``, for maximally entangled ``xi``."""
    xi, n = _unit_vector(xi)
    if not is_maximally_entangled(xi, tol=max(tol, 1e-8)):
        raise ValueError("xi is not maximally entangled")
    eta = np.asarray(eta, dtype=complex).reshape(-1)
    if eta.size != xi.size:
        raise ValueError("xi and eta have different lengths")
    X, Y = xi.reshape(n, n), eta.reshape(n, n)
    phi = np.linalg.solve(X.T, Y.T).T
    res = np.linalg.norm(np.kron(phi, np.eye(n)) @ xi - eta)
    if res > tol * max(1.0, np.linalg.norm(eta)):
        raise ValueError(f"slice operator residual {res:.3e} exceeds tolerance")
    return phi


def schmidt_report(xi, tol: float = 1e-10) -> dict:
    d = schmidt_decompose(xi, tol)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    return {
        "n": int(d.coefficients.size),
        "coefficients": d.coefficients.tolist(),
        "schmidt_rank": d.schmidt_rank,
        "maximally_entangled": is_maximally_entangled(xi, tol),
        "reconstruction_residual": float(np.linalg.norm(d.reconstruct() - xi)),
    }

