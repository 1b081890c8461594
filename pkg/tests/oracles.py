"""Independent reference computations used as test oracles.

Nothing here imports the package; everything is written from the definitions
with explicit loops or textbook algorithms so that agreement with the
library is meaningful.
"""
import numpy as np


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi for a complex Hermitian matrix. Eigenvalues descending, vectors as columns."""
    a = np.array(a, dtype=complex)
    m = a.shape[0]
    v = np.eye(m, dtype=complex)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= tol * max(np.linalg.norm(a), 1e-300):
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                # remove the phase so the 2x2 block is real symmetric
                phase = apq / abs(apq)
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * abs(apq), aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(m, dtype=complex)
                J[p, p], J[q, q] = c, c
                J[p, q] = s * phase
                J[q, p] = -s * np.conj(phase)
                a = J.conj().T @ a @ J
                v = v @ J
    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def jacobi_singular_values(a, tol=1e-15, max_sweeps=100):
    """One-sided (Hestenes) Jacobi: orthogonalize the columns pairwise, return column norms."""
    u = np.array(a, dtype=complex)
    k = u.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(k - 1):
            for q in range(p + 1, k):
                alpha = np.vdot(u[:, p], u[:, p]).real
                beta = np.vdot(u[:, q], u[:, q]).real
                gamma = np.vdot(u[:, p], u[:, q])
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or abs(gamma) < 1e-300:
                    continue
                rotated = True
                phase = gamma / abs(gamma)
                zeta = (beta - alpha) / (2 * abs(gamma))
                t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta)) if zeta != 0 else 1.0
                c = 1 / np.sqrt(1 + t * t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * up - s * np.conj(phase) * uq
                u[:, q] = s * phase * up + c * uq
        if not rotated:
            break
    return np.sort(np.linalg.norm(u, axis=0))[::-1]


def trace_norm(a):
    return jacobi_singular_values(a).sum() / a.shape[0]


def partial_traces(x, n):
    """Loop-based partial traces (over the second factor, over the first)."""
    t2 = np.zeros((n, n), dtype=complex)
    t1 = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                t2[i, j] += x[i * n + k, j * n + k]
                t1[i, j] += x[k * n + i, k * n + j]
    return t2, t1


def P(x, n):
    return np.kron(partial_traces(x, n)[0] / n, np.eye(n))


def Q(x, n):
    return np.kron(np.eye(n), partial_traces(x, n)[1] / n)


def matrix_rank(a, tol=1e-9):
    s = jacobi_singular_values(a) if min(a.shape) <= 40 else np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1e-300))) if s.size else 0


def intersection_dim(A, B, tol=1e-9):
    """dim(span A & span B) = rank A + rank B - rank [A B], columns as vectors."""
    return matrix_rank(A, tol) + matrix_rank(B, tol) - matrix_rank(np.hstack([A, B]), tol)


def V_spanning_set(n):
    """Spanning set of N (x) N from traceless matrix units (not orthonormal)."""
    traceless = []
    for i in range(n):
        for j in range(n):
            if i != j:
                e = np.zeros((n, n))
                e[i, j] = 1
                traceless.append(e)
    for i in range(n - 1):
        d = np.zeros((n, n))
        d[i, i], d[i + 1, i + 1] = 1, -1
        traceless.append(d)
    return [np.kron(a, b) for a in traceless for b in traceless]


def compression_dim_in_V(h, n, rank_tol=1e-9):
    """Brute force: real dimension of Hermitian X on range(h) with P(UXU*) = Q(UXU*) = 0."""
    w, u = np.linalg.eigh(h)
    U = u[:, w > rank_tol * w[-1]]
    r = U.shape[1]
    cols = []
    for a in range(r):
        for b in range(r):
            X = np.zeros((r, r), dtype=complex)
            if a == b:
                X[a, a] = 1
            elif a < b:
                X[a, b] = X[b, a] = 1
            else:
                X[a, b], X[b, a] = 1j, -1j
            x = U @ X @ U.conj().T
            t2, t1 = partial_traces(x, n)
            cols.append(np.concatenate([t2.ravel(), t1.ravel()]))
    M = np.array(cols).T
    M = np.vstack([M.real, M.imag])
    s = np.linalg.svd(M, compute_uv=False)
    return r * r - int(np.sum(s > 1e-8 * s[0]))


def bell_vector(n, signs):
    """sum_i signs[i] e_i (x) e_i / sqrt(n)."""
    xi = np.zeros(n * n, dtype=complex)
    for i, s in enumerate(signs):
        xi[i * n + i] = s
    return xi / np.sqrt(n)


def bell_element(n, signs):
    xi = bell_vector(n, signs)
    return n * n * np.outer(xi, xi.conj())
