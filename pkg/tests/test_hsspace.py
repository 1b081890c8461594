import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import random_hermitian, random_matrix, random_psd
from mts.hsspace import (
    ConvergenceError,
    SubspaceBasis,
    eigh,
    hs_inner,
    hs_norm,
    orthonormalize,
    principal_sines,
    range_projection,
    sqrt_spectral,
    sqrt_sznagy,
    subspace_intersection,
    trace_norm,
)

seeds = st.integers(0, 2**32 - 1)
E11 = np.diag([1.0, 0.0]).astype(complex)
E22 = np.diag([0.0, 1.0]).astype(complex)


def test_inner_examples():
    assert hs_inner(np.eye(3), np.eye(3)) == pytest.approx(1)
    assert hs_inner(E11, E22) == 0
    assert hs_inner(E11, E11) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        hs_inner(np.eye(2), np.eye(3))


@given(seeds)
def test_inner_is_conjugate_symmetric_and_positive(seed):
    rng = np.random.default_rng(seed)
    a, b = random_matrix(rng, 4), random_matrix(rng, 4)
    assert hs_inner(a, b) == pytest.approx(np.conj(hs_inner(b, a)), abs=1e-12)
    assert hs_inner(a, a).real > 0
    assert abs(hs_inner(a, a).imag) < 1e-14
    assert hs_inner(0 * a, 0 * a) == 0


def test_trace_norm_examples(rng):
    assert trace_norm(np.eye(4)) == pytest.approx(1)
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(1)
    a = random_matrix(rng, 4)
    assert trace_norm(a) == pytest.approx(oracles.trace_norm(a), abs=1e-12)


@given(seeds)
def test_trace_norm_is_a_norm(seed):
    rng = np.random.default_rng(seed)
    a, b = random_matrix(rng, 5), random_matrix(rng, 5)
    z = complex(*rng.standard_normal(2))
    assert trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-12
    assert trace_norm(z * a) == pytest.approx(abs(z) * trace_norm(a), rel=1e-12)
    p = random_psd(rng, 5)
    assert trace_norm(p) == pytest.approx(np.trace(p).real / 5, rel=1e-12)


def test_eigh_examples():
    w, u = eigh(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(w, [2, 1])
    np.testing.assert_allclose(np.abs(u), [[0, 1], [1, 0]])
    w, u = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(w, [1, -1])
    np.testing.assert_allclose(np.abs(u), np.full((2, 2), 1 / np.sqrt(2)))
    with pytest.raises(ValueError):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(seeds, st.sampled_from([2, 4, 9]))
def test_eigh_reconstructs_and_matches_jacobi(seed, m):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, m)
    w, u = eigh(a)
    assert np.all(np.diff(w) <= 0)
    assert np.linalg.norm(a @ u - u * w, 2) <= 1e-11 * np.linalg.norm(a, 2)
    assert np.linalg.norm(u.conj().T @ u - np.eye(m)) <= 1e-11
    wj, _ = oracles.jacobi_eigh(a)
    np.testing.assert_allclose(w, wj, atol=1e-11 * np.abs(wj).max())


def test_range_projection_examples():
    R, r = range_projection(np.diag([1.0, 0.0]))
    assert r == 1
    np.testing.assert_allclose(R, np.diag([1, 0]), atol=1e-15)
    R, r = range_projection(np.eye(4))
    assert r == 4
    np.testing.assert_allclose(R, np.eye(4), atol=1e-14)
    xi = np.array([1, 0, 0, 1j]) / np.sqrt(2)
    R, r = range_projection(4 * np.outer(xi, xi.conj()))
    assert r == 1
    np.testing.assert_allclose(R, np.outer(xi, xi.conj()), atol=1e-14)
    with pytest.raises(ValueError):
        range_projection(np.diag([1.0, -0.5]))


@given(seeds, st.integers(1, 6))
def test_range_projection_invariants(seed, rank):
    rng = np.random.default_rng(seed)
    h = random_psd(rng, 6, rank)
    R, r = range_projection(h, 1e-9)
    lam = np.linalg.eigvalsh(h)[-1]
    assert r == rank
    assert np.linalg.norm(R @ R - R, 2) < 1e-12
    assert np.linalg.norm(R - R.conj().T, 2) < 1e-12
    assert np.linalg.norm(R @ h - h, 2) <= 2 * 1e-9 * lam * 6


def test_sqrt_examples():
    np.testing.assert_allclose(sqrt_spectral(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(sqrt_spectral(np.diag([4.0, 1.0])), np.diag([2, 1]), atol=1e-15)
    np.testing.assert_allclose(sqrt_sznagy(np.zeros((2, 2))), 0)
    np.testing.assert_allclose(sqrt_sznagy(np.diag([0.25, 1.0])), np.diag([0.5, 1]), atol=1e-11)
    with pytest.raises(ValueError):
        sqrt_spectral(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        sqrt_sznagy(np.diag([1.0, -1.0]))
    with pytest.raises(ConvergenceError):
        sqrt_sznagy(np.diag([1.0, 1e-6]), max_iters=10)


@given(seeds, st.sampled_from([4, 9]))
def test_sqrt_spectral_squares_back(seed, m):
    rng = np.random.default_rng(seed)
    c = random_psd(rng, m)
    s = sqrt_spectral(c)
    assert np.linalg.norm(s @ s - c) <= 1e-10 * np.linalg.norm(c)
    assert np.linalg.eigvalsh(s)[0] >= -1e-12 * np.linalg.norm(c, 2)


def test_sqrt_sznagy_matches_spectral_16(rng):
    c = random_psd(rng, 16)
    np.testing.assert_allclose(sqrt_sznagy(c), sqrt_spectral(c), atol=1e-8)


def test_orthonormalize_examples(rng):
    assert len(orthonormalize([np.eye(2), 2 * np.eye(2)])) == 1
    b = orthonormalize([E11, E22])
    assert len(b) == 2
    np.testing.assert_allclose(b.gram(), np.eye(2), atol=1e-12)
    vs = [random_matrix(rng, 4) for _ in range(4)]
    vs.insert(2, vs[1].copy())
    stacked = np.array([v.ravel() for v in vs]).T
    assert len(orthonormalize(vs)) == oracles.matrix_rank(stacked) == 4
    assert len(orthonormalize([], m=3)) == 0


@given(seeds, st.integers(1, 10))
def test_orthonormalize_spans_and_is_orthonormal(seed, k):
    rng = np.random.default_rng(seed)
    vs = [random_matrix(rng, 3) for _ in range(k)]
    b = orthonormalize(vs)
    assert len(b) == min(k, 9) <= b.ambient_dim
    assert np.linalg.norm(b.gram() - np.eye(len(b))) < 1e-12
    for v in vs:
        assert hs_norm(b.project(v) - v) < 1e-10 * hs_norm(v)


def _basis(*mats):
    return orthonormalize(list(mats))


def test_intersection_examples(rng):
    I2 = np.eye(2, dtype=complex)
    assert len(subspace_intersection(_basis(I2), _basis(I2))) == 1
    assert len(subspace_intersection(_basis(E11), _basis(E22))) == 0
    x, y, z = orthonormalize([random_matrix(rng, 3) for _ in range(3)])
    A, B = _basis(x, y), _basis(y, z)
    inter = subspace_intersection(A, B)
    assert len(inter) == oracles.intersection_dim(A.coords(), B.coords()) == 1
    w = inter.vectors[0]
    assert abs(abs(hs_inner(w, y)) - 1) < 1e-12
    for S in (A, B):
        assert hs_norm(S.project(w) - w) <= np.sqrt(2e-9)


@given(seeds, st.integers(1, 8), st.integers(1, 8), st.integers(0, 4))
def test_intersection_matches_projector_rank(seed, ka, kb, shared):
    rng = np.random.default_rng(seed)
    common = [random_matrix(rng, 4) for _ in range(shared)]
    A = orthonormalize(common + [random_matrix(rng, 4) for _ in range(ka)])
    B = orthonormalize(common + [random_matrix(rng, 4) for _ in range(kb)])
    expected = oracles.intersection_dim(A.coords(), B.coords())
    assert len(subspace_intersection(A, B)) == expected
    assert len(subspace_intersection(A, B, measure="cosine")) == expected


@given(seeds, st.integers(1, 9))
def test_intersection_with_self_and_complement(seed, k):
    rng = np.random.default_rng(seed)
    full = orthonormalize([random_matrix(rng, 4) for _ in range(16)])
    A = SubspaceBasis(full.vectors[:k], 4)
    C = SubspaceBasis(full.vectors[k:], 4)
    assert len(subspace_intersection(A, A)) == k
    assert len(subspace_intersection(A, C)) == 0


def test_sines_resolve_small_angles():
    # an angle of 1e-7 is invisible to cosines at this threshold but not to sines
    a = np.zeros((2, 2), dtype=complex)
    a[0, 0] = 1
    b = a.copy()
    b[0, 1] = 1e-7
    A, B = _basis(a), _basis(b)
    s, _ = principal_sines(A, B)
    assert s[0] == pytest.approx(1e-7, rel=1e-6)
    assert len(subspace_intersection(A, B)) == 0
    assert len(subspace_intersection(A, B, measure="cosine")) == 1
    with pytest.raises(ValueError):
        subspace_intersection(A, B, measure="bogus")
