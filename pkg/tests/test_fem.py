import numpy as np
import pytest

from porobeam.errors import DimensionMismatch, NonFiniteSample, TooFewElements
from porobeam.fem import (assemble_matrices, build_mesh, gradient_plus_value_sq, interpolate_nodal,
                          norms, with_boundary)


def gauss_oracle(l, s):
    """Element-by-element 3-point Gauss quadrature of the hat-function integrals."""
    h = l / s
    gp = np.array([-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
    gw = np.array([5 / 9, 8 / 9, 5 / 9])
    N = s + 1
    Z, T, X = np.zeros((N, N)), np.zeros((N, N)), np.zeros((N, N))
    for e in range(s):
        xi = (gp + 1) / 2
        w = gw * h / 2
        phi = [1 - xi, xi]
        dphi = [-1 / h, 1 / h]
        for a in range(2):
            for c in range(2):
                i, j = e + a, e + c
                Z[i, j] += np.sum(w * phi[a] * phi[c])
                T[i, j] += np.sum(w * dphi[a] * dphi[c])
                # row = test function, column = trial derivative
                X[i, j] += np.sum(w * phi[a] * dphi[c])
    sl = slice(1, N - 1)
    return Z[sl, sl], T[sl, sl], X[sl, sl]


def test_mesh_examples():
    m = build_mesh(1.0, 11)
    assert m.h == pytest.approx(1 / 11)
    assert m.n_dofs == 10
    assert build_mesh(1.0, 2).interior == pytest.approx([0.5])
    assert build_mesh(2.0, 4).nodes == pytest.approx([0, 0.5, 1, 1.5, 2])


def test_too_few_elements():
    with pytest.raises(TooFewElements):
        build_mesh(1.0, 1)


@pytest.mark.parametrize("s", [2, 3, 7, 11, 32])
@pytest.mark.parametrize("l", [1.0, 2.5])
def test_gauss_oracle(s, l):
    mats = assemble_matrices(build_mesh(l, s))
    for ours, ref in zip((mats.Z, mats.T, mats.X), gauss_oracle(l, s)):
        ours = ours.toarray()
        scale = np.abs(ref).max()
        assert np.abs(ours - ref).max() <= 1e-12 * scale


def test_s2_and_s3_examples():
    m = assemble_matrices(build_mesh(1.0, 2))
    np.testing.assert_allclose(m.Z.toarray(), [[1 / 3]], rtol=1e-15)
    np.testing.assert_allclose(m.T.toarray(), [[4.0]], rtol=1e-15)
    np.testing.assert_array_equal(m.X.toarray(), [[0.0]])
    m3 = assemble_matrices(build_mesh(1.0, 3))
    np.testing.assert_allclose(m3.X.toarray(), [[0, 0.5], [-0.5, 0]], atol=1e-15)
    assert (m3.Y.toarray() == m3.X.toarray().T).all()


def test_structure():
    mats = assemble_matrices(build_mesh(1.0, 9))
    Z, T, X = (M.toarray() for M in (mats.Z, mats.T, mats.X))
    assert np.linalg.eigvalsh(Z).min() > 0
    assert np.linalg.eigvalsh(T).min() > 0
    assert np.allclose(X, -X.T)
    assert np.allclose(T.sum(axis=1)[1:-1], 0.0)
    # discrete Poincare: v^T Z v <= (l/pi)^2 v^T T v
    lam = np.linalg.eigvals(np.linalg.solve(T, Z)).real.max()
    assert lam <= (1 / np.pi) ** 2 + 1e-12


def test_interpolation():
    m = build_mesh(1.0, 11)
    i = np.arange(1, 11)
    assert interpolate_nodal(lambda x: x * (1 - x), m) == pytest.approx((i / 11) * (1 - i / 11))
    assert not interpolate_nodal(lambda x: 0 * x, m).any()
    assert interpolate_nodal(lambda x: np.sin(np.pi * x), build_mesh(1.0, 2)) == pytest.approx([1.0])


def test_interpolation_non_finite():
    m = build_mesh(1.0, 4)
    with pytest.raises(NonFiniteSample) as exc:
        interpolate_nodal(lambda x: np.where(x > 0.6, np.nan, x), m)
    assert exc.value.index == 3


def test_norms_examples(rng):
    mats = assemble_matrices(build_mesh(1.0, 2))
    assert norms(mats, np.zeros(1)) == (0.0, 0.0)
    l2, h1 = norms(mats, np.array([1.0]))
    assert l2 == pytest.approx(np.sqrt(1 / 3)) and h1 == pytest.approx(2.0)
    big = assemble_matrices(build_mesh(1.0, 8))
    v = rng.normal(size=7)
    assert norms(big, -3 * v)[0] == pytest.approx(3 * norms(big, v)[0])
    with pytest.raises(DimensionMismatch):
        norms(big, np.ones(3))


def test_with_boundary():
    assert with_boundary(np.array([1.0, 2.0])).tolist() == [0.0, 1.0, 2.0, 0.0]


def test_gradient_plus_value_matches_quadrature(rng):
    mesh = build_mesh(1.3, 7)
    u, phi = rng.normal(size=6), rng.normal(size=6)
    a, c = 0.7, 1.9
    U, P = with_boundary(u), with_boundary(phi)
    total = 0.0
    gp, gw = np.polynomial.legendre.leggauss(4)
    for e in range(mesh.s):
        xi = (gp + 1) / 2
        slope = (U[e + 1] - U[e]) / mesh.h
        val = P[e] * (1 - xi) + P[e + 1] * xi
        total += np.sum(gw * mesh.h / 2 * (a * slope + c * val) ** 2)
    assert gradient_plus_value_sq(mesh, u, phi, a, c) == pytest.approx(total, rel=1e-13)
