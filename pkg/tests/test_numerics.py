import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wallsda.numerics import (EIG_RESIDUAL_TOL, SEMIGROUP_TOL, SVD_RECON_TOL, NumericsError, as_matrix,
                              eig, expm_dt, is_orthonormal, svd)


def taylor_expm(a, terms=60):
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def test_eig_matches_characteristic_polynomial_2x2():
    a = np.array([[-3.0, 1.0], [2.0, -4.0]])
    tr, det = np.trace(a), np.linalg.det(a)
    disc = math.sqrt(tr * tr / 4 - det)
    expect = np.array([tr / 2 + disc, tr / 2 - disc])
    dec = eig(a)
    assert dec.is_real
    np.testing.assert_allclose(dec.eigenvalues, expect, rtol=1e-12)
    assert np.all(dec.residuals(a) <= EIG_RESIDUAL_TOL)


def test_eig_matches_polynomial_roots_3x3(rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = q @ np.diag([-0.5, -2.0, -7.0]) @ q.T + np.triu(rng.standard_normal((3, 3)), 1) * 1e-3
    roots = np.sort(np.roots(np.poly(a)).real)[::-1]
    np.testing.assert_allclose(eig(a).eigenvalues.real, roots, rtol=1e-9)


def test_eig_sorted_and_sign_canonical(rng):
    for _ in range(50):
        a = rng.standard_normal((4, 4))
        dec = eig(a)
        re = dec.eigenvalues.real
        assert np.all(np.diff(re) <= 1e-12)
        np.testing.assert_allclose(np.linalg.norm(dec.eigenvectors, axis=0), 1.0, atol=1e-12)
        for col in dec.eigenvectors.T:
            first = col[np.abs(col) > 1e-12 * np.abs(col).max()][0]
            key = first.real if abs(first.real) > 1e-12 * np.abs(col).max() else first.imag
            assert key > 0


def test_eig_symmetric_gives_orthonormal_basis(rng):
    b = rng.standard_normal((5, 5))
    dec = eig(b + b.T)
    assert dec.is_real
    assert is_orthonormal(dec.eigenvectors)


def test_eig_complex_spectrum_flagged():
    dec = eig(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert not dec.is_real
    np.testing.assert_allclose(sorted(dec.eigenvalues.imag), [-1.0, 1.0])


def test_eig_rejects_bad_input():
    with pytest.raises(NumericsError):
        eig(np.ones((2, 3)))
    with pytest.raises(NumericsError):
        eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(NumericsError):
        as_matrix(np.zeros((2, 2, 2)))


def test_svd_reconstruction_and_order(rng):
    x = rng.standard_normal((40, 3))
    dec = svd(x)
    assert dec.U.shape == (40, 3)
    assert np.all(np.diff(dec.singular_values) <= 0)
    assert np.max(np.abs(dec.reconstruct() - x)) <= SVD_RECON_TOL


def test_expm_against_taylor_series(rng):
    for _ in range(20):
        a = rng.standard_normal((3, 3)) * 0.3
        np.testing.assert_allclose(expm_dt(a, 1.0), taylor_expm(a), atol=1e-12)


def test_expm_diagonal_closed_form():
    a = np.diag([-1e-5, -3e-5])
    np.testing.assert_allclose(expm_dt(a, 3600.0), np.diag(np.exp([-0.036, -0.108])), rtol=1e-13)


def test_expm_defective_falls_back():
    # Jordan block: exp(t J) = e^{a t} [[1, t], [0, 1]]
    a, t = -0.3, 2.0
    j = np.array([[a, 1.0], [0.0, a]])
    expect = math.exp(a * t) * np.array([[1.0, t], [0.0, 1.0]])
    np.testing.assert_allclose(expm_dt(j, t), expect, rtol=1e-10)


def test_expm_zero_matrix_and_bad_dt():
    np.testing.assert_array_equal(expm_dt(np.zeros((3, 3)), 10.0), np.eye(3))
    with pytest.raises(NumericsError):
        expm_dt(np.eye(2), 0.0)
    with pytest.raises(NumericsError):
        expm_dt(np.eye(2), -1.0)


def test_expm_complex_spectrum_is_real_rotation():
    w = 0.7
    phi = expm_dt(np.array([[0.0, -w], [w, 0.0]]), 1.0)
    np.testing.assert_allclose(phi, [[math.cos(w), -math.sin(w)], [math.sin(w), math.cos(w)]], atol=1e-13)


def test_is_orthonormal():
    assert is_orthonormal(np.eye(3)[:, :2])
    assert not is_orthonormal(np.array([[1.0, 1.0], [0.0, 1.0]]))


square = arrays(np.float64, (3, 3), elements=st.floats(-2.0, 2.0, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(square, st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_expm_semigroup_property(a, t1, t2):
    lhs = expm_dt(a, t1 + t2)
    rhs = expm_dt(a, t1) @ expm_dt(a, t2)
    assert np.max(np.abs(lhs - rhs)) <= SEMIGROUP_TOL * max(1.0, np.abs(lhs).max())


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (6, 3), elements=st.floats(-10.0, 10.0, allow_nan=False)))
def test_svd_reconstruction_property(x):
    dec = svd(x)
    assert np.max(np.abs(dec.reconstruct() - x)) <= SVD_RECON_TOL * max(1.0, np.abs(x).max())
