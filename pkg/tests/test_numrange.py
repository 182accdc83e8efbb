import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rangelab.linalg import complete_unitary, elementary, haar_unitary
from rangelab.numrange import (BoundaryCertificateWarning, ConvexRegion, Ellipse,
                               boundary_certificate, eig_2x2, ellipse_2x2, hull_support,
                               nr_contains, nr_region, nr_support, nr_support_batch, rayleigh,
                               theta_grid)

from conftest import random_matrix

E12 = elementary(2)


# --- support function -------------------------------------------------------

def test_support_examples():
    assert np.isclose(nr_support(np.diag([0.0, 1.0]), 0.0)[0], 1)
    for theta in np.linspace(0, 2 * np.pi, 13):
        assert np.isclose(nr_support(E12, theta)[0], 0.5)
    assert np.isclose(nr_support([[0, 2], [1, 0]], 0.0)[0], 1.5)


def test_support_witness_is_boundary_point():
    A = random_matrix(4, 3)
    for theta in theta_grid(16):
        h, x = nr_support(A, theta)
        assert np.isclose(np.linalg.norm(x), 1)
        z = np.vdot(x, A @ x)
        assert np.isclose(np.real(np.exp(-1j * theta) * z), h, atol=1e-12)


def test_support_batch_matches_scalar():
    A = random_matrix(3, 5)
    thetas = theta_grid(32)
    h, _ = nr_support_batch(A, thetas)
    assert np.allclose(h, [nr_support(A, t)[0] for t in thetas], atol=1e-13)


def test_support_brute_force_oracle():
    # maximum of Re(e^{-i theta} <Ax, x>) over many random unit vectors never exceeds h
    A = random_matrix(3, 8)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((20000, 3)) + 1j * rng.standard_normal((20000, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    z = rayleigh(A, x)
    t = theta_grid(64)
    h, _ = nr_support_batch(A, t)
    sampled = hull_support(z, t)
    assert np.all(sampled <= h + 1e-12)
    assert np.max(h - sampled) < 0.05 * np.linalg.norm(A, 2)


# --- regions ------------------------------------------------------------------

def test_region_identity():
    reg = nr_region(np.eye(2), 64)
    assert np.allclose(reg.support, np.cos(reg.directions))
    assert np.allclose(reg.inner_points, 1)
    assert np.allclose(reg.vertices(), 1)


def test_region_nilpotent_disk():
    reg = nr_region(E12, 720)
    assert np.allclose(reg.support, 0.5)
    assert np.allclose(np.abs(reg.inner_points), 0.5)
    assert np.isclose(reg.area(), np.pi / 4, rtol=1e-4)


def test_region_normal_triangle():
    reg = nr_region(np.diag([1, 1j, -1]), 720)
    assert np.isclose(reg.support[0], 1)
    assert np.allclose(reg.support, hull_support([1, 1j, -1], reg.directions), atol=1e-12)
    assert np.isclose(reg.area(), 1.0, rtol=1e-6)


def test_region_rejects_small_grid():
    with pytest.raises(ValueError):
        nr_region(E12, 4)
    with pytest.raises(ValueError):
        nr_contains(E12, 0, K=16)


def test_contains_examples():
    assert nr_contains(E12, 0.49)
    assert not nr_contains(E12, 0.51 + 0j)
    assert nr_contains(np.eye(2), 1)
    assert list(nr_contains(E12, np.array([0, 0.49j, 0.6]))) == [True, True, False]


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6))
def test_convexity_of_inner_points(n, seed):
    reg = nr_region(random_matrix(n, seed), 256)
    p = reg.inner_points
    rng = np.random.default_rng(seed)
    i, j = rng.integers(0, len(p), (2, 200))
    assert np.all(reg.contains((p[i] + p[j]) / 2, tol=1e-9))
    assert np.all(reg.contains(p, tol=1e-9))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6), st.floats(0.1, 3), st.integers(0, 255),
       st.complex_numbers(max_magnitude=3))
def test_affine_covariance(n, seed, r, step, beta):
    K = 256
    A = random_matrix(n, seed)
    alpha = r * np.exp(2j * np.pi * step / K)
    moved = nr_region(alpha * A + beta * np.eye(n), K)
    t = theta_grid(K)
    direct = r * nr_support_batch(A, t - np.angle(alpha))[0] + np.real(np.exp(-1j * t) * beta)
    scale = 1 + r * np.linalg.norm(A, 2) + abs(beta)
    assert np.max(np.abs(moved.support - direct)) <= 1e-10 * scale
    # angles on the grid make the resampled transform exact
    assert np.max(np.abs(moved.support - nr_region(A, K).transformed(alpha, beta).support)) \
        <= 1e-10 * scale


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6))
def test_normal_matrix_is_hull_of_spectrum(n, seed):
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    U = haar_unitary(n, seed)
    reg = nr_region(U @ np.diag(lam) @ U.conj().T, 360)
    assert np.allclose(reg.support, hull_support(lam, reg.directions), atol=1e-10)


def test_region_hausdorff_and_grid_mismatch():
    a, b = nr_region(E12, 64), nr_region(2 * E12, 64)
    assert np.isclose(a.hausdorff(b), 0.5)
    with pytest.raises(ValueError):
        a.hausdorff(nr_region(E12, 32))
    with pytest.raises(ValueError):
        ConvexRegion([0.0, 1.0], [1.0])


# --- 2x2 ellipses -------------------------------------------------------------

def test_ellipse_examples():
    e = ellipse_2x2(E12)
    assert e.focus1 == 0 and e.focus2 == 0 and np.isclose(e.minor_axis, 1)
    e = ellipse_2x2([[0, 2], [1, 0]])
    assert np.allclose([e.focus1, e.focus2], [-np.sqrt(2), np.sqrt(2)])
    assert np.isclose(e.minor_axis, 1)
    assert np.isclose(e.support(0.0), 1.5)
    e = ellipse_2x2(np.eye(2))
    assert e.focus1 == e.focus2 == 1 and np.isclose(e.minor_axis, 0, atol=1e-7)


def test_ellipse_validation():
    with pytest.raises(ValueError):
        Ellipse(0, 1, -0.1)
    with pytest.raises(ValueError):
        ellipse_2x2(np.eye(3))
    e = Ellipse(-1, 1, 0.0)
    assert e.contains(0.5) and not e.contains(0.1j)


def test_eig_2x2_ordering():
    assert eig_2x2([[1j, 0], [0, -1j]]) == (-1j, 1j)
    assert eig_2x2([[2, 0], [0, -3]]) == (-3, 2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_elliptical_range_theorem(seed):
    A = random_matrix(2, seed)
    e = ellipse_2x2(A)
    t = theta_grid(90)
    h, x = nr_support_batch(A, t)
    assert np.max(np.abs(e.focal_excess(rayleigh(A, x)))) <= 1e-8
    assert np.allclose(e.support(t), h, atol=1e-10)


# --- boundary certificate ------------------------------------------------------

def test_certificate_examples():
    assert boundary_certificate(np.diag([1.0, 0.0]), 0.0)
    assert not boundary_certificate(E12, 0.0)
    # a11 = 1/2 is interior to the ellipse with foci 0, 1/2 and minor axis 1/2
    A = np.array([[0.5, 0.5], [0, 0]])
    assert not any(boundary_certificate(A, phi) for phi in theta_grid(360))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6), st.floats(0, 2 * np.pi))
def test_certificate_on_rotated_support_witness(n, seed, theta):
    A = random_matrix(n, seed)
    _, x = nr_support(A, theta)
    Q = complete_unitary(x[:, None])
    B = Q.conj().T @ A @ Q
    tol = 1e-9
    assert boundary_certificate(B, -theta, tol)
    gap = np.abs(np.abs(B[0, 1:]) - np.abs(B[1:, 0]))
    assert gap.max() <= 10 * tol


def test_certificate_warns_near_boundary():
    # eigenvalue test passes within a loose tol while the first row is not zero
    A = np.array([[1.0, 1e-3], [1e-3, 0.0]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ok = boundary_certificate(A, 0.0, tol=1e-5)
    assert not ok
    assert any(issubclass(w.category, BoundaryCertificateWarning) for w in caught)
