"""Classical numerical range: support function, outer regions and 2x2 ellipses."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, dagger, herm_eig

DEFAULT_GRID = 720


def theta_grid(K: int) -> np.ndarray:
    return 2 * np.pi * np.arange(K) / K


# ---------------------------------------------------------------------------
# Ellipse


@dataclass(frozen=True)
class Ellipse:
    """Closed elliptical disk given by its foci and the length of its minor axis.

    ``minor_axis == 0`` gives the segment between the foci (a point when the
    foci coincide).
    """

    focus1: complex
    focus2: complex
    minor_axis: float

    def __post_init__(self):
        if not self.minor_axis >= 0:
            raise ValueError(f"minor axis must be >= 0, got {self.minor_axis}")

    @property
    def center(self) -> complex:
        return (self.focus1 + self.focus2) / 2

    @property
    def major_axis(self) -> float:
        return float(np.hypot(self.minor_axis, abs(self.focus1 - self.focus2)))

    @property
    def area(self) -> float:
        return float(np.pi * self.major_axis * self.minor_axis / 4)

    @property
    def _direction(self) -> complex:
        d = self.focus2 - self.focus1
        return d / abs(d) if abs(d) > 0 else 1.0

    def contains(self, z, tol: float = 0.0):
        """``|z - F1| + |z - F2| <= major_axis + tol`` (vectorized over ``z``)."""
        z = np.asarray(z)
        return np.abs(z - self.focus1) + np.abs(z - self.focus2) <= self.major_axis + tol

    def focal_excess(self, z):
        """``|z - F1| + |z - F2| - major_axis``; zero exactly on the boundary."""
        z = np.asarray(z)
        return np.abs(z - self.focus1) + np.abs(z - self.focus2) - self.major_axis

    def support(self, theta):
        """``max Re(e^{-i theta} z)`` over the ellipse."""
        theta = np.asarray(theta, dtype=float)
        a, b = self.major_axis / 2, self.minor_axis / 2
        rel = np.exp(-1j * theta) * self._direction
        return np.real(np.exp(-1j * theta) * self.center) + np.hypot(a * rel.real, b * rel.imag)

    def boundary(self, K: int = DEFAULT_GRID) -> np.ndarray:
        t = theta_grid(K)
        a, b = self.major_axis / 2, self.minor_axis / 2
        return self.center + self._direction * (a * np.cos(t) + 1j * b * np.sin(t))


def _sorted_pair(z1: complex, z2: complex) -> tuple[complex, complex]:
    return tuple(sorted((complex(z1), complex(z2)), key=lambda z: (z.real, z.imag)))


def eig_2x2(A) -> tuple[complex, complex]:
    """Eigenvalues of a 2x2 matrix via the quadratic formula, ordered by (Re, Im)."""
    (a, b), (c, d) = np.asarray(A, dtype=np.complex128)
    mid = (a + d) / 2
    disc = np.sqrt(((a - d) / 2) ** 2 + b * c)
    return _sorted_pair(mid + disc, mid - disc)


def ellipse_2x2(A) -> Ellipse:
    """W(A) for a 2x2 matrix: the elliptical disk with the eigenvalues as foci."""
    A = as_matrix(A, square=True)
    if A.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {A.shape}")
    l1, l2 = eig_2x2(A)
    minor2 = np.sum(np.abs(A) ** 2) - abs(l1) ** 2 - abs(l2) ** 2
    return Ellipse(l1, l2, float(np.sqrt(max(0.0, minor2))))


# ---------------------------------------------------------------------------
# Support function and regions


def _rotated_hermitian(A: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    rot = np.exp(-1j * thetas)[:, None, None]
    return (rot * A + np.conj(rot) * dagger(A)) / 2


def nr_support_batch(A, thetas) -> tuple[np.ndarray, np.ndarray]:
    """Support values and top eigenvectors for many directions at once."""
    A = as_matrix(A, square=True)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    w, v = np.linalg.eigh(_rotated_hermitian(A, thetas))
    return w[:, -1], v[:, :, -1]


def nr_support(A, theta: float) -> tuple[float, np.ndarray]:
    """Return ``h = max Re(e^{-i theta} W(A))`` and a unit witness ``x``.

    ``h`` is the top eigenvalue of ``(e^{-i theta} A + e^{i theta} A*)/2`` and
    ``<Ax, x>`` is a boundary point of W(A) with outer normal ``theta``.
    """
    A = as_matrix(A, square=True)
    eig = herm_eig(_rotated_hermitian(A, np.array([theta]))[0])
    return float(eig.values[0]), eig.vectors[:, 0]


def rayleigh(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``<Ax, x> = x* A x`` for a vector or a stack of vectors (last axis)."""
    return np.einsum("...i,ij,...j->...", np.conj(x), A, x)


@dataclass
class ConvexRegion:
    """Outer description of a compact convex set by support values on a uniform
    direction grid, plus known member points.

    ``exact`` is False when the support values are optimizer lower bounds
    rather than exact support values.
    """

    directions: np.ndarray
    support: np.ndarray
    inner_points: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    exact: bool = True

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=float)
        self.support = np.asarray(self.support, dtype=float)
        self.inner_points = np.asarray(self.inner_points, dtype=np.complex128).ravel()
        if self.directions.shape != self.support.shape:
            raise ValueError("directions and support must have the same length")

    @property
    def K(self) -> int:
        return len(self.directions)

    def contains(self, z, tol: float = 1e-9):
        """Membership in the outer polygon; vectorized over ``z``."""
        z = np.asarray(z, dtype=np.complex128)
        proj = np.real(np.exp(-1j * self.directions) * z[..., None])
        return np.all(proj <= self.support + tol, axis=-1)

    def vertices(self) -> np.ndarray:
        """Corners of the outer polygon (consecutive support lines intersected)."""
        t1, t2 = self.directions, np.roll(self.directions, -1)
        h1, h2 = self.support, np.roll(self.support, -1)
        det = np.sin(t2 - t1)
        x = (h1 * np.sin(t2) - h2 * np.sin(t1)) / det
        y = (h2 * np.cos(t1) - h1 * np.cos(t2)) / det
        return x + 1j * y

    def area(self) -> float:
        v = self.vertices()
        return float(0.5 * abs(np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)))

    def transformed(self, alpha: complex, beta: complex) -> "ConvexRegion":
        """Region of ``alpha * S + beta`` resampled on the same grid."""
        alpha = complex(alpha)
        if abs(alpha) == 0:
            sup = np.real(np.exp(-1j * self.directions) * beta)
        else:
            shifted = self.directions - np.angle(alpha)
            sup = abs(alpha) * _interp_support(self, shifted) + np.real(
                np.exp(-1j * self.directions) * beta)
        return ConvexRegion(self.directions, sup, alpha * self.inner_points + beta, self.exact)

    def hausdorff(self, other: "ConvexRegion") -> float:
        """Max support-value difference, the Hausdorff distance of convex sets on the grid."""
        if not np.allclose(self.directions, other.directions):
            raise ValueError("regions use different direction grids")
        return float(np.max(np.abs(self.support - other.support)))


def _interp_support(region: ConvexRegion, thetas: np.ndarray) -> np.ndarray:
    period = 2 * np.pi
    d = np.concatenate([region.directions, [region.directions[0] + period]])
    s = np.concatenate([region.support, [region.support[0]]])
    return np.interp(np.mod(thetas - d[0], period) + d[0], d, s)


def nr_region(A, K: int = DEFAULT_GRID) -> ConvexRegion:
    """Outer polygon of W(A) on a ``K``-direction grid, with boundary witnesses."""
    if K < 8:
        raise ValueError("grid size K must be at least 8")
    A = as_matrix(A, square=True)
    thetas = theta_grid(K)
    h, x = nr_support_batch(A, thetas)
    return ConvexRegion(thetas, h, rayleigh(A, x))


def nr_contains(A, z, K: int = DEFAULT_GRID, tol: float = 1e-9):
    """Grid test for ``z`` in W(A).

    False is rigorous; True holds up to the resolution of the outer grid.
    """
    if K < 64:
        raise ValueError("grid size K must be at least 64")
    return nr_region(A, K).contains(z, tol)


class BoundaryCertificateWarning(RuntimeWarning):
    """The eigenvalue test passed but the forced zero pattern did not."""


def boundary_certificate(A, phi: float, tol: float = 1e-9) -> bool:
    """Check that ``a11`` is extremal for ``A_phi = e^{i phi} A + e^{-i phi} A*``.

    True means ``2 Re(e^{i phi} a11)`` is the top eigenvalue of ``A_phi`` within
    ``tol`` and, as a consequence, the first row of ``A_phi`` vanishes off the
    diagonal, so ``|a_1j| = |a_j1|`` for all ``j >= 2``.  If the eigenvalue test
    passes but the first row does not vanish to ``tol`` (``a11`` is interior but
    within ``tol`` of the boundary), a warning is issued and False returned.
    """
    A = as_matrix(A, square=True)
    rot = np.exp(1j * phi)
    Aphi = rot * A + np.conj(rot) * dagger(A)
    lam = herm_eig(Aphi).values[0]
    if abs(Aphi[0, 0].real - lam) > tol:
        return False
    off = np.abs(Aphi[0, 1:])
    if off.size and off.max() > tol:
        warnings.warn(
            f"a11 passes the eigenvalue test at phi={phi:.6g} but the first row of "
            f"A_phi has off-diagonal entry {off.max():.3e} > tol={tol:g}",
            BoundaryCertificateWarning, stacklevel=2)
        return False
    return True


# ---------------------------------------------------------------------------
# Point clouds


def hull_vertices(points) -> np.ndarray:
    """The points on the convex hull boundary (all points if the hull is degenerate)."""
    z = np.asarray(points, dtype=np.complex128).ravel()
    if z.size < 4:
        return z
    try:
        return z[_hull(z).vertices]
    except Exception:  # scipy raises QhullError for collinear clouds
        return z


def hull_support(points, thetas) -> np.ndarray:
    """Support function of the convex hull of ``points`` at each direction."""
    z = hull_vertices(points)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if z.size == 0:
        return np.full(thetas.shape, -np.inf)
    out = np.empty(thetas.shape)
    rots = np.exp(-1j * thetas)
    for i in range(0, len(thetas), 64):
        out[i:i + 64] = np.max(np.real(rots[i:i + 64, None] * z[None, :]), axis=1)
    return out


def hull_hausdorff(p1, p2, K: int = 4096) -> float:
    """Hausdorff distance between the convex hulls of two point clouds."""
    t = theta_grid(K)
    return float(np.max(np.abs(hull_support(p1, t) - hull_support(p2, t))))


def _hull(points):
    from scipy.spatial import ConvexHull

    z = np.asarray(points, dtype=np.complex128).ravel()
    return ConvexHull(np.column_stack([z.real, z.imag]))


def hull_area(points) -> float:
    z = np.asarray(points).ravel()
    if z.size < 3:
        return 0.0
    try:
        return float(_hull(z).volume)
    except Exception:  # scipy raises QhullError for collinear clouds
        return 0.0


def hull_radii(points, center: complex = 0.0) -> tuple[float, float]:
    """Distance from ``center`` to the hull boundary: (min over edges, max over vertices).

    The minimum is negative when ``center`` lies outside the hull.
    """
    z = np.asarray(points, dtype=np.complex128).ravel() - center
    hull = _hull(z)
    inner = float(np.min(-hull.equations[:, 2]))
    outer = float(np.max(np.abs(z[hull.vertices])))
    return inner, outer
