"""Unitary dilations of contractions and what can be certified inside them.

A unitary ``U`` of size ``n + k`` dilates ``T`` when its leading ``n x n`` block
is ``T``.  This module builds the Halmos dilation and a randomized two-sided
family around it, extracts the canonical ``(n+2) x (n+2)`` compression of a
dilation of ``cos(theta) E12``, certifies points of ``W_C(U)`` with explicit
unitaries, and estimates intersections of dilation ranges from their support
functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _ascent
from .cnum import (MembershipCertificate, collinear_spectrum, ky_fan_support,
                   wc_support_opt_many)
from .linalg import (as_matrix, complete_unitary, dagger, direct_sum,
                     haar_isometry, spectral_norm, stream,
                     unitarity_error)
from .numrange import DEFAULT_GRID, ConvexRegion, theta_grid

CONTRACTION_TOL = 1e-10
DEFAULT_PADS = (0, 1, 2, 4)  # offsets added to n


def _check_contraction(T) -> np.ndarray:
    T = as_matrix(T, square=True, name="T")
    nrm = float(spectral_norm(T))
    if nrm > 1 + CONTRACTION_TOL:
        raise ValueError(f"T is not a contraction: ||T|| = {nrm:.12g}")
    return T


def halmos_dilation(T) -> np.ndarray:
    """``[[T, sqrt(I - TT*)], [sqrt(I - T*T), -T*]]``.

    Both defect roots come from one SVD ``T = L diag(s) R*`` so that
    ``T D_T = D_T* T`` holds to rounding even when ``||T|| = 1``.
    """
    T = _check_contraction(T)
    n = T.shape[0]
    L, sv, Rh = np.linalg.svd(T)
    d = np.sqrt(np.clip((1 - sv) * (1 + sv), 0.0, None))
    D = dagger(Rh) @ (d[:, None] * Rh)
    Ds = L @ (d[:, None] * dagger(L))
    U = np.block([[T, Ds], [D, -dagger(T)]])
    U[:n, :n] = T
    return U


@dataclass
class DilationSpec:
    """Parameters of ``(I + P)(I + V)(Halmos(T) + I)(I + W)(I + Q)`` of size ``n + k``.

    ``V, W, P, Q`` are ``k x k`` unitaries (None means identity).  ``k = 0`` is
    allowed only when ``T`` is itself unitary, in which case the dilation is
    ``T``.
    """

    T: np.ndarray
    pad: int
    V: np.ndarray | None = None
    W: np.ndarray | None = None
    P: np.ndarray | None = None
    Q: np.ndarray | None = None

    def __post_init__(self):
        self.T = _check_contraction(self.T)
        n = self.T.shape[0]
        if self.pad == 0:
            if unitarity_error(self.T) > CONTRACTION_TOL:
                raise ValueError("pad 0 is only possible for unitary T")
        elif self.pad < n:
            raise ValueError(f"pad k={self.pad} must be >= n={n}")
        for name in "VWPQ":
            M = getattr(self, name)
            if M is None:
                continue
            M = as_matrix(M, square=True, name=name)
            if M.shape != (self.pad, self.pad) or unitarity_error(M) > 1e-10:
                raise ValueError(f"{name} must be a {self.pad}x{self.pad} unitary")
            setattr(self, name, M)

    @classmethod
    def random(cls, T, pad: int, seed=None) -> "DilationSpec":
        rng = stream(seed)
        if pad == 0:
            return cls(T, 0)
        P, V, W, Q = haar_isometry(pad, pad, rng, size=4)
        return cls(T, pad, V, W, P, Q)

    def build(self) -> np.ndarray:
        T = self.T
        n, k = T.shape[0], self.pad
        if k == 0:
            return T.copy()
        eye_n = np.eye(n)
        U = direct_sum(halmos_dilation(T), np.eye(k - n))
        for M in (self.W, self.Q):
            if M is not None:
                U = U @ direct_sum(eye_n, M)
        for M in (self.V, self.P):
            if M is not None:
                U = direct_sum(eye_n, M) @ U
        U[:n, :n] = T
        return U


def sample_dilation(spec_or_T, pad: int | None = None, seed=None) -> np.ndarray:
    """A unitary dilation of ``T`` from the two-sided family.

    With a ``DilationSpec`` it is built as given; with a matrix ``T`` the four
    ``pad x pad`` unitaries are drawn Haar from ``seed``.
    """
    if isinstance(spec_or_T, DilationSpec):
        return spec_or_T.build()
    T = as_matrix(spec_or_T, square=True, name="T")
    if pad is None:
        pad = T.shape[0]
    return DilationSpec.random(T, pad, seed).build()


def dilation_family(T, num: int, pads, seed=None):
    """``(seed_key, pad, U)`` for dilation ``i``: pad ``pads[i % len(pads)]``, stream ``(seed, i)``."""
    pads = list(pads)
    if not pads:
        raise ValueError("need at least one pad size")
    for i in range(num):
        pad = pads[i % len(pads)]
        yield i, pad, sample_dilation(T, pad, stream(seed, i))


# ---------------------------------------------------------------------------
# Canonical compression


@dataclass
class CanonicalCompression:
    """``T_hat = X* U X`` with the zero pattern forced by unitarity of ``U``.

    Rows 1-2 of ``T_hat`` are ``(0, cos, 0.., 0, -sin)`` and ``(0, .., 0, 1, 0)``,
    rows 3..n vanish, and the last two rows are
    ``(x1, x2 sin, x3, 0.., 0, x2 cos)`` and ``(y1, y2 sin, y3.., yn, 0, y2 cos)``
    (1-based).  ``B`` is the 4x4 block at indices ``(1, 2, n+1, n+2)``.
    """

    T_hat: np.ndarray
    B: np.ndarray
    x: np.ndarray
    y: np.ndarray
    x3: complex
    X: np.ndarray
    theta: float

    @property
    def n(self) -> int:
        return self.T_hat.shape[0] - 2

    @property
    def B_hat(self) -> np.ndarray:
        """Block at 1-based indices ``(2, n+1)``: ``[[0, 1], [x2 sin, 0]]``."""
        idx = [1, self.n]
        return self.T_hat[np.ix_(idx, idx)]

    def pattern_error(self) -> float:
        """Largest deviation from the required entries of ``T_hat``."""
        n, th = self.n, self.theta
        c, s = np.cos(th), np.sin(th)
        Th = self.T_hat
        expect_top = np.zeros((2, n + 2), dtype=np.complex128)
        expect_top[0, 1], expect_top[0, n + 1] = c, -s
        expect_top[1, n] = 1.0
        errs = [np.max(np.abs(Th[:2] - expect_top))]
        if n > 2:
            errs.append(np.max(np.abs(Th[2:n])))
        x1, x2 = self.x
        y1, y2 = self.y
        errs += [abs(Th[n, n]), abs(Th[n + 1, n]),
                 abs(Th[n, 1] - x2 * s), abs(Th[n, n + 1] - x2 * c),
                 abs(Th[n + 1, 1] - y2 * s), abs(Th[n + 1, n + 1] - y2 * c),
                 abs(Th[n, 0] - x1), abs(Th[n + 1, 0] - y1)]
        if n > 3:
            errs.append(np.max(np.abs(Th[n, 3:n])))
        if n > 2:
            errs.append(abs(Th[n, 2] - self.x3))
        return float(max(errs))

    def circle_blocks(self):
        """Indices ``(2, n+1, 3, .., n)`` (1-based) of ``T_hat`` and the 3x3 block there."""
        n = self.n
        order = [1, n] + list(range(2, n))
        return order, self.T_hat[np.ix_(order[:3], order[:3])]


def _phase_householder(a: np.ndarray) -> np.ndarray:
    """Unitary ``W`` with ``W* a = ||a|| e1`` (reflector times a diagonal phase)."""
    k = len(a)
    nrm = np.linalg.norm(a)
    if nrm == 0:
        return np.eye(k, dtype=np.complex128)
    ph = a[0] / abs(a[0]) if abs(a[0]) > 0 else 1.0
    u = a.astype(np.complex128).copy()
    u[0] += ph * nrm
    H = np.eye(k) - 2 * np.outer(u, np.conj(u)) / np.vdot(u, u).real
    D = np.eye(k, dtype=np.complex128)
    D[0, 0] = -ph
    return H @ D


def canonical_compression(U, n: int, theta: float | None = None, tol: float = 1e-8
                          ) -> CanonicalCompression:
    """Canonical compression of a unitary dilation ``U`` of ``cos(theta) E12 in M_n``.

    The defect space is rotated so the first row's defect part becomes
    ``-sin(theta) e_{n+2}`` and the second row's becomes ``e_{n+1}``; then a
    phase-corrected Householder reflection on coordinates ``3..n`` reduces
    ``(x3, .., xn)`` to ``(|x3|, 0, .., 0)``.
    """
    U = as_matrix(U, square=True, name="U")
    m = U.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    if unitarity_error(U) > 1e-9:
        raise ValueError("U is not unitary")
    if theta is None:
        theta = float(np.arccos(min(1.0, abs(U[0, 1]))))
    if not 0 < theta < np.pi / 2:
        raise ValueError(f"theta must lie in (0, pi/2), got {theta}")
    c, s = np.cos(theta), np.sin(theta)
    target = np.zeros((n, n))
    target[0, 1] = c
    if m < n or np.max(np.abs(U[:n, :n] - target)) > tol:
        raise ValueError("U is not a dilation of cos(theta) E12")
    if m < n + 2:
        raise ValueError(f"a dilation of cos(theta) E12 has size >= n+2, got {m}")
    xr, yr = U[0, n:], U[1, n:]
    v1 = np.conj(yr) / np.linalg.norm(yr)
    v2 = -np.conj(xr) / s
    v2 = v2 - v1 * np.vdot(v1, v2)
    v2 = v2 / np.linalg.norm(v2)
    V1 = complete_unitary(np.column_stack([v1, v2]), tol=1e-8)
    X = np.zeros((m, n + 2), dtype=np.complex128)
    X[:n, :n] = np.eye(n)
    X[n:, n:] = V1[:, :2]
    T_hat = dagger(X) @ U @ X
    if n > 2:
        W1 = _phase_householder(np.conj(T_hat[n, 2:n]))
        W = direct_sum(np.eye(2), W1, np.eye(2))
        X = X @ W
        T_hat = dagger(X) @ U @ X
    x = np.array([T_hat[n, 0], T_hat[n, 1] / s])
    y = np.array([T_hat[n + 1, 0], T_hat[n + 1, 1] / s])
    x3 = complex(T_hat[n, 2]) if n > 2 else 0j
    idx = [0, 1, n, n + 1]
    return CanonicalCompression(T_hat, T_hat[np.ix_(idx, idx)], x, y, x3, X, float(theta))


# ---------------------------------------------------------------------------
# Membership certificates


def isometry_to_unitary(X: np.ndarray) -> np.ndarray:
    """Complete an isometry to a unitary whose first columns are ``X``."""
    return complete_unitary(X, tol=1e-8)


def certify_membership(C, U, target: complex, restarts: int = 16, iters: int = 800,
                       tol: float = 1e-6, seed=None, initial=None) -> MembershipCertificate:
    """Search for a unitary ``V`` with ``tr((C + 0) V* U V) = target``.

    Minimizes ``|tr(C X* U X) - target|^2`` from ``restarts`` Haar starts (plus
    any ``initial`` unitaries, tried first) and stops as soon as one chain is
    within ``tol``.  An inconclusive result says nothing about non-membership,
    except when ``|target|`` exceeds ``sum sigma(C) ||U||``, which no value can.
    """
    C = as_matrix(C, square=True, name="C")
    U = as_matrix(U, square=True, name="U")
    m = U.shape[0]
    if m < C.shape[0]:
        raise ValueError("U must be at least as large as C")
    target = complex(target)
    bound = np.sum(np.linalg.svd(C, compute_uv=False)) * spectral_norm(U)
    if abs(target) > bound + tol:
        return MembershipCertificate.build(C, U, np.eye(m, dtype=np.complex128), target, tol,
                                           reason="target exceeds trace-norm bound",
                                           bound=float(bound))
    rng = stream(seed)
    starts = [] if initial is None else [np.asarray(V, dtype=np.complex128)
                                         for V in np.reshape(initial, (-1, m, m))]
    starts = np.concatenate([np.array(starts).reshape(-1, m, m),
                             haar_isometry(m, m, rng, size=restarts)])
    res = _ascent.ascend(C, U, starts, target=target, iters=iters, tol=tol, stop_on_first=True)
    resid = np.abs(res.g - target)
    best = int(np.argmin(resid))
    V, polished = res.V[best], False
    if resid[best] > tol:
        top = np.argsort(resid, kind="stable")[:4]
        pol = _ascent.polish(C, U, res.V[top], target=target)
        j = int(np.argmin(np.abs(pol.g - target)))
        if abs(pol.g[j] - target) < resid[best]:
            V, best, polished = pol.V[j], int(top[j]), True
    return MembershipCertificate.build(C, U, V, target, tol, iterations=res.iterations,
                                       start=best, polished=polished)


# ---------------------------------------------------------------------------
# Intersections of dilation ranges


@dataclass
class IntersectionEstimate(ConvexRegion):
    """Pointwise minimum of the per-dilation support functions.

    ``supports[i]`` holds dilation ``i``'s support values, so prefixes give the
    estimate for fewer dilations with the same seeds.
    """

    supports: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    meta: dict = field(default_factory=dict)

    def prefix(self, count: int) -> ConvexRegion:
        return ConvexRegion(self.directions, self.supports[:count].min(axis=0), exact=self.exact)


def dilation_support(C, U, thetas, restarts: int = 8, iters: int = 500, seed=None):
    """Support of ``W_C(U)``: exact for normal ``C`` with collinear spectrum, else a lower bound."""
    cs = collinear_spectrum(C)
    if cs is not None:
        phi, c = cs
        return ky_fan_support(c, U, np.asarray(thetas) - phi), True
    h, _, _ = wc_support_opt_many(C, U, thetas, restarts=restarts, iters=iters, seed=seed)
    return h, False


def intersection_estimate(T, C, num_dilations: int, pads=None, seed=None,
                          K: int = DEFAULT_GRID, restarts: int = 8, iters: int = 500
                          ) -> IntersectionEstimate:
    """Outer estimate of the intersection of ``W_C(U)`` over sampled dilations ``U``.

    ``pads`` are dilation sizes ``k`` (default ``n, n+1, n+2, n+4``).  Supports
    are exact when ``C`` is normal with collinear spectrum; otherwise they are
    optimizer lower bounds and ``exact`` is False.
    """
    if num_dilations < 1:
        raise ValueError("num_dilations must be >= 1")
    T = _check_contraction(T)
    C = as_matrix(C, square=True, name="C")
    n = T.shape[0]
    pads = [n + d for d in DEFAULT_PADS] if pads is None else list(pads)
    thetas = theta_grid(K)
    supports = np.empty((num_dilations, K))
    exact = True
    used = []
    for i, pad, U in dilation_family(T, num_dilations, pads, seed):
        supports[i], ex = dilation_support(C, U, thetas, restarts, iters, stream(seed, i, 1))
        exact &= ex
        used.append({"index": i, "pad": pad})
    meta = {"seed": seed, "pads": pads, "num_dilations": num_dilations, "exact": exact,
            "dilations": used}
    return IntersectionEstimate(thetas, supports.min(axis=0), exact=exact,
                                supports=supports, meta=meta)
