"""C-numerical ranges ``W_C(T) = {tr(C X* T X) : X* X = I_n}``.

Sampling, exact support values when ``C`` is normal with collinear spectrum,
optimization-based support values otherwise, the disk ``W_C(E12)``, the 2x2
ellipse ``W_C(B)`` used in the dilation argument, and the circle-path
construction that places a point in ``W_C(B)`` for 3x3 blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _ascent
from .distance import min_shift_norm
from .linalg import (as_matrix, dagger, haar_isometry, spectral_norm, stream,
                     unitarity_error)
from .numrange import Ellipse, theta_grid

UNITARY_TOL = 1e-10


@dataclass
class MembershipCertificate:
    """A unitary ``V`` with ``tr((C + 0) V* U V) = achieved``, close to ``target``.

    ``status`` is ``"certified"`` when ``residual <= tol``; otherwise
    ``"inconclusive"`` (which never means the target is outside the set).
    """

    V: np.ndarray
    achieved: complex
    target: complex
    residual: float
    status: str
    tol: float
    info: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @classmethod
    def build(cls, C, U, V, target, tol, **info) -> "MembershipCertificate":
        achieved = wc_value(C, U, V)
        residual = abs(achieved - target)
        status = "certified" if residual <= tol else "inconclusive"
        return cls(V, achieved, complex(target), float(residual), status, tol, info)


def _check_problem(C, T):
    C = as_matrix(C, square=True, name="C")
    T = as_matrix(T, square=True, name="T")
    if T.shape[0] < C.shape[0]:
        raise ValueError(f"T ({T.shape[0]}x{T.shape[0]}) must be at least as large as C "
                         f"({C.shape[0]}x{C.shape[0]})")
    return C, T


def pad(C, m: int) -> np.ndarray:
    """``C + 0_{m-n}``."""
    C = np.asarray(C, dtype=np.complex128)
    out = np.zeros((m, m), dtype=np.complex128)
    out[:C.shape[0], :C.shape[1]] = C
    return out


def wc_value(C, T, V, tol: float = UNITARY_TOL) -> complex:
    """``tr((C + 0) V* T V)`` for a unitary ``V``."""
    C, T = _check_problem(C, T)
    V = as_matrix(V, square=True, name="V")
    if V.shape != T.shape:
        raise ValueError(f"V must be {T.shape}, got {V.shape}")
    err = unitarity_error(V)
    if err > tol:
        raise ValueError(f"V is not unitary: ||V*V - I|| = {err:.3e}")
    X = V[:, :C.shape[0]]
    return complex(np.trace(C @ dagger(X) @ T @ X))


def wc_sample(C, T, N: int, seed=None, boundary: int = 0, chunk: int = 1 << 14) -> np.ndarray:
    """``N`` exact members of ``W_C(T)``.

    All points are ``wc_value`` at Haar-random unitaries, except that when
    ``boundary = K > 0`` the last points are replaced by support witnesses
    found by ascent in ``K`` equally spaced directions, refined adaptively (see
    ``boundary_witnesses``).  Haar samples concentrate away from the boundary
    once ``n >= 3``; the witnesses pin the hull to the set's extent.
    """
    C, T = _check_problem(C, T)
    if N < 1:
        raise ValueError("N must be >= 1")
    n, m = C.shape[0], T.shape[0]
    edge = boundary_witnesses(C, T, boundary, seed=stream(seed, 1))[:N] if boundary else []
    K = len(edge)
    rng = stream(seed)
    out = np.empty(N, dtype=np.complex128)
    done = 0
    while done < N - K:
        b = min(chunk, N - K - done)
        X = haar_isometry(m, n, rng, size=b)
        out[done:done + b] = _ascent.trace_values(C, T, X)
        done += b
    out[N - K:] = edge
    return out


def _corner_heights(thetas, h, g):
    """Distance from each pair of consecutive support lines' intersection to the
    chord between their witnesses: a bound on how far the hull of the witnesses
    can fall short of the set between the two directions."""
    t2, h2, g2 = np.roll(thetas, -1), np.roll(h, -1), np.roll(g, -1)
    det = np.sin(t2 - thetas)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = (h * np.sin(t2) - h2 * np.sin(thetas)) / det
        y = (h2 * np.cos(thetas) - h * np.cos(t2)) / det
    q = x + 1j * y
    chord = g2 - g
    length = np.abs(chord)
    safe = np.where(length > 0, length, 1.0)
    height = np.where(length > 0, np.abs(np.imag(np.conj(chord) * (q - g))) / safe,
                      np.abs(q - g))
    return np.where(np.isfinite(height), height, np.inf)


def boundary_witnesses(C, T, K: int, seed=None, rel_tol: float = 3e-4, rounds: int = 6,
                       restarts: int = 6, iters: int = 150, grad_tol: float = 1e-6
                       ) -> np.ndarray:
    """Members of ``W_C(T)`` near its hull boundary.

    Support witnesses in ``K`` equally spaced directions, then up to ``rounds``
    repair passes.  A direction whose value is beaten by another direction's
    witness is stuck at a local maximum and is re-ascended from that witness.
    The midpoint direction is added wherever the gap bound of
    ``_corner_heights`` exceeds ``rel_tol`` times the witnesses' diameter,
    starting from the neighbouring witnesses.
    """
    C, T = _check_problem(C, T)
    thetas = theta_grid(K)
    opts = dict(iters=iters, polish=False, grad_tol=grad_tol)
    h, g, V = wc_support_opt_many(C, T, thetas, restarts=restarts, seed=seed, **opts)
    for _ in range(rounds):
        scale = max(np.ptp(g.real), np.ptp(g.imag), 1e-300)
        proj = np.real(np.exp(-1j * thetas)[:, None] * g[None, :])
        stale = np.nonzero(proj.max(axis=1) > h + 1e-9 * scale)[0]
        big = np.nonzero(_corner_heights(thetas, h, g) > rel_tol * scale)[0]
        if stale.size == 0 and big.size == 0:
            break
        # one batch: stale directions restart from the witness that beats them,
        # midpoints from both neighbours; two starts per direction
        nxt = (big + 1) % len(thetas)
        mids = np.mod(thetas[big] + np.mod(thetas[nxt] - thetas[big], 2 * np.pi) / 2, 2 * np.pi)
        src = np.argmax(proj[stale], axis=1)
        first = np.concatenate([src, big])
        second = np.concatenate([stale, nxt])
        V0 = np.stack([V[first], V[second]], axis=1).reshape(-1, *V.shape[1:])
        hb, gb, Vb = wc_support_opt_many(C, T, np.concatenate([thetas[stale], mids]),
                                         restarts=2, V0=V0, **opts)
        k = stale.size
        up = hb[:k] > h[stale]
        h[stale[up]], g[stale[up]], V[stale[up]] = hb[:k][up], gb[:k][up], Vb[:k][up]
        thetas = np.concatenate([thetas, mids])
        order = np.argsort(thetas, kind="stable")
        thetas = thetas[order]
        h = np.concatenate([h, hb[k:]])[order]
        g = np.concatenate([g, gb[k:]])[order]
        V = np.concatenate([V, Vb[k:]])[order]
    return g


def ky_fan_support(c, T, thetas) -> np.ndarray:
    """``sum_j c_[j] lambda_[j]`` of ``(e^{-i t} T + e^{i t} T*)/2``, both descending."""
    c = np.asarray(c)
    T = np.asarray(T, dtype=np.complex128)
    m = T.shape[0]
    cc = np.sort(np.concatenate([np.real(c), np.zeros(m - len(c))]))[::-1]
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    rot = np.exp(-1j * thetas)[:, None, None]
    lam = np.linalg.eigvalsh((rot * T + np.conj(rot) * dagger(T)) / 2)[:, ::-1]
    return lam @ cc


def wc_support_realc(c, T, theta):
    """Exact support of the c-numerical range ``W_c(T)`` for a real weight vector."""
    c = np.asarray(c)
    if np.iscomplexobj(c) and np.any(np.imag(c) != 0):
        raise ValueError("weights must be real; use wc_support_opt for complex C")
    T = as_matrix(T, square=True, name="T")
    if len(c) > T.shape[0]:
        raise ValueError("more weights than the dimension of T")
    h = ky_fan_support(np.real(c), T, theta)
    return float(h[0]) if np.ndim(theta) == 0 else h


def collinear_spectrum(C, tol: float = 1e-10):
    """For normal ``C`` whose eigenvalues lie on a line through 0 return
    ``(phi, c)`` with ``C`` unitarily similar to ``e^{i phi} diag(c)``, ``c`` real;
    otherwise None.
    """
    C = as_matrix(C, square=True)
    scale = max(float(spectral_norm(C)), 1e-300)
    if np.linalg.norm(C @ dagger(C) - dagger(C) @ C, 2) > tol * scale ** 2:
        return None
    lam = np.linalg.eigvals(C)
    k = int(np.argmax(np.abs(lam)))
    phi = float(np.angle(lam[k])) if abs(lam[k]) > 0 else 0.0
    rot = lam * np.exp(-1j * phi)
    if np.max(np.abs(rot.imag)) > tol * scale:
        return None
    return phi, rot.real


def wc_support_exact(C, T, thetas):
    """Exact support values when ``C`` is normal with collinear spectrum, else None."""
    C, T = _check_problem(C, T)
    cs = collinear_spectrum(C)
    if cs is None:
        return None
    phi, c = cs
    return ky_fan_support(c, T, np.asarray(thetas) - phi)


def wc_support_opt_many(C, T, thetas, restarts: int = 8, iters: int = 500, seed=None,
                        V0=None, polish: bool = True, grad_tol: float = _ascent.GRAD_TOL):
    """Best ``Re(e^{-i theta} tr(C V* T V))`` found for each direction.

    Multi-restart first-order ascent, then (``polish``) Newton steps on the
    best chain per direction.  Returns ``(h, g, V)``: lower bounds, the
    achieved trace values and the witness unitaries.
    """
    C, T = _check_problem(C, T)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    K, m = len(thetas), T.shape[0]
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = stream(seed)
    starts = haar_isometry(m, m, rng, size=K * restarts)
    if V0 is not None:
        starts[:len(V0)] = V0
    res = _ascent.ascend(C, T, starts, theta=np.repeat(thetas, restarts), iters=iters,
                         grad_tol=grad_tol)
    f = res.f.reshape(K, restarts)
    best = np.argmax(f, axis=1)  # first maximum: ties go to the lowest restart index
    idx = np.arange(K) * restarts + best
    if not polish:
        return f[np.arange(K), best], res.g[idx], res.V[idx]
    pol = _ascent.polish(C, T, res.V[idx], theta=thetas)
    return pol.f, pol.g, pol.V


def wc_support_opt(C, T, theta: float, restarts: int = 8, iters: int = 500, seed=None):
    """Certified lower bound of the support of ``W_C(T)`` at ``theta`` and its witness.

    Multi-restart monotone ascent on the unitary group (Cayley steps with
    Armijo acceptance) followed by a Newton polish.  Never claimed to be the
    exact support.
    """
    h, _, V = wc_support_opt_many(C, T, [theta], restarts, iters, seed)
    return float(h[0]), V[0]


def rank_one_nilpotent_disk(C) -> float:
    """Radius of the disk ``W_C(E12)``, which equals ``min_mu ||C - mu I||``."""
    C = as_matrix(C, square=True)
    if C.shape[0] < 2:
        raise ValueError("need n >= 2")
    return min_shift_norm(C).R


def is_rank_one_normal(C, tol: float = 1e-8) -> bool:
    """True iff ``C = gamma v v*`` for a unit ``v`` (within ``tol``)."""
    C = as_matrix(C, square=True)
    s = np.linalg.svd(C, compute_uv=False)
    if s[0] == 0:
        raise ValueError("C must be nonzero")
    rank_one = len(s) < 2 or s[1] <= tol * s[0]
    normal = np.linalg.norm(C @ dagger(C) - dagger(C) @ C, 2) <= tol * s[0] ** 2
    return bool(rank_one and normal)


# ---------------------------------------------------------------------------
# The 2x2 blocks of the dilation argument


def wca_blocks(g: complex, f: float, x2: complex, theta: float):
    """``C_hat = [[g, f], [1, g]]`` and ``B_hat = [[0, 1], [x2 sin(theta), 0]]``."""
    C_hat = np.array([[g, f], [1, g]], dtype=np.complex128)
    B_hat = np.array([[0, 1], [x2 * np.sin(theta), 0]], dtype=np.complex128)
    return C_hat, B_hat


def wca_ellipse(g: complex, f: float, x2: complex, theta: float) -> Ellipse:
    """``W_{C_hat}(B_hat)``: foci ``+-2 sqrt(f x2 sin(theta))``, minor axis
    ``2 (1 - f sin(theta) |x2|)``, independent of ``g``."""
    if not 0 <= f <= 1:
        raise ValueError(f"f must lie in [0, 1], got {f}")
    if abs(x2) > 1 + 1e-12:
        raise ValueError(f"|x2| must be <= 1, got {abs(x2)}")
    if not 0 <= theta < np.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2), got {theta}")
    if not np.isfinite(complex(g)):
        raise ValueError("g must be finite")
    s = np.sin(theta)
    root = 2 * np.sqrt(complex(f * x2 * s))
    f1, f2 = sorted((root, -root), key=lambda z: (z.real, z.imag))
    return Ellipse(f1, f2, float(2 * max(0.0, 1 - f * s * abs(x2))))


# ---------------------------------------------------------------------------
# Circle path


def _eig_2x2_unitary(V: np.ndarray):
    """Eigenphases in (-pi, pi] and spectral projectors of a 2x2 unitary."""
    (a, b), (c, d) = V
    mid = (a + d) / 2
    disc = np.sqrt(((a - d) / 2) ** 2 + b * c)
    l1, l2 = mid + disc, mid - disc
    if abs(l1 - l2) < 1e-12:
        lam = (l1 + l2) / 2
        return [np.angle(lam)], [np.eye(2)]
    P1 = (V - l2 * np.eye(2)) / (l1 - l2)
    P2 = np.eye(2) - P1
    return [np.angle(l1), np.angle(l2)], [P1, P2]


def principal_log_2x2(V) -> np.ndarray:
    """Hermitian ``H`` with ``exp(iH) = V`` and eigenvalues in (-pi, pi]."""
    V = np.asarray(V, dtype=np.complex128)
    phases, projs = _eig_2x2_unitary(V)
    phases = [np.pi if np.isclose(p, -np.pi) else p for p in phases]
    H = sum(p * P for p, P in zip(phases, projs))
    return (H + dagger(H)) / 2


def expi_2x2(K: np.ndarray) -> np.ndarray:
    """``exp(iK)`` for (a stack of) Hermitian 2x2 ``K`` via the Pauli form."""
    K = np.asarray(K, dtype=np.complex128)
    a0 = (K[..., 0, 0] + K[..., 1, 1]).real / 2
    traceless = K - a0[..., None, None] * np.eye(2)
    r = np.sqrt(np.abs(traceless[..., 0, 0]) ** 2 + np.abs(traceless[..., 0, 1]) ** 2)
    sinc = np.where(r > 1e-300, np.sin(r) / np.where(r > 1e-300, r, 1), 1.0)
    out = np.cos(r)[..., None, None] * np.eye(2) + 1j * sinc[..., None, None] * traceless
    return np.exp(1j * a0)[..., None, None] * out


SWAP = np.array([[0, 1], [1, 0]], dtype=np.complex128)


@dataclass
class CirclePath:
    """Samples of the circles ``S(V_t)``: centers, radii and ``V_t`` for ``t`` in [0, 1]."""

    t: np.ndarray
    center: np.ndarray
    radius: np.ndarray
    weight: np.ndarray
    H: np.ndarray
    G: np.ndarray


def _path_unitaries(H, G, t):
    t = np.atleast_1d(t)
    return expi_2x2(t[:, None, None] * H + (1 - t)[:, None, None] * G)


def _circle_data(Ct, Bt, Vt):
    """Centers ``tr(C_hat Vt* B_hat Vt)`` and weights ``(0, c32) Vt* (0, x3)^T``."""
    C_hat, B_hat = Ct[:2, :2], Bt[:2, :2]
    row, col = Ct[2, :2], Bt[:2, 2]
    center = _ascent.trace_values(C_hat, B_hat, Vt)
    weight = np.einsum("i,bij,j->b", row, dagger(Vt), col)
    return center, weight


def circle_family(Ct, Bt, V1, steps: int = 2000) -> CirclePath:
    """Circles ``S(V_t)`` along ``V_t = exp(i(tH + (1-t)G))``, ``e^{iH} = V1``, ``e^{iG} = swap``."""
    Ct = as_matrix(Ct, square=True)
    Bt = as_matrix(Bt, square=True)
    H = principal_log_2x2(V1)
    G = principal_log_2x2(SWAP)
    t = np.linspace(0.0, 1.0, steps + 1)
    center, weight = _circle_data(Ct, Bt, _path_unitaries(H, G, t))
    return CirclePath(t, center, np.abs(weight), weight, H, G)


def circle_path_certify(Ct, Bt, xi1: complex, V1, steps: int = 2000, tol: float = 1e-6,
                        t_tol: float = 1e-10) -> MembershipCertificate:
    """Certify ``xi1`` in ``W_{Ct}(Bt)`` for the 3x3 blocks of the dilation argument.

    ``Ct = [[g, f, c13], [1, g, 0], [0, c32, c33]]`` and
    ``Bt = [[0, 1, 0], [x2 sin(theta), 0, x3], [0, 0, 0]]``; ``V1`` is a 2x2 unitary
    with ``tr(C_hat V1* B_hat V1) = xi1``.  For ``V = V_t + [mu]`` the trace is
    ``center(t) + mu * weight(t)``, a circle as ``|mu| = 1`` varies.  The circle
    at ``t = 1`` is centred at ``xi1``; at ``t = 0`` it is the point
    ``x2 sin(theta) + f``.  A sign change of ``|xi1 - center(t)| - radius(t)`` is
    bracketed on the grid and bisected; the returned unitary ``V_t* + [mu]``
    is recomputed against ``xi1``.
    """
    Ct = as_matrix(Ct, square=True, name="Ct")
    Bt = as_matrix(Bt, square=True, name="Bt")
    if Ct.shape != (3, 3) or Bt.shape != (3, 3):
        raise ValueError("circle path needs 3x3 blocks")
    V1 = as_matrix(V1, square=True, name="V1")
    xi1 = complex(xi1)
    path = circle_family(Ct, Bt, V1, steps)
    phi = np.abs(xi1 - path.center) - path.radius

    def at(t):
        Vt = _path_unitaries(path.H, path.G, t)
        c, w = _circle_data(Ct, Bt, Vt)
        return Vt[0], c[0], w[0]

    def gap(t):
        _, c, w = at(t)
        return abs(xi1 - c) - abs(w)

    sign_change = np.nonzero((phi[:-1] > 0) & (phi[1:] <= 0) | (phi[:-1] <= 0) & (phi[1:] > 0))[0]
    info = {"steps": steps}
    if len(sign_change):
        # the crossing closest to t = 1
        i = sign_change[-1]
        lo, hi = path.t[i], path.t[i + 1]
        flo = phi[i]
        while hi - lo > t_tol:
            mid = (lo + hi) / 2
            fm = gap(mid)
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        t_star = (lo + hi) / 2
    else:
        t_star = float(path.t[int(np.argmin(np.abs(phi)))])
        info["no_crossing"] = True
    Vt, c, w = at(t_star)
    diff = xi1 - c
    if abs(w) > 0:
        mu = diff / abs(diff) * np.conj(w) / abs(w) if abs(diff) > 0 else 1.0
    else:
        mu = 1.0
    V = np.zeros((3, 3), dtype=np.complex128)
    V[:2, :2] = Vt
    V[2, 2] = mu
    info.update(t_star=float(t_star), center=complex(c), radius=float(abs(w)))
    return MembershipCertificate.build(Ct, Bt, V, xi1, tol, **info)
