"""Distance from a matrix to the scalar matrices, ``min_mu ||C - mu I||``.

The primal problem is convex in ``mu`` and is solved by nested golden-section
searches over ``Re mu`` and ``Im mu``.  The dual is the maximum of ``|x* C y|``
over orthonormal pairs; at a minimizer ``mu*`` the two agree, and ``mu*`` is
certified by a top singular pair ``(C - mu* I) v = R u`` with ``u`` orthogonal to
``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import as_matrix, dagger, spectral_norm, stream

_INVPHI = (math.sqrt(5) - 1) / 2
MULTIPLICITY_GAP = 1e-8


@dataclass
class MinShiftResult:
    mu_star: complex
    R: float
    dual_value: float
    certificate_ok: bool
    witness_pair: tuple[np.ndarray, np.ndarray]


@dataclass
class OrthoPair:
    """An orthogonal top singular pair ``(C - mu I) v = sigma u``, ``u`` orthogonal to ``v``."""

    u: np.ndarray
    v: np.ndarray
    sigma: float
    overlap: float


def golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[a, b]`` to bracket width ``tol``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def min_shift_norm(C, tol: float = 1e-10, dual_restarts: int = 16, seed=0) -> MinShiftResult:
    """Solve ``R = min_mu ||C - mu I||`` and fill the dual and the certificate."""
    C = as_matrix(C, square=True)
    n = C.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    nrm = float(spectral_norm(C))
    center = np.trace(C) / n
    if nrm == 0:
        mu = 0j
    else:
        eye = np.eye(n)
        box = 2 * nrm
        step = tol * max(1.0, nrm)

        def f(re, im):
            return float(spectral_norm(C - (re + 1j * im) * eye))

        def inner(re):
            return golden_section(lambda im: f(re, im), center.imag - box, center.imag + box, step)

        re, _ = golden_section(lambda r: inner(r)[1], center.real - box, center.real + box, step)
        im, _ = inner(re)
        mu = _polish(C, complex(re, im))
    R = float(spectral_norm(C - mu * np.eye(n)))
    value, x, y = dual_orthopair(C, restarts=dual_restarts, seed=seed)
    ok = optimality_certificate(C, mu, tol=1e-6)
    return MinShiftResult(mu, R, value, ok, (x, y))


def _top_overlap(C: np.ndarray, mu: complex) -> tuple[complex, float, bool]:
    U, s, Vh = np.linalg.svd(C - mu * np.eye(C.shape[0]))
    simple = len(s) < 2 or s[1] < s[0] * (1 - MULTIPLICITY_GAP)
    return np.vdot(Vh[0].conj(), U[:, 0]), float(s[0]), simple


def _polish(C: np.ndarray, mu: complex, iters: int = 20) -> complex:
    """Newton on ``<v(mu), u(mu)> = 0`` where the top singular value is simple.

    Golden section resolves ``mu`` only to ~sqrt(eps) along flat directions;
    the stationarity condition pins it to working precision.  Steps that raise
    the norm are rejected.
    """
    F, s, simple = _top_overlap(C, mu)
    if not simple:
        return mu
    h = 1e-7 * max(1.0, s)
    for _ in range(iters):
        if abs(F) <= 1e-15:
            break
        Fa, _, _ = _top_overlap(C, mu + h)
        Fb, _, _ = _top_overlap(C, mu + 1j * h)
        J = np.array([[(Fa - F).real, (Fb - F).real], [(Fa - F).imag, (Fb - F).imag]]) / h
        try:
            d = np.linalg.solve(J, [-F.real, -F.imag])
        except np.linalg.LinAlgError:
            break
        cand = mu + d[0] + 1j * d[1]
        Fc, sc, simple_c = _top_overlap(C, cand)
        if not simple_c or sc > s * (1 + 1e-14) or abs(Fc) >= abs(F):
            break
        mu, F, s = cand, Fc, sc
    return mu


# ---------------------------------------------------------------------------
# Dual: max |x* C y| over orthonormal pairs


def _dual_objective(C: np.ndarray):
    """``-||(I - yy*) C y||^2`` for ``y = p / ||p||`` and its real gradient."""
    CtC = dagger(C) @ C
    n = C.shape[0]

    def fun(params):
        p = params[:n] + 1j * params[n:]
        s = np.vdot(p, p).real
        Cp = C @ p
        q = np.vdot(p, CtC @ p).real
        z = np.vdot(p, Cp)
        val = q / s - abs(z) ** 2 / s ** 2
        dq = (CtC @ p * s - q * p) / s ** 2
        dz = ((np.conj(z) * Cp + z * (dagger(C) @ p)) * s ** 2 - 2 * abs(z) ** 2 * s * p) / s ** 4
        grad = 2 * (dq - dz)
        return -val, -np.concatenate([grad.real, grad.imag])

    return fun


def _pair_from_y(C: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = y / np.linalg.norm(y)
    r = C @ y
    r = r - y * np.vdot(y, r)
    if np.linalg.norm(r) <= 1e-12 * max(np.linalg.norm(C), np.finfo(float).tiny):
        # Cy is (numerically) parallel to y: any unit vector orthogonal to y is optimal
        r = np.zeros_like(y)
        r[int(np.argmin(np.abs(y)))] = 1.0
        r = r - y * np.vdot(y, r)
    r = r / np.linalg.norm(r)
    r = r - y * np.vdot(y, r)
    return r / np.linalg.norm(r), y


def dual_orthopair(C, restarts: int = 16, iters: int = 500, seed=0):
    """Best ``|x* C y|`` over orthonormal pairs found by multi-start ascent.

    For a unit ``y`` the optimal ``x`` is the normalized component of ``Cy``
    orthogonal to ``y``, so the search runs over the sphere only.  Returns
    ``(value, x, y)``; the value is a lower bound of the maximum.
    """
    C = as_matrix(C, square=True)
    n = C.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    rng = stream(seed)
    fun = _dual_objective(C)
    best = (-1.0, None, None)
    for _ in range(restarts):
        p0 = rng.standard_normal(2 * n)
        res = minimize(fun, p0, jac=True, method="BFGS", options={"maxiter": iters, "gtol": 1e-12})
        y = res.x[:n] + 1j * res.x[n:]
        x, y = _pair_from_y(C, y)
        val = abs(np.vdot(x, C @ y))
        if val > best[0]:
            best = (val, x, y)
    return best


# ---------------------------------------------------------------------------
# Certificate


def _min_overlap(M: np.ndarray, seed=0) -> tuple[float, np.ndarray]:
    """Minimize ``|a* M a|`` over unit ``a``: a dense start grid then BFGS."""
    k = M.shape[0]

    def fun(params):
        a = params[:k] + 1j * params[k:]
        s = np.vdot(a, a).real
        z = np.vdot(a, M @ a)
        val = abs(z) ** 2 / s ** 2
        dz = (np.conj(z) * (M @ a) + z * (dagger(M) @ a)) / s ** 2 - 2 * abs(z) ** 2 * a / s ** 3
        grad = 2 * dz
        return val, np.concatenate([grad.real, grad.imag])

    rng = stream(seed)
    starts = rng.standard_normal((64, 2 * k))
    vals = [fun(p)[0] for p in starts]
    best = None
    for idx in np.argsort(vals)[:8]:
        res = minimize(fun, starts[idx], jac=True, method="BFGS",
                       options={"gtol": 1e-14, "maxiter": 2000})
        if best is None or res.fun < best.fun:
            best = res
    a = best.x[:k] + 1j * best.x[k:]
    a = a / np.linalg.norm(a)
    return float(abs(np.vdot(a, M @ a))), a


def orthogonal_top_pair(C, mu: complex, seed=0) -> OrthoPair:
    """Top singular pair of ``C - mu I`` with the smallest ``|<u, v>|``.

    With a simple top singular value the pair is unique up to phase.  Otherwise
    the right singular vectors ``v = V_k a`` of the top cluster map to
    ``u = U_k a``, and ``<u, v> = a* (V_k* U_k) a`` ranges over the numerical
    range of ``V_k* U_k``, which is searched for its point closest to 0.
    """
    C = as_matrix(C, square=True)
    A = C - mu * np.eye(C.shape[0])
    U, s, Vh = np.linalg.svd(A)
    V = dagger(Vh)
    sigma = float(s[0])
    k = int(np.sum(s >= s[0] * (1 - MULTIPLICITY_GAP))) if sigma > 0 else C.shape[0]
    if k == 1:
        u, v = U[:, 0], V[:, 0]
    else:
        M = dagger(V[:, :k]) @ U[:, :k]
        _, a = _min_overlap(M, seed=seed)
        u, v = U[:, :k] @ a, V[:, :k] @ a
    # fix the common phase: largest entry of v real positive
    j = int(np.argmax(np.abs(v)))
    ph = np.conj(v[j]) / abs(v[j])
    u, v = u * ph, v * ph
    return OrthoPair(u, v, sigma, float(abs(np.vdot(v, u))))


def optimality_certificate(C, mu: complex, tol: float = 1e-6) -> bool:
    """True iff some top singular pair of ``C - mu I`` has ``|<u, v>| <= tol``.

    This certifies that ``mu`` minimizes ``||C - mu I||``.
    """
    return orthogonal_top_pair(C, mu).overlap <= tol
