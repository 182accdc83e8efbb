"""Batched Riemannian ascent on the unitary group for trace objectives.

Every objective here is a function of ``g(V) = tr(C X* T X)`` where ``X`` is the
first ``n`` columns of the unitary ``V``.  Writing ``w`` for the complex weight
of the current objective, the Euclidean gradient with respect to ``X`` is

    G = conj(w) T X C + w T* X C*

(scaled by -2 for the squared-distance objective).  Steps move along
``V -> V cay(t Omega)`` with ``Omega`` the skew-Hermitian part of ``V* G``.  A
step is accepted only if it passes the Armijo test, so each chain is monotone.
The next step length is the maximizer of the quadratic model fitted to the
observed gain, clipped to [t/4, 2t] (at most t/2 after a rejection).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger

ARMIJO = 1e-4
GRAD_TOL = 1e-13


@dataclass
class AscentResult:
    V: np.ndarray        # (B, m, m)
    g: np.ndarray        # (B,) complex trace values
    f: np.ndarray        # (B,) objective values
    iterations: int


def trace_values(C: np.ndarray, T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``tr(C X* T X)`` for a batch of isometries ``X`` of shape (B, m, n)."""
    Y = dagger(X) @ (T @ X)
    return np.einsum("ij,bji->b", C, Y)


def _products(C, T, X):
    TX = T @ X
    g = np.einsum("ij,bji->b", C, dagger(X) @ TX)
    return g, TX @ C, (dagger(T) @ X) @ dagger(C)


def _cayley(omega: np.ndarray, step: np.ndarray) -> np.ndarray:
    m = omega.shape[-1]
    half = omega * (step[:, None, None] / 2)
    eye = np.eye(m)
    return np.linalg.solve(eye - half, eye + half)


def _reorthonormalize(V: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(V)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def ascend(C: np.ndarray, T: np.ndarray, V0: np.ndarray, *, theta=None, target=None,
           iters: int = 500, tol: float = 0.0, stop_on_first: bool = False,
           step0: float | None = None, grad_tol: float = GRAD_TOL) -> AscentResult:
    """Run monotone ascent from each unitary in ``V0``.

    Exactly one of ``theta`` (maximize ``Re(e^{-i theta} g)``) or ``target``
    (minimize ``|g - target|^2``) must be given; both broadcast over the batch.
    With ``target`` and ``stop_on_first`` the loop ends as soon as any chain
    reaches residual ``<= tol``.  A chain stops once its Riemannian gradient
    norm falls below ``grad_tol`` times ``||C|| ||T||``.
    """
    if (theta is None) == (target is None):
        raise ValueError("give exactly one of theta or target")
    V = np.array(V0, dtype=np.complex128)
    B, m, _ = V.shape
    n = C.shape[0]
    if theta is not None:
        rot = np.broadcast_to(np.exp(1j * np.asarray(theta, dtype=float)), (B,)).copy()
    else:
        tgt = np.broadcast_to(np.asarray(target, dtype=np.complex128), (B,)).copy()

    def objective(g):
        if theta is not None:
            return np.real(np.conj(rot) * g)
        return -np.abs(g - tgt) ** 2

    def objective_at(g, idx):
        if theta is not None:
            return np.real(np.conj(rot[idx]) * g)
        return -np.abs(g - tgt[idx]) ** 2

    def weight(g):
        if theta is not None:
            return rot
        return -2 * (g - tgt)

    scale = np.linalg.norm(C) * np.linalg.norm(T)
    if scale == 0:
        g, _, _ = _products(C, T, V[:, :, :n])
        return AscentResult(V, g, objective(g), 0)
    step = np.full(B, 1.0 / scale if step0 is None else step0)
    g, TXC, ThXCh = _products(C, T, V[:, :, :n])
    f = objective(g)
    active = np.ones(B, dtype=bool)
    have_prev = np.zeros(B, dtype=bool)
    prev_omega = np.zeros_like(V)
    prev_move = np.zeros_like(V)
    k = 0
    for k in range(1, iters + 1):
        if target is not None and tol > 0:
            hit = np.abs(g - tgt) <= tol
            if stop_on_first and hit.any():
                break
            active &= ~hit
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Va = V[idx]
        w = weight(g)[idx]
        G = np.zeros_like(Va)
        G[:, :, :n] = np.conj(w)[:, None, None] * TXC[idx] + w[:, None, None] * ThXCh[idx]
        Z = dagger(Va) @ G
        omega = (Z - dagger(Z)) / 2
        slope = np.real(np.einsum("bij,bij->b", np.conj(omega), omega))
        st = step[idx]
        # Barzilai-Borwein length from the last accepted move, when it applies
        has = have_prev[idx]
        if has.any():
            sv = prev_move[idx[has]]
            yv = prev_omega[idx[has]] - omega[has]
            sy = np.real(np.einsum("bij,bij->b", np.conj(sv), yv))
            ss = np.real(np.einsum("bij,bij->b", np.conj(sv), sv))
            bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1), st[has])
            st[has] = np.clip(bb, 1e-18 / scale, 1e6 / scale)
        Vn = Va @ _cayley(omega, st)
        gn, TXCn, ThXChn = _products(C, T, Vn[:, :, :n])
        fn = objective_at(gn, idx)
        pred = st * slope
        ratio = np.where(pred > 0, (fn - f[idx]) / np.where(pred > 0, pred, 1), 0.0)
        ok = ratio >= ARMIJO
        acc = idx[ok]
        V[acc], g[acc], f[acc] = Vn[ok], gn[ok], fn[ok]
        TXC[acc], ThXCh[acc] = TXCn[ok], ThXChn[ok]
        prev_omega[acc] = omega[ok]
        prev_move[acc] = st[ok, None, None] * omega[ok]
        have_prev[idx] = ok
        model = st / (2 * np.maximum(1 - ratio, 1e-12))
        st = np.where(ok, np.clip(model, st / 4, 2 * st), np.clip(model, st / 4, st / 2))
        step[idx] = np.minimum(st, 1e6 / scale)
        # a chain is finished once its gradient or its step vanishes
        done = (slope <= (grad_tol * scale) ** 2) | (step[idx] < 1e-18 / scale)
        active[idx[done]] = False
        if k % 50 == 0:
            V = _reorthonormalize(V)
            g, TXC, ThXCh = _products(C, T, V[:, :, :n])
            f = objective(g)
    V = _reorthonormalize(V)
    g, _, _ = _products(C, T, V[:, :, :n])
    return AscentResult(V, g, objective(g), k)


# ---------------------------------------------------------------------------
# Second-order polish


def _skew_basis(m: int) -> np.ndarray:
    """Orthonormal basis (Frobenius) of the m x m skew-Hermitian matrices."""
    out = []
    for j in range(m):
        e = np.zeros((m, m), dtype=np.complex128)
        e[j, j] = 1j
        out.append(e)
    r = 1 / np.sqrt(2)
    for j in range(m):
        for k in range(j + 1, m):
            a = np.zeros((m, m), dtype=np.complex128)
            a[j, k], a[k, j] = r, -r
            b = np.zeros((m, m), dtype=np.complex128)
            b[j, k] = b[k, j] = 1j * r
            out += [a, b]
    return np.array(out)


def polish(C: np.ndarray, T: np.ndarray, V0: np.ndarray, *, theta=None, target=None,
           iters: int = 30, h: float = 1e-5) -> AscentResult:
    """Saddle-free Newton steps on the unitary group from each unitary in ``V0``.

    The Hessian of the objective in the Lie algebra is formed by central
    differences of the Riemannian gradient; directions of negative curvature
    are scaled by ``1/|curvature|`` and the step is backtracked until it
    increases the objective, so every chain stays monotone.  Used after
    first-order ascent on ill-conditioned problems (near-equal weights).
    """
    if (theta is None) == (target is None):
        raise ValueError("give exactly one of theta or target")
    V = np.array(V0, dtype=np.complex128)
    B, m, _ = V.shape
    n = C.shape[0]
    basis = _skew_basis(m)
    d = len(basis)
    if theta is not None:
        rot = np.broadcast_to(np.exp(1j * np.asarray(theta, dtype=float)), (B,)).copy()
    else:
        tgt = np.broadcast_to(np.asarray(target, dtype=np.complex128), (B,)).copy()

    def objective(g, sel):
        if theta is not None:
            return np.real(np.conj(rot[sel]) * g)
        return -np.abs(g - tgt[sel]) ** 2

    def grad_coords(Vb, sel):
        g, TXC, ThXCh = _products(C, T, Vb[:, :, :n])
        w = rot[sel] if theta is not None else -2 * (g - tgt[sel])
        G = np.zeros_like(Vb)
        G[:, :, :n] = np.conj(w)[:, None, None] * TXC + w[:, None, None] * ThXCh
        Z = dagger(Vb) @ G
        omega = (Z - dagger(Z)) / 2
        return g, np.real(np.einsum("kij,bij->bk", np.conj(basis), omega))

    sel_all = np.arange(B)
    g, grad = grad_coords(V, sel_all)
    f = objective(g, sel_all)
    scale = max(np.linalg.norm(C) * np.linalg.norm(T), 1e-300)
    cay_p = _cayley(np.repeat(basis[None], B, 0).reshape(-1, m, m), np.full(B * d, h))
    cay_m = _cayley(np.repeat(basis[None], B, 0).reshape(-1, m, m), np.full(B * d, -h))
    k = 0
    for k in range(1, iters + 1):
        Vrep = np.repeat(V, d, axis=0)
        sel = np.repeat(sel_all, d)
        _, gp = grad_coords(Vrep @ cay_p, sel)
        _, gm = grad_coords(Vrep @ cay_m, sel)
        H = ((gp - gm) / (2 * h)).reshape(B, d, d).transpose(0, 2, 1)
        H = (H + np.swapaxes(H, 1, 2)) / 2
        mu, Q = np.linalg.eigh(H)
        floor = 1e-10 * np.maximum(np.max(np.abs(mu), axis=1), 1e-300)
        coef = np.einsum("bki,bk->bi", Q, grad) / np.maximum(np.abs(mu), floor[:, None])
        step = np.einsum("bki,bi->bk", Q, coef)
        Om = np.einsum("bk,kij->bij", step, basis)
        t = np.ones(B)
        moved = np.zeros(B, dtype=bool)
        for _ in range(40):
            todo = np.flatnonzero(~moved & (t > 1e-12))
            if todo.size == 0:
                break
            Vn = V[todo] @ _cayley(Om[todo], t[todo])
            gn, _, _ = _products(C, T, Vn[:, :, :n])
            fn = objective(gn, todo)
            better = fn > f[todo]
            acc = todo[better]
            V[acc] = Vn[better]
            g[acc], f[acc] = gn[better], fn[better]
            moved[acc] = True
            t[todo[~better]] /= 2
        if not moved.any():
            break
        V[moved] = _reorthonormalize(V[moved])
        g2, grad2 = grad_coords(V[moved], sel_all[moved])
        g[moved], grad[moved] = g2, grad2
        f[moved] = objective(g2, sel_all[moved])
        if np.max(np.abs(grad)) <= 1e-15 * scale:
            break
    return AscentResult(V, g, f, k)
