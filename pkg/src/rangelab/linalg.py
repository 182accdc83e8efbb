"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The helpers here
validate shapes, compute Hermitian spectra, norms and PSD square roots, sample
Haar unitaries from seeded counter-based streams, and form compressions.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]

JACOBI_THRESHOLD = 1e-14
PSD_CLAMP = 1e-10


class HermEig(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def as_matrix(a, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array, raising ``ValueError`` otherwise."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + dagger(a)) / 2


def unitarity_error(u: np.ndarray) -> float:
    """Spectral norm of ``U*U - I``."""
    u = np.asarray(u)
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[-1]), 2))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_error(u) <= tol


# ---------------------------------------------------------------------------
# Hermitian eigensolvers


def jacobi_eigh(a: np.ndarray, threshold: float = JACOBI_THRESHOLD,
                max_sweeps: int = 60) -> HermEig:
    """Cyclic complex Jacobi rotations on a Hermitian matrix.

    Each rotation first removes the phase of ``a[p, q]`` and then applies the
    classical real rotation, so the accumulated transform stays unitary.  Stops
    when the off-diagonal Frobenius mass drops below ``threshold * ||A||_F``.
    """
    a = hermitian_part(np.array(a, dtype=np.complex128))
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= np.finfo(float).eps * 1e-3 * scale:
                    continue
                phase = apq / b
                tau = (a[q, q].real - a[p, p].real) / (2 * b)
                t = 1.0 / (abs(tau) + np.sqrt(1 + tau * tau))
                if tau < 0:
                    t = -t
                c = 1.0 / np.sqrt(1 + t * t)
                s = t * c
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = dagger(j) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ j
    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return HermEig(values[order], v[:, order])


def herm_eig(a, tol: float = 1e-10, method: str = "lapack") -> HermEig:
    """Full spectral decomposition of a Hermitian matrix, values descending.

    ``method="jacobi"`` uses the in-house cyclic Jacobi solver; the default
    LAPACK route is used on hot paths.
    """
    a = as_matrix(a, square=True)
    asym = np.linalg.norm(a - dagger(a), 2)
    if asym > tol * max(1.0, np.linalg.norm(a, 2)):
        raise ValueError(f"matrix is not Hermitian: ||A - A*|| = {asym:.3e} > tol={tol:g}")
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    w, v = np.linalg.eigh(hermitian_part(a))
    return HermEig(w[::-1].copy(), v[:, ::-1].copy())


def spectral_norm(a) -> float:
    """Largest singular value, as ``sqrt(lambda_max(A*A))``.

    Accuracy is about ``1e-8`` relative for the smaller singular values but the
    largest one is resolved to working precision.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    lam = np.linalg.eigvalsh(dagger(a) @ a)[..., -1]
    return np.sqrt(np.maximum(lam, 0.0))


def psd_sqrt(p, tol: float = PSD_CLAMP) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in ``[-tol, 0)`` are clamped to zero."""
    p = as_matrix(p, square=True)
    w, v = herm_eig(p, tol=max(tol, 1e-12))
    scale = max(1.0, abs(w[0]))
    if w[-1] < -tol * scale:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {w[-1]:.3e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return hermitian_part((v * w) @ dagger(v))


# ---------------------------------------------------------------------------
# Random unitaries


def stream(seed: SeedLike = None, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator for ``seed`` and an optional spawn key.

    ``stream(s, i)`` for different ``i`` are independent, so per-task streams
    can be drawn in any order or in parallel and stay reproducible.
    """
    if isinstance(seed, np.random.Generator):
        if not key:
            return seed
        seed = int(seed.integers(2**63))
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def ginibre(shape, rng: np.random.Generator) -> np.ndarray:
    """Standard complex Gaussian entries, E|z|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_isometry(m: int, n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """First ``n`` columns of Haar unitaries of size ``m`` (batched when ``size`` given)."""
    shape = (m, n) if size is None else (size, m, n)
    q, r = np.linalg.qr(ginibre(shape, rng))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    return q * ph[..., None, :]


def haar_unitary(n: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary (QR of a Ginibre matrix, phase-fixed R)."""
    if n < 1:
        raise ValueError("n must be positive")
    return haar_isometry(n, n, stream(seed))


def polar_unitary(u: np.ndarray) -> np.ndarray:
    """Nearest unitary (polar factor); used to scrub roundoff drift."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


# ---------------------------------------------------------------------------
# Blocks, compressions, completions


def compress(u, x, tol: float = 1e-10) -> np.ndarray:
    """Return ``X* U X`` for an isometry ``X``."""
    u = as_matrix(u, square=True, name="U")
    x = as_matrix(x, name="X")
    if x.shape[0] != u.shape[0]:
        raise ValueError(f"X has {x.shape[0]} rows but U is {u.shape[0]}x{u.shape[0]}")
    err = np.linalg.norm(dagger(x) @ x - np.eye(x.shape[1]), 2)
    if err > tol:
        raise ValueError(f"X is not an isometry: ||X*X - I|| = {err:.3e}")
    return dagger(x) @ u @ x


def embedding(m: int, cols) -> np.ndarray:
    """Isometry ``m x len(cols)`` whose columns are the listed standard basis vectors."""
    x = np.zeros((m, len(cols)), dtype=np.complex128)
    x[list(cols), range(len(cols))] = 1.0
    return x


def complete_unitary(x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Extend the orthonormal columns of ``x`` to a full unitary.

    The remaining columns come from Gram-Schmidt on the standard basis, taking
    at each step the basis vector with the largest residual (ties to the lowest
    index), so the result is deterministic.
    """
    x = np.array(x, dtype=np.complex128)
    m, k = x.shape
    err = np.linalg.norm(dagger(x) @ x - np.eye(k), 2) if k else 0.0
    if err > tol:
        raise ValueError(f"columns are not orthonormal: {err:.3e}")
    cols = [x[:, j] for j in range(k)]
    while len(cols) < m:
        q = np.array(cols).T if cols else np.zeros((m, 0))
        resid = np.eye(m) - q @ dagger(q)
        norms = np.linalg.norm(resid, axis=0)
        j = int(np.argmax(norms))
        v = resid[:, j]
        for c in cols:  # second pass for orthogonality
            v = v - c * np.vdot(c, v)
        cols.append(v / np.linalg.norm(v))
    return np.array(cols).T


def direct_sum(*blocks) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=np.complex128)) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.complex128)
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def elementary(n: int, i: int = 0, j: int = 1) -> np.ndarray:
    """Matrix unit ``E_ij`` in ``M_n`` (0-based indices); default ``E12``."""
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


# ---------------------------------------------------------------------------
# Matrix JSON format: {"rows", "cols", "re", "im"}


def matrix_to_json(a) -> dict:
    a = as_matrix(a)
    return {"rows": a.shape[0], "cols": a.shape[1],
            "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValueError(f"matrix JSON declares {rows}x{cols} but re/im have shapes "
                         f"{re.shape}/{im.shape}")
    return as_matrix(re + 1j * im)


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def save_matrix(a, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(matrix_to_json(a)))
    return path
