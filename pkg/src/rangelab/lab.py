"""Experiments on ranges of unitary dilations.

``verify_main`` takes a ``C`` that is not rank-one normal, builds a contraction
``T`` whose ``W_C(T)`` is a disk of radius ``r`` about 0, and certifies a point
of modulus larger than ``r`` in ``W_C(U)`` for every sampled unitary dilation
``U`` of ``T``.  ``verify_key`` handles rank-one normal ``C``, where the
ranges of dilations shrink onto ``W_C(T)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _ascent
from .cnum import circle_path_certify, is_rank_one_normal, wc_support_opt_many
from .dilation import (DEFAULT_PADS, canonical_compression, certify_membership,
                       dilation_family, intersection_estimate, isometry_to_unitary)
from .distance import min_shift_norm, orthogonal_top_pair
from .linalg import (as_matrix, complete_unitary, dagger, elementary,
                     haar_isometry, matrix_to_json, spectral_norm, stream)
from .numrange import DEFAULT_GRID, nr_support_batch

SCHEMA = "rangelab-report/1"
THETA_GRID_DEG = (60, 70, 75, 80, 85)
F_ONE_TOL = 1e-8
SCALAR_TOL = 1e-12


@dataclass
class ExperimentReport:
    branch: str
    T_used: np.ndarray
    r: float
    gap_target: float
    per_dilation: list
    all_pass: bool
    C_normalized: np.ndarray | None = None
    theta: float | None = None
    targets: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def failures(self) -> list:
        return [d for d in self.per_dilation if not d["certified"]]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema"] = SCHEMA
        out["T_used"] = matrix_to_json(self.T_used)
        out["C_normalized"] = (None if self.C_normalized is None
                               else matrix_to_json(self.C_normalized))
        out["targets"] = [[complex(t).real, complex(t).imag] for t in self.targets]
        out["failures"] = self.failures
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), default=_json_default, **kw)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(indent=2))
        return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return obj.tolist() if not np.iscomplexobj(obj) else matrix_to_json(np.atleast_2d(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Normal form


@dataclass
class NormalForm:
    """``C_n = scale * Q* C Q`` with leading block ``[[g, f], [1, g]]``, ``f`` in [0, 1].

    ``||C_n - g I|| = 1`` is the distance of ``C_n`` to the scalars; the first
    column of ``C_n`` is ``(g, 1, 0, ..)`` and its second row ``(1, g, 0, ..)``.
    """

    C_n: np.ndarray
    Q: np.ndarray
    scale: complex
    g: complex
    f: float
    R: float
    mu: complex


def _standard_pair(A: np.ndarray, R: float):
    """``(e1, A e1 / R)`` when that is already an orthogonal top singular pair."""
    e1 = np.zeros(A.shape[0], dtype=np.complex128)
    e1[0] = 1
    Ae1 = A @ e1
    if abs(np.linalg.norm(Ae1) - R) > 1e-10 * R:
        return None
    u = Ae1 / R
    if abs(u[0]) > 1e-10 or np.linalg.norm(dagger(A) @ u - R * e1) > 1e-10 * R:
        return None
    return u, e1


def normalize(C) -> NormalForm:
    """Unitary similarity and scaling that put ``C`` in its normal form.

    ``mu*`` minimizes ``||C - mu I|| = R`` and ``(C - mu* I) v = R u`` with ``u``
    orthogonal to ``v``; in the basis ``(v, u, ...)`` the first column of
    ``C - mu* I`` is ``R e2`` and its second row ``R e1``.  A diagonal phase
    and the factor ``e^{-i phi/2} / R`` then make the (2,1) entry 1 and the
    (1,2) entry ``f >= 0``.
    """
    C = as_matrix(C, square=True, name="C")
    n = C.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    res = min_shift_norm(C)
    R, mu = res.R, res.mu_star
    if R <= SCALAR_TOL * max(1.0, float(spectral_norm(C))):
        raise ValueError("C is scalar; it has no normal form")
    A = C - mu * np.eye(n)
    pair = _standard_pair(A, R)
    if pair is None:
        p = orthogonal_top_pair(C, mu)
        pair = (p.u, p.v)
    u, v = pair
    u = u - v * np.vdot(v, u)
    D = complete_unitary(np.column_stack([v, u / np.linalg.norm(u)]), tol=1e-6)
    M = dagger(D) @ C @ D
    phi = float(np.angle(M[0, 1])) if abs(M[0, 1]) > 0 else 0.0
    Dp = np.eye(n, dtype=np.complex128)
    Dp[0, 0] = np.exp(1j * phi / 2)
    Q = D @ Dp
    scale = np.exp(-1j * phi / 2) / R
    C_n = scale * dagger(Q) @ C @ Q
    return NormalForm(C_n, Q, complex(scale), complex(C_n[0, 0]), float(min(1.0, abs(C_n[0, 1]))),
                      R, complex(mu))


def choose_theta(f: float) -> float:
    """Smallest grid angle with ``1 - f sin(theta) > cos(theta)``.

    The gap is positive exactly for ``theta > 2 atan(f)``; if no grid angle
    qualifies, the midpoint of ``(2 atan(f), pi/2)`` is used.
    """
    if not 0 <= f < 1:
        raise ValueError("f must lie in [0, 1)")
    for deg in THETA_GRID_DEG:
        th = math.radians(deg)
        if 1 - f * math.sin(th) - math.cos(th) > 1e-12:
            return th
    return (2 * math.atan(f) + math.pi / 2) / 2


def classify(C) -> str:
    """One of ``rank-one-normal``, ``scalar-C``, ``case-I``, ``case-II``."""
    C = as_matrix(C, square=True, name="C")
    if not np.any(C):
        raise ValueError("C must be nonzero")
    if is_rank_one_normal(C):
        return "rank-one-normal"
    n = C.shape[0]
    if np.linalg.norm(C - np.trace(C) / n * np.eye(n), 2) <= SCALAR_TOL * spectral_norm(C):
        return "scalar-C"
    return "case-II" if normalize(C).f >= 1 - F_ONE_TOL else "case-I"


# ---------------------------------------------------------------------------
# Constructive certificates


def _entry(i, pad, cert, seed):
    return {"index": i, "seed": [seed, i], "pad": pad, "certified": cert.certified,
            "residual": cert.residual, "achieved": [cert.achieved.real, cert.achieved.imag]}


def scalar_witness(cc, n: int, target: complex) -> np.ndarray:
    """Unitary ``V`` with ``tr((I_n + 0) V* U V) = target`` for ``|target| <= cos(theta)/2``.

    The leading 2x2 block of the compression is ``c E12``; a unitary ``[w, w']``
    with ``w = (cos a, sin a e^{i beta})`` and ``(c/2) sin 2a e^{i beta} = xi``
    gives it diagonal ``(xi, -xi)``.  Coordinates ``2..n+1`` then carry trace
    ``-xi``, so ``xi = -target``.
    """
    c = math.cos(cc.theta)
    xi = -complex(target)
    ratio = 2 * abs(xi) / c
    if ratio > 1 + 1e-12:
        raise ValueError("target outside the disk of radius cos(theta)/2")
    a = 0.5 * math.asin(min(1.0, ratio))
    beta = np.angle(xi) if abs(xi) > 0 else 0.0
    w = np.array([math.cos(a), math.sin(a) * np.exp(1j * beta)])
    V1 = np.array([w, [-np.conj(w[1]), np.conj(w[0])]]).T
    Z = cc.X.copy()
    Z[:, :2] = cc.X[:, :2] @ V1
    return isometry_to_unitary(Z[:, 1:n + 1])


def _small_target(C2, B2, target, seed, restarts=16, iters=1500, tol=1e-13):
    """2x2 unitary with ``tr(C2 V* B2 V)`` closest to ``target``."""
    res = _ascent.ascend(C2, B2, haar_isometry(2, 2, stream(seed), size=restarts),
                         target=target, iters=iters, tol=tol, stop_on_first=True)
    best = int(np.argmin(np.abs(res.g - target)))
    return res.V[best], float(abs(res.g[best] - target))


def case_one_witness(C_n, cc, xi1: complex, seed=None, steps: int = 2000):
    """Unitary ``V`` with ``tr((C_n + 0) V* U V)`` near ``xi1`` from the compression ``cc``.

    For ``n = 2`` a 2x2 unitary on coordinates ``(2, n+1)`` solves the problem on
    ``B_hat``; for ``n >= 3`` it is moved along the circle path on coordinates
    ``(2, n+1, 3)``.  Returns ``(V, info)``.
    """
    n = C_n.shape[0]
    order, Bt = cc.circle_blocks()
    V1, res1 = _small_target(C_n[:2, :2], cc.B_hat, xi1, seed)
    info = {"two_by_two_residual": res1}
    if n == 2:
        local = V1
    else:
        cert = circle_path_certify(C_n[:3, :3], Bt, xi1, V1, steps=steps)
        info["circle_path"] = {"residual": cert.residual, **{k: v for k, v in cert.info.items()
                                                             if k != "center"}}
        local = np.eye(n, dtype=np.complex128)
        local[:3, :3] = cert.V
    Z = cc.X[:, order] @ local
    return isometry_to_unitary(Z), info


# ---------------------------------------------------------------------------
# verify_main


def _dump_failures(report: ExperimentReport, dump):
    if dump and report.failures:
        path = Path(dump)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"schema": SCHEMA, "branch": report.branch,
                                    "failures": report.failures}, indent=2,
                                   default=_json_default))
        report.meta["failure_dump"] = str(path)


def verify_main(C, num_dilations: int = 25, pads=None, seed=0, theta: float | None = None,
                tol: float = 1e-6, restarts: int = 16, iters: int = 800,
                dump=None) -> ExperimentReport:
    """Certify a point beyond the disk ``W_C(T)`` in ``W_C(U)`` for sampled dilations ``U``.

    ``pads`` are dilation sizes (default ``n, n+1, n+2, n+4``); dilation ``i``
    uses pad ``pads[i % len(pads)]`` and the stream ``(seed, i)``.  All values
    are reported for the normalized matrix, which is a unitary similarity of
    ``C`` times the nonzero ``scale`` in ``meta``.
    """
    C = as_matrix(C, square=True, name="C")
    branch = classify(C)
    if branch == "rank-one-normal":
        raise ValueError("C is rank-one normal; use verify_key")
    n = C.shape[0]
    pads = [n + d for d in DEFAULT_PADS] if pads is None else list(pads)
    if min(pads) < n:
        raise ValueError("pads must be >= n")
    kw = dict(restarts=restarts, iters=iters, tol=tol)
    if branch == "scalar-C":
        return _verify_scalar(C, n, num_dilations, pads, seed, kw, dump)
    nf = normalize(C)
    if branch == "case-I":
        return _verify_case_one(nf, n, num_dilations, pads, seed, theta, kw, dump)
    return _verify_case_two(nf, n, num_dilations, pads, seed, kw, dump)


def _verify_scalar(C, n, num, pads, seed, kw, dump):
    gamma = np.trace(C) / n
    C_n = np.eye(n, dtype=np.complex128)
    theta = math.pi / 3
    T = elementary(n) / 2
    targets = 0.25 * np.exp(2j * np.pi * np.arange(16) / 16)
    per = []
    for i, pad, U in dilation_family(T, num, pads, seed):
        cc = canonical_compression(U, n, theta)
        worst = None
        for k, tgt in enumerate(targets):
            cert = certify_membership(C_n, U, tgt, initial=scalar_witness(cc, n, tgt),
                                      seed=stream(seed, i, k), **kw)
            if worst is None or cert.residual > worst.residual:
                worst = cert
        per.append(_entry(i, pad, worst, seed) | {"targets": len(targets)})
    report = ExperimentReport("scalar-C", T, 0.0, 0.25, per, all(d["certified"] for d in per),
                              C_n, theta, list(targets),
                              {"scale": complex(1 / gamma), "num_dilations": num, "pads": pads,
                               "seed": seed, "tol": kw["tol"]})
    _dump_failures(report, dump)
    return report


def _verify_case_one(nf, n, num, pads, seed, theta, kw, dump):
    f = nf.f
    theta = choose_theta(f) if theta is None else float(theta)
    xi1 = 1 - f * math.sin(theta)
    r = math.cos(theta)
    T = r * elementary(n)
    per = []
    for i, pad, U in dilation_family(T, num, pads, seed):
        cc = canonical_compression(U, n, theta)
        V0, info = case_one_witness(nf.C_n, cc, xi1, seed=stream(seed, i, 1))
        cert = certify_membership(nf.C_n, U, xi1, initial=V0, seed=stream(seed, i, 2), **kw)
        per.append(_entry(i, pad, cert, seed) | {"construction": info})
    report = ExperimentReport("case-I", T, r, xi1 - r, per, all(d["certified"] for d in per),
                              nf.C_n, theta, [xi1],
                              {"scale": nf.scale, "g": nf.g, "f": f, "R": nf.R,
                               "num_dilations": num, "pads": pads, "seed": seed, "tol": kw["tol"]})
    _dump_failures(report, dump)
    return report


def _verify_case_two(nf, n, num, pads, seed, kw, dump, halvings: int = 12):
    theta = math.pi / 3
    T = elementary(n) / 2
    dilations = list(dilation_family(T, num, pads, seed))
    best = []
    for i, pad, U in dilations:
        h, _, V = wc_support_opt_many(nf.C_n, U, [0.0], restarts=8, iters=800,
                                      seed=stream(seed, i, 1))
        best.append((float(h[0]), V[0]))
    d = (min(h for h, _ in best) - 0.5) / 2
    per = []
    tries = []
    if d > 0:
        for _ in range(halvings):
            target = 0.5 + d
            per = []
            for (i, pad, U), (_, V) in zip(dilations, best):
                cert = certify_membership(nf.C_n, U, target, initial=V,
                                          seed=stream(seed, i, 2), **kw)
                per.append(_entry(i, pad, cert, seed))
            tries.append({"d": d, "certified": sum(p["certified"] for p in per)})
            if all(p["certified"] for p in per):
                break
            d /= 2
    else:
        per = [{"index": i, "seed": [seed, i], "pad": pad, "certified": False,
                "residual": float("nan"), "support": h}
               for (i, pad, _), (h, _) in zip(dilations, best)]
    all_pass = bool(per) and all(p["certified"] for p in per)
    report = ExperimentReport("case-II", T, 0.5, d if all_pass else 0.0, per, all_pass,
                              nf.C_n, theta, [0.5 + d] if d > 0 else [],
                              {"scale": nf.scale, "g": nf.g, "f": nf.f, "R": nf.R,
                               "support_at_0": [h for h, _ in best], "attempts": tries,
                               "num_dilations": num, "pads": pads, "seed": seed,
                               "tol": kw["tol"]})
    _dump_failures(report, dump)
    return report


# ---------------------------------------------------------------------------
# verify_key


def doubling_schedule(start: int, stop: int) -> list[int]:
    out, k = [], start
    while k < stop:
        out.append(k)
        k *= 2
    out.append(stop)
    return out


def verify_key(C, T, num_dilations: int = 400, K: int = DEFAULT_GRID, seed=0, pads=None,
               tol: float = 1e-6, start: int = 25) -> ExperimentReport:
    """Containment and shrinkage of dilation ranges for rank-one normal ``C = gamma v v*``.

    Here ``W_C(X) = gamma W(X)`` for every ``X``, so all support functions are
    exact top eigenvalues.  Checks that every sampled ``W_C(U)`` contains
    ``W_C(T)`` and reports the Hausdorff distance between the running
    intersection and ``W_C(T)`` along a doubling schedule of dilation counts.
    """
    C = as_matrix(C, square=True, name="C")
    if not np.any(C) or not is_rank_one_normal(C):
        raise ValueError("C is not rank-one normal; use verify_main")
    T = as_matrix(T, square=True, name="T")
    gamma = complex(np.trace(C))
    n = T.shape[0]
    pads = [n + d for d in DEFAULT_PADS] if pads is None else list(pads)
    est = intersection_estimate(T, C, num_dilations, pads, seed, K)
    h_T, _ = nr_support_batch(gamma * T, est.directions)
    violation = np.max(h_T[None, :] - est.supports, axis=1)
    per = [{"index": i, "seed": [seed, i], "pad": pads[i % len(pads)],
            "certified": bool(violation[i] <= tol), "residual": float(max(violation[i], 0.0))}
           for i in range(num_dilations)]
    counts = doubling_schedule(min(start, num_dilations), num_dilations)
    haus = [float(np.max(np.abs(est.supports[:k].min(axis=0) - h_T))) for k in counts]
    monotone = all(b <= a + 1e-12 for a, b in zip(haus, haus[1:]))
    all_pass = all(p["certified"] for p in per) and monotone
    return ExperimentReport("rank-one-normal", T, float(np.max(np.abs(h_T))), 0.0, per, all_pass,
                            None, None, [],
                            {"gamma": gamma, "counts": counts, "hausdorff": haus,
                             "monotone": monotone, "exact_supports": est.exact, "K": K,
                             "num_dilations": num_dilations, "pads": pads, "seed": seed,
                             "tol": tol, "support_T": h_T, "support_intersection": est.support})
