"""Linking numbers on S^3 and Hopf invariants of maps S^3 -> S^2."""

from __future__ import annotations

import numpy as np

from .errors import NonIntegerLinking, NotRegular, PoleTooClose
from .tracer import OrientedCurve, preimage, sphere_samples

ROUND_TOL = 0.1
_CHUNK = 256


def stereographic(U: np.ndarray, pole: np.ndarray) -> np.ndarray:
    """Orientation-preserving stereographic projection S^3 \\ {pole} -> R^3.

    Coordinates are taken in an orthonormal basis ``(b1, b2, b3)`` of
    ``pole^perp`` with ``det[pole, b1, b2, b3] = -1``: at the antipode the
    outward normal is ``-pole``, so ``(-pole, b1, b2, b3)`` is positive and
    ``(b1, b2, b3)`` is a positive frame of the sphere there, where the
    differential of the projection is ``1/2`` times the identity.
    """
    pole = pole / np.linalg.norm(pole)
    Q, _ = np.linalg.qr(np.column_stack([pole, np.eye(4)]))
    basis = Q[:, 1:4].T
    basis[0] *= np.sign(Q[:, 0] @ pole)
    if np.linalg.det(np.vstack([pole, basis])) > 0:
        basis[0] *= -1
    U = np.asarray(U, float)
    denom = 1.0 - U @ pole
    return (U @ basis.T) / denom[:, None]


def polygon_linking(P: np.ndarray, Q: np.ndarray) -> float:
    """Gauss linking integral of two closed polygons in R^3, evaluated exactly.

    Each segment pair contributes its signed solid angle over ``4 pi``
    (the closed form of the double integral over two straight segments).
    ``P`` and ``Q`` list vertices with the closing vertex repeated.
    """
    A, B = P[:-1], P[1:]
    C, D = Q[:-1], Q[1:]
    total = 0.0
    for s in range(0, len(A), _CHUNK):
        a = A[s:s + _CHUNK, None, :]
        b = B[s:s + _CHUNK, None, :]
        r13 = C[None] - a
        r14 = D[None] - a
        r23 = C[None] - b
        r24 = D[None] - b
        n1 = np.cross(r13, r14)
        n2 = np.cross(r14, r24)
        n3 = np.cross(r24, r23)
        n4 = np.cross(r23, r13)
        ns = []
        for n in (n1, n2, n3, n4):
            ln = np.linalg.norm(n, axis=-1, keepdims=True)
            ns.append(np.where(ln > 0, n / np.where(ln > 0, ln, 1.0), 0.0))
        n1, n2, n3, n4 = ns

        def asin_dot(x, y):
            return np.arcsin(np.clip(np.einsum("...k,...k->...", x, y), -1.0, 1.0))

        omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
        r34 = (D - C)[None]
        r12 = b - a
        sign = np.sign(np.einsum("...k,...k->...", np.cross(r34, r12), r13))
        total += float(np.sum(omega * sign))
    return total / (4 * np.pi)


def gauss_midpoint(P: np.ndarray, Q: np.ndarray) -> float:
    """Plain midpoint-rule Gauss integral (reference for tests)."""
    dP = np.diff(P, axis=0)
    dQ = np.diff(Q, axis=0)
    mP = 0.5 * (P[1:] + P[:-1])
    mQ = 0.5 * (Q[1:] + Q[:-1])
    r = mP[:, None, :] - mQ[None, :, :]
    cr = np.cross(dP[:, None, :], dQ[None, :, :])
    return float(np.sum(np.einsum("ijk,ijk->ij", r, cr) / np.linalg.norm(r, axis=-1) ** 3) / (4 * np.pi))


def _min_dist(a: np.ndarray, b: np.ndarray) -> float:
    best = np.inf
    for s in range(0, len(a), 512):
        d = np.linalg.norm(a[s:s + 512, None, :] - b[None, :, :], axis=-1)
        best = min(best, float(d.min()))
    return best


def choose_pole(curves, n_candidates: int = 4096, seed: int = 0, exclude=()) -> np.ndarray:
    """A point of S^3 as far as possible from every vertex of ``curves``."""
    cand = sphere_samples(n_candidates, seed=seed + 7919)
    V = np.vstack([c for c in curves])
    # cos of the angular distance to the nearest vertex; smaller is farther
    nearest = np.full(len(cand), -np.inf)
    for s in range(0, len(V), 1024):
        nearest = np.maximum(nearest, (cand @ V[s:s + 1024].T).max(axis=1))
    order = np.argsort(nearest, kind="stable")
    for k in order:
        if not any(np.allclose(cand[k], e) for e in exclude):
            return cand[k]
    raise PoleTooClose("no admissible pole")


def linking_number(c1, c2, *, seed: int = 0, return_raw: bool = False):
    """Linking number of two disjoint closed oriented curves on a 3-sphere.

    Accepts :class:`OrientedCurve` objects (unit-sphere vertices are used) or
    raw ``(n, 4)`` arrays of points on the unit sphere with the closing
    vertex repeated.
    """
    P = c1.vertices if isinstance(c1, OrientedCurve) else np.asarray(c1, float)
    Q = c2.vertices if isinstance(c2, OrientedCurve) else np.asarray(c2, float)
    tried = []
    for attempt in range(16):
        pole = choose_pole([P, Q], seed=seed + attempt, exclude=tried)
        tried.append(pole)
        clearance = 1.0 - max((P @ pole).max(), (Q @ pole).max())
        if clearance < 1e-3:
            continue
        raw = polygon_linking(stereographic(P, pole), stereographic(Q, pole))
        if np.isfinite(raw):
            break
    else:
        raise PoleTooClose("could not find a pole away from both curves")
    lk = int(np.rint(raw))
    if abs(raw - lk) >= ROUND_TOL:
        raise NonIntegerLinking(f"linking integral {raw:.4f} is not near an integer")
    return (lk, raw) if return_raw else lk


def min_separation(curves_a, curves_b) -> float:
    best = np.inf
    for a in curves_a:
        for b in curves_b:
            best = min(best, _min_dist(a.vertices, b.vertices))
    return best


def hopf_invariant(g, p=(1.0, 0.0, 0.0), q=(-1.0, 0.0, 0.0), *, seed: int = 0,
                   n_samples: int | None = None, details: dict | None = None, **trace_kw) -> int:
    """Linking number of the oriented preimages ``g^{-1}(p)`` and ``g^{-1}(q)``."""
    kw = dict(trace_kw)
    if n_samples is not None:
        kw["n_samples"] = n_samples
    Cp = preimage(g, p, seed=seed, **kw)
    Cq = preimage(g, q, seed=seed + 1, **kw)
    total = 0
    worst = 0.0
    if Cp and Cq:
        sep = min_separation(Cp, Cq)
        step = max(c.max_step for c in Cp + Cq)
        if sep < 2 * step:
            raise NotRegular(f"preimages of p and q nearly meet (separation {sep:.3g})")
        for a in Cp:
            for b in Cq:
                lk, raw = linking_number(a, b, seed=seed, return_raw=True)
                total += lk
                worst = max(worst, abs(raw - lk))
    if details is not None:
        details.update(
            components_p=len(Cp),
            components_q=len(Cq),
            vertices=sum(len(c) for c in Cp + Cq),
            linking_residual=worst,
            curves_p=Cp,
            curves_q=Cq,
        )
    return total
