"""Tracing preimage curves of maps S^3 -> S^2.

All geometry is done on the unit sphere in ``u`` coordinates; a curve on
S^3(x; eps) is the image of the traced curve under ``u -> x + eps u``. Step
bounds and tolerances below are therefore relative to ``eps``.

The constraint ``g(u) = p`` is written in the orthographic chart of S^2 at
``p``: ``h(u) = (<g(u), e1>, <g(u), e2>)`` with ``(p, e1, e2)`` a positive
frame of R^3. Its derivative along the positive tangent frame
``(iu, ju, ku)`` is a 2x3 matrix ``J`` with rows ``r1, r2``; ``r1 x r2``
spans its kernel and is exactly the direction that makes the traced curve
carry the preimage orientation (a normal disc spanned by ``r1, r2`` maps
onto ``(e1, e2)`` with positive determinant, and ``(r1 x r2, r1, r2)`` is
positive). Curves therefore come out correctly oriented; :func:`orient_curve`
re-checks this independently.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from .errors import AmbiguousOrientation, Diverged, NoSeedsFound, NotRegular
from .quaternion import tangent_basis

log = logging.getLogger(__name__)

FD_STEP = 1e-6
REG_TOL = 1e-3
MIN_STEP = 1e-4
MAX_STEP = 1e-2
MAX_STEPS = 1_000_000
DEFAULT_SAMPLES = 20_000
SEED_TOL = 1e-11
COVER_TOL = 1e-4


@dataclass(frozen=True)
class SpherePoint:
    u: np.ndarray
    x: np.ndarray = field(default_factory=lambda: np.zeros(4))
    eps: float = 1.0

    @property
    def ambient(self) -> np.ndarray:
        return self.x + self.eps * self.u


@dataclass
class OrientedCurve:
    """Closed polyline on S^3; the last vertex repeats the first."""

    vertices: np.ndarray
    target: np.ndarray
    closed: bool = True
    x: np.ndarray = field(default_factory=lambda: np.zeros(4))
    eps: float = 1.0

    @property
    def ambient(self) -> np.ndarray:
        return self.x + self.eps * self.vertices

    @property
    def max_step(self) -> float:
        return float(np.max(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)))

    def __len__(self):
        return len(self.vertices)

    def reversed(self) -> OrientedCurve:
        return OrientedCurve(self.vertices[::-1].copy(), self.target, self.closed, self.x, self.eps)

    def points(self) -> list[SpherePoint]:
        return [SpherePoint(u, self.x, self.eps) for u in self.vertices]


def chart_frame(p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit ``p`` and an orthonormal ``(e1, e2)`` with ``det[p, e1, e2] = +1``."""
    p = np.asarray(p, float)
    p = p / np.linalg.norm(p)
    helper = np.eye(3)[np.argmin(np.abs(p))]
    e1 = np.cross(helper, p)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    return p, e1, e2


def _normalize(U):
    return U / np.linalg.norm(U, axis=-1, keepdims=True)


class _Constraint:
    def __init__(self, g, p):
        self.g = g
        self.p, self.e1, self.e2 = chart_frame(p)
        self.E = np.stack([self.e1, self.e2], axis=-1)  # (3, 2)

    def h(self, U):
        G = self.g(U)
        return G @ self.E, G @ self.p

    def jet(self, U):
        """Values, chart coordinates, Jacobians and tangent frames at ``U`` (N, 4)."""
        U = np.atleast_2d(U)
        T = tangent_basis(U)  # (N, 3, 4)
        offsets = FD_STEP * np.concatenate([T, -T], axis=1)  # (N, 6, 4)
        pts = np.concatenate([U[:, None, :], _normalize(U[:, None, :] + offsets)], axis=1)
        G = self.g(pts.reshape(-1, 4)).reshape(len(U), 7, 3)
        H = G @ self.E  # (N, 7, 2)
        J = (H[:, 1:4, :] - H[:, 4:7, :]).transpose(0, 2, 1) / (2 * FD_STEP)  # (N, 2, 3)
        return G[:, 0, :], H[:, 0, :], J, T


def _min_norm_step(J, h):
    """Batched minimum-norm solution of ``J d = -h`` (rank 2 assumed)."""
    JJt = J @ J.transpose(0, 2, 1)
    det = JJt[:, 0, 0] * JJt[:, 1, 1] - JJt[:, 0, 1] * JJt[:, 1, 0]
    ok = np.abs(det) > 1e-24
    inv = np.zeros_like(JJt)
    safe = np.where(ok, det, 1.0)
    inv[:, 0, 0] = JJt[:, 1, 1] / safe
    inv[:, 1, 1] = JJt[:, 0, 0] / safe
    inv[:, 0, 1] = -JJt[:, 0, 1] / safe
    inv[:, 1, 0] = -JJt[:, 1, 0] / safe
    d = -np.einsum("nji,njk,nk->ni", J, inv, h)
    d[~ok] = 0.0
    return d, ok


def _sigma_min(J):
    return np.linalg.svd(J, compute_uv=False)[..., -1]


def _sigma_max(J):
    return np.linalg.svd(J, compute_uv=False)[..., 0]


def sphere_samples(n: int, seed: int = 0, dim: int = 4) -> np.ndarray:
    """Quasi-uniform points on S^{dim-1} from a scrambled Halton sequence."""
    pts = qmc.Halton(d=dim, scramble=True, seed=seed).random(n)
    pts = np.clip(pts, 1e-12, 1 - 1e-12)
    return _normalize(norm.ppf(pts))


def refine(con: _Constraint, U, iters=40, max_move=0.1):
    """Damped batched Newton onto ``h = 0``. Returns points and a converged mask."""
    U = np.array(U, float)
    for _ in range(iters):
        _, H, J, T = con.jet(U)
        if np.all(np.abs(H).max(axis=1) < SEED_TOL):
            break
        d, ok = _min_norm_step(J, H)
        step = np.einsum("na,nak->nk", d, T)
        size = np.linalg.norm(step, axis=1, keepdims=True)
        step *= np.minimum(1.0, max_move / np.maximum(size, 1e-300))
        U = _normalize(U + step)
    H, cos_p = con.h(U)
    conv = (np.abs(H).max(axis=1) < SEED_TOL) & (cos_p > 0)
    return U, conv


def _dedupe(U, radius):
    """Greedy thinning in lexicographic order; deterministic for a given input."""
    order = np.lexsort(U.T[::-1])
    U = U[order]
    tree = cKDTree(U)
    removed = np.zeros(len(U), bool)
    kept = []
    for idx in range(len(U)):
        if removed[idx]:
            continue
        kept.append(idx)
        removed[tree.query_ball_point(U[idx], radius)] = True
    return U[kept]


def find_seeds(g, p, n_samples: int = DEFAULT_SAMPLES, seed: int = 0, dedup_radius: float = 1e-3,
               max_candidates: int = 4000, x=None, eps: float = 1.0) -> list[SpherePoint]:
    """Points of ``g^{-1}(p)``: quasi-random sampling then projected Newton."""
    con = _Constraint(g, p)
    U = sphere_samples(n_samples, seed)
    G = g(U)
    cosang = np.nan_to_num(G @ con.p, nan=-1.0)
    cand = np.flatnonzero(cosang > np.cos(1.0))
    if len(cand) > max_candidates:
        cand = cand[np.argsort(-cosang[cand], kind="stable")[:max_candidates]]
    if len(cand) == 0:
        raise NoSeedsFound("no sample maps near the target value")
    R, conv = refine(con, U[cand])
    R = R[conv]
    if len(R) == 0:
        raise NoSeedsFound("Newton refinement did not converge from any sample")
    R = _dedupe(R, dedup_radius)
    x = np.zeros(4) if x is None else np.asarray(x, float)
    return [SpherePoint(u, x, eps) for u in R]


def _tangent(J, T):
    n = np.cross(J[0], J[1])
    t = n @ T
    return t / np.linalg.norm(t)


def _check_regular(J):
    smin, smax = _sigma_min(J), _sigma_max(J)
    if not smin > REG_TOL * max(1.0, smax):
        raise NotRegular(f"target is not a regular value here (sigma_min={smin:.3g})")


def trace_preimage(g, p, seed, *, min_step: float = MIN_STEP, max_step: float = MAX_STEP,
                   max_steps: int = MAX_STEPS, x=None, eps: float = 1.0) -> OrientedCurve:
    """Follow the component of ``g^{-1}(p)`` through ``seed`` until it closes.

    Predictor-corrector continuation along the kernel of the chart Jacobian
    with an adaptive step in ``[min_step, max_step]`` (unit-sphere units).
    """
    con = _Constraint(g, p)
    u0 = np.asarray(getattr(seed, "u", seed), float)
    u0 = u0 / np.linalg.norm(u0)
    _, H, J, T = con.jet(u0)
    if np.abs(H).max() > 1e-8:
        R, conv = refine(con, u0[None, :])
        if not conv[0]:
            raise NotRegular("seed does not lie on the preimage")
        u0 = R[0]
        _, H, J, T = con.jet(u0)
    _check_regular(J[0])
    t0 = _tangent(J[0], T[0])
    verts = [u0]
    u, t, Jc, Tc = u0, t0, J[0], T[0]
    s = max_step / 4
    for n_steps in range(1, max_steps + 1):
        while True:
            if s < min_step:
                raise NotRegular("step size underflow while tracing")
            v = u + s * t
            v /= np.linalg.norm(v)
            ok = False
            for it in range(8):
                Hv, cos_p = con.h(v[None, :])
                res = np.abs(Hv[0]).max()
                if res < 1e-12 and cos_p[0] > 0:
                    ok = True
                    break
                d = -np.linalg.pinv(Jc) @ Hv[0]
                v = v + d @ Tc
                v /= np.linalg.norm(v)
                if np.linalg.norm(v - u) > 2.0 * s:
                    break
            if not ok:
                s *= 0.5
                continue
            _, _, Jn, Tn = con.jet(v)
            Jn, Tn = Jn[0], Tn[0]
            if not _sigma_min(Jn) > REG_TOL * max(1.0, _sigma_max(Jn)):
                s *= 0.5
                continue
            tn = _tangent(Jn, Tn)
            cos_turn = float(tn @ t)
            if cos_turn < np.cos(0.15):
                s *= 0.5
                continue
            break
        prev = u
        u, Jc, Tc = v, Jn, Tn
        t = tn
        if n_steps >= 10 and t @ t0 > 0:
            seg = u - prev
            lam = np.clip((u0 - prev) @ seg / (seg @ seg), 0.0, 1.0)
            if np.linalg.norm(prev + lam * seg - u0) < 0.5 * s:
                if lam < 1.0:
                    verts.append(u0.copy())
                else:
                    verts.extend([u, u0.copy()])
                return OrientedCurve(np.array(verts), con.p.copy(), True,
                                     np.zeros(4) if x is None else np.asarray(x, float), eps)
        verts.append(u)
        if it <= 2 and cos_turn > np.cos(0.05):
            s = min(1.5 * s, max_step)
    raise Diverged(f"curve did not close within {max_steps} steps")


def orient_curve(c: OrientedCurve, g, samples: int = 5, tol: float = 1e-9) -> OrientedCurve:
    """Return ``c`` oriented so that the normal-disc convention holds.

    At a few vertices: tangent ``t`` from the polyline, normal pair
    ``(n1, n2)`` completing it to a positive frame of the sphere, and the
    sign of ``det`` of the chart derivative on ``span(n1, n2)``. Reverses the
    vertex order if the majority of decisive samples disagree.
    """
    con = _Constraint(g, c.target)
    V = c.vertices[:-1] if c.closed else c.vertices
    idx = np.linspace(0, len(V) - 1, samples, dtype=int, endpoint=False)
    votes = 0
    for k in idx:
        u = V[k]
        t = V[(k + 1) % len(V)] - V[k - 1]
        t -= (t @ u) * u
        t /= np.linalg.norm(t)
        _, _, J, T = con.jet(u)
        tc = T[0] @ t  # coefficients of t in the positive frame
        # complete to a positive orthonormal frame (tc, n1, n2) of R^3
        helper = np.eye(3)[np.argmin(np.abs(tc))]
        n1 = np.cross(helper, tc)
        n1 /= np.linalg.norm(n1)
        n2 = np.cross(tc, n1)
        M = J[0] @ np.stack([n1, n2], axis=-1)
        det = np.linalg.det(M)
        scale = np.linalg.norm(J[0]) ** 2
        if abs(det) > tol * max(scale, 1e-300):
            votes += 1 if det > 0 else -1
    if votes == 0:
        raise AmbiguousOrientation("orientation undecidable at all sampled vertices")
    return c if votes > 0 else c.reversed()


def _distance_to_polyline(P, V):
    """Distance from each point of ``P`` (M, 4) to the polyline ``V`` (n, 4)."""
    A, B = V[:-1], V[1:]
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    L2 = np.where(L2 > 0, L2, 1.0)
    out = np.empty(len(P))
    for s in range(0, len(P), 64):
        q = P[s:s + 64, None, :]
        lam = np.clip(np.einsum("mnk,nk->mn", q - A, AB) / L2, 0.0, 1.0)
        diff = A + lam[..., None] * AB - q
        out[s:s + 64] = np.sqrt(np.einsum("mnk,mnk->mn", diff, diff).min(axis=1))
    return out


def preimage(g, p, *, n_samples: int = DEFAULT_SAMPLES, seed: int = 0, x=None,
             eps: float = 1.0, **trace_kw) -> list[OrientedCurve]:
    """All components of ``g^{-1}(p)``, traced and oriented; ``[]`` if empty."""
    try:
        seeds = find_seeds(g, p, n_samples=n_samples, seed=seed, x=x, eps=eps)
    except NoSeedsFound:
        return []
    pending = np.array([s.u for s in seeds])
    curves: list[OrientedCurve] = []
    while len(pending):
        c = trace_preimage(g, p, pending[0], x=x, eps=eps, **trace_kw)
        c = orient_curve(c, g)
        if curves and min(_distance_to_polyline(c.vertices[:1], d.vertices)[0] for d in curves) < COVER_TOL:
            raise NotRegular("traced component retraced an existing one")
        curves.append(c)
        d = _distance_to_polyline(pending, c.vertices)
        pending = pending[d > COVER_TOL]
    curves.sort(key=lambda c: tuple(np.round(c.vertices[0], 12)))
    return curves


def dump_curves(curves, path, target=None):
    """Write curves as ambient coordinates, one vertex per line."""
    with open(path, "w") as fh:
        for c in curves:
            p = c.target if target is None else target
            fh.write(f"# curve target=({p[0]:.12g},{p[1]:.12g},{p[2]:.12g}) orientation=+\n")
            for v in c.ambient:
                fh.write(" ".join(f"{x:.15g}" for x in v) + "\n")
            fh.write("\n")


def load_curves(path) -> list[np.ndarray]:
    blocks, cur = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                if cur:
                    blocks.append(np.array(cur))
                    cur = []
            elif not line.startswith("#"):
                cur.append([float(t) for t in line.split()])
    if cur:
        blocks.append(np.array(cur))
    return blocks
