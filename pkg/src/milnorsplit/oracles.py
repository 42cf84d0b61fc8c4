"""Intersection-number oracles, independent of the curve tracer.

Everything here reduces to one primitive, :func:`local_degree`: the local
degree at ``x`` of a pair ``(h1, h2)`` of maps ``C^2 -> C``, viewed as one map
``R^4 -> R^4``. It is computed by perturbation: solve ``h = delta`` for a
small generic ``delta`` inside a small polydisk around ``x`` by multi-start
Newton, and add up the signs of the real Jacobian determinants at the
solutions. For complex-analytic pairs every sign is +1 and the count is the
intersection multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import UnstableCount
from .polymap import MapExpr, parse_map, point_to_complex, real_rows

RADIUS = 0.25
DELTA = 1e-4
N_STARTS = 3000
NEWTON_ITERS = 80
DEDUP_RADIUS = 1e-7
VANISH_TOL = 1e-9

KINDS = ("analytic", "conjugate-analytic", "general")


def _as_map(m) -> MapExpr:
    return m if isinstance(m, MapExpr) else parse_map(m)


def _jacobian(h1: MapExpr, h2: MapExpr, z, w) -> np.ndarray:
    return np.concatenate([real_rows(*h1.partials(z, w)), real_rows(*h2.partials(z, w))], axis=-2)


def _starts(x, n, rng):
    # mix of uniform and log-scaled radii so that clustered roots get starts nearby
    z0, w0 = point_to_complex(x)
    out = []
    for c in (z0, w0):
        u = rng.random(n)
        r = np.where(np.arange(n) % 2 == 0, RADIUS * np.sqrt(u), RADIUS * 10.0 ** (-4 * u))
        out.append(c + r * np.exp(2j * np.pi * rng.random(n)))
    return out


def _solve(h1, h2, x, delta, rng):
    z0, w0 = point_to_complex(x)
    z, w = _starts(x, N_STARTS, rng)
    V = np.stack([z.real, z.imag, w.real, w.imag], axis=-1)
    target = np.array([delta[0].real, delta[0].imag, delta[1].real, delta[1].imag])
    alive = np.ones(len(V), bool)
    for _ in range(NEWTON_ITERS):
        zc, wc = V[:, 0] + 1j * V[:, 1], V[:, 2] + 1j * V[:, 3]
        a, b = h1(zc, wc), h2(zc, wc)
        R = np.stack([a.real, a.imag, b.real, b.imag], axis=-1) - target
        J = _jacobian(h1, h2, zc, wc)
        ok = np.abs(np.linalg.det(J)) > 1e-300
        alive &= ok
        J[~ok] = np.eye(4)
        step = np.linalg.solve(J, -R[..., None])[..., 0]
        size = np.linalg.norm(step, axis=-1, keepdims=True)
        V = V + step * np.minimum(1.0, RADIUS / np.maximum(size, 1e-300))
        alive &= np.all(np.isfinite(V), axis=-1) & (np.linalg.norm(V - np.asarray(x, float), axis=-1) < 4)
        V[~alive] = np.asarray(x, float)
    zc, wc = V[:, 0] + 1j * V[:, 1], V[:, 2] + 1j * V[:, 3]
    a, b = h1(zc, wc), h2(zc, wc)
    res = np.abs(a - delta[0]) + np.abs(b - delta[1])
    inside = (np.abs(zc - z0) < RADIUS) & (np.abs(wc - w0) < RADIUS)
    good = alive & inside & (res < 1e-9 * DELTA)
    roots = V[good]
    if len(roots) == 0:
        return roots
    # greedy dedupe in a fixed order
    order = np.lexsort(roots.T[::-1])
    roots = roots[order]
    tree = cKDTree(roots)
    keep = np.ones(len(roots), bool)
    for i in range(len(roots)):
        if keep[i]:
            for j in tree.query_ball_point(roots[i], DEDUP_RADIUS):
                if j > i:
                    keep[j] = False
    return roots[keep]


def _signed_count(h1, h2, x, delta, rng) -> int:
    roots = _solve(h1, h2, x, delta, rng)
    if len(roots) == 0:
        return 0
    J = _jacobian(h1, h2, roots[:, 0] + 1j * roots[:, 1], roots[:, 2] + 1j * roots[:, 3])
    det = np.linalg.det(J)
    scale = np.prod(np.linalg.norm(J, axis=-1), axis=-1)
    if np.any(np.abs(det) <= 1e-10 * scale):
        raise UnstableCount("perturbed solution is not simple; delta not generic")
    return int(np.sum(np.sign(det)))


def local_degree(h1, h2, x=(0.0, 0.0, 0.0, 0.0), *, seed: int = 0) -> int:
    """Local degree at ``x`` of ``(h1, h2)``: R^4 -> R^4, by signed perturbation count.

    Two independent perturbations must give the same count, otherwise
    :class:`UnstableCount` is raised.
    """
    h1, h2 = _as_map(h1), _as_map(h2)
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(2):
        delta = DELTA * np.exp(2j * np.pi * rng.random(2)) * (0.5 + rng.random(2))
        counts.append(_signed_count(h1, h2, x, delta, rng))
    if counts[0] != counts[1]:
        raise UnstableCount(f"perturbation counts disagree: {counts[0]} vs {counts[1]}")
    return counts[0]


def intersection_mult_analytic(h1, h2, x=(0.0, 0.0, 0.0, 0.0), *, seed: int = 0) -> int:
    """Intersection multiplicity at ``x`` of the complex curves ``{h1 = 0}`` and ``{h2 = 0}``."""
    h1, h2 = _as_map(h1), _as_map(h2)
    for h in (h1, h2):
        if not h.is_analytic:
            raise ValueError(f"{h.source} is not complex-analytic")
    return local_degree(h1, h2, x, seed=seed)


def milnor_oracle(m, x=(0.0, 0.0, 0.0, 0.0), *, seed: int = 0) -> int:
    """Milnor number of an analytic ``f`` at ``x``: the multiplicity of ``{f_z = 0} . {f_w = 0}``."""
    m = _as_map(m)
    if not m.is_analytic:
        raise ValueError(f"{m.source} is not complex-analytic")
    return intersection_mult_analytic(m.derivative("z"), m.derivative("w"), x, seed=seed)


@dataclass(frozen=True)
class CycleFactor:
    """One factor of a plane-curve cycle: ``{factor = 0}`` with a kind and a sign.

    ``kind`` is ``"analytic"``, ``"conjugate-analytic"`` (the conjugate of an
    analytic function) or ``"general"`` (anything else; pairs involving it are
    evaluated directly as a local degree).
    """

    factor: MapExpr
    kind: str = "analytic"
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "factor", _as_map(self.factor))
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.kind == "analytic" and not self.factor.is_analytic:
            raise ValueError(f"{self.factor.source} is not analytic")
        if self.kind == "conjugate-analytic" and not self.factor.conj().is_analytic:
            raise ValueError(f"{self.factor.source} is not conjugate-analytic")

    def vanishes_at(self, x) -> bool:
        z, w = point_to_complex(x)
        return abs(self.factor(z, w)) < VANISH_TOL

    @property
    def model(self) -> MapExpr:
        """The analytic function with the same zero set."""
        return self.factor.conj() if self.kind == "conjugate-analytic" else self.factor


def halfcomplex_intersection_oracle(cycle_a, cycle_b, x=(0.0, 0.0, 0.0, 0.0), *, seed: int = 0) -> int:
    """Intersection number at ``x`` of two cycles given as signed factor lists.

    Factors not vanishing at ``x`` are dropped. A conjugate-analytic factor
    is replaced by its analytic model and contributes a factor -1 (its zero
    set carries the opposite orientation). Any twist of one of the cycles is
    the caller's business.
    """
    fa = [f for f in cycle_a if f.vanishes_at(x)]
    fb = [f for f in cycle_b if f.vanishes_at(x)]
    total = 0
    for a in fa:
        for b in fb:
            s = a.sign * b.sign
            if "general" in (a.kind, b.kind):
                total += s * local_degree(a.factor, b.factor, x, seed=seed)
            else:
                n_conj = (a.kind == "conjugate-analytic") + (b.kind == "conjugate-analytic")
                total += s * (-1) ** n_conj * intersection_mult_analytic(a.model, b.model, x, seed=seed)
    return total


def hopf_from_cycles(plus, minus, x=(0.0, 0.0, 0.0, 0.0), *, seed: int = 0) -> int:
    """Hopf invariant of ``l`` or ``r`` of a plane field from the cycles over ``i`` and ``-i``.

    ``plus`` and ``minus`` are the factor lists cutting out the preimages of
    ``i`` and ``-i``; the ``-i`` cycle is twisted by -1 before pairing.
    """
    return -halfcomplex_intersection_oracle(plus, minus, x, seed=seed)
