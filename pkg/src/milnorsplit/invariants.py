"""The invariants lambda and rho of an isolated critical point, and friends.

``lambda(f; x) = -H(l o <Df> o E)`` and ``rho(f; x) = H(r o <Df> o E)``
where ``E(u) = x + eps u`` parametrizes a small sphere around ``x``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import EpsilonUnstable, NonIntegerLinking, NotRegular, NumericInstability
from .fields import MapField
from .linking import hopf_invariant
from .polymap import MapExpr, isolatedness_probe, parse_map
from .tracer import DEFAULT_SAMPLES

log = logging.getLogger(__name__)

P_DEFAULT = np.array([1.0, 0.0, 0.0])
Q_DEFAULT = np.array([-1.0, 0.0, 0.0])
RETRY_ANGLE = 0.05
MAX_RETRIES = 8
EPS_START = 0.5
EPS_FLOOR = 1e-3


@dataclass
class InvariantReport:
    map: str
    point: tuple
    epsilon_used: float
    lambda_: int
    rho: int
    mu_oracle: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def mu_from_sum(self) -> int:
        return self.lambda_ + self.rho

    @property
    def tau_plus(self) -> int:
        return -self.lambda_

    @property
    def tau_minus(self) -> int:
        return self.rho - 1

    def as_dict(self) -> dict:
        return {
            "map": self.map,
            "point": list(self.point),
            "epsilon_used": self.epsilon_used,
            "lambda": self.lambda_,
            "rho": self.rho,
            "tau_plus": self.tau_plus,
            "tau_minus": self.tau_minus,
            "mu_from_sum": self.mu_from_sum,
            "mu_oracle": self.mu_oracle,
            "diagnostics": dict(self.diagnostics),
        }


def rotate_pair(p, q, rng, angle=RETRY_ANGLE):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R = Rotation.from_rotvec(angle * axis)
    return R.apply(p), R.apply(q)


def random_regular_pair(rng):
    """A random pair of distinct points of S^2 (generic, hence almost surely regular)."""
    p = rng.normal(size=3)
    q = rng.normal(size=3)
    return p / np.linalg.norm(p), q / np.linalg.norm(q)


def robust_hopf(g, p=P_DEFAULT, q=Q_DEFAULT, *, seed: int = 0, diag: dict | None = None, **kw) -> int:
    """Hopf invariant, re-choosing the regular values on failure.

    Any pair of distinct regular values gives the same answer, so when the
    requested pair is not regular (or the curves come out under-resolved)
    both values are moved by a small random rotation of S^2 and the
    computation repeated.
    """
    rng = np.random.default_rng(seed)
    p0, q0 = np.asarray(p, float), np.asarray(q, float)
    pp, qq = p0, q0
    last = None
    for attempt in range(MAX_RETRIES + 1):
        details = {}
        try:
            h = hopf_invariant(g, pp, qq, seed=seed, details=details, **kw)
        except (NotRegular, NonIntegerLinking) as exc:
            log.info("%s: attempt %d failed (%s); rotating regular values", g, attempt, exc)
            last = exc
            pp, qq = rotate_pair(p0, q0, rng)
            continue
        if diag is not None:
            diag.update(
                retries=attempt,
                components_p=details["components_p"],
                components_q=details["components_q"],
                vertices=details["vertices"],
                linking_residual=details["linking_residual"],
            )
        return h
    raise type(last)(f"{g}: no regular pair found after {MAX_RETRIES} retries ({last})")


def invariants_at(m: MapExpr, x, eps: float, *, p=P_DEFAULT, q=Q_DEFAULT, seed: int = 0,
                  n_samples: int = DEFAULT_SAMPLES) -> tuple[int, int, dict]:
    """``(lambda, rho, diagnostics)`` on the sphere of radius ``eps`` about ``x``."""
    diag_l, diag_r = {}, {}
    hl = robust_hopf(MapField(m, "l", x, eps), p, q, seed=seed, n_samples=n_samples, diag=diag_l)
    hr = robust_hopf(MapField(m, "r", x, eps), p, q, seed=seed, n_samples=n_samples, diag=diag_r)
    diag = {f"l_{k}": v for k, v in diag_l.items()}
    diag.update({f"r_{k}": v for k, v in diag_r.items()})
    return -hl, hr, diag


def lambda_rho(m: MapExpr, x=(0.0, 0.0, 0.0, 0.0), eps="auto", *, p=P_DEFAULT, q=Q_DEFAULT,
               seed: int = 0, n_samples: int = DEFAULT_SAMPLES, check_isolated: bool = True,
               with_oracle: bool = True) -> InvariantReport:
    """Compute lambda and rho of ``m`` at ``x``.

    With ``eps="auto"`` the radius is halved from 0.5 until two successive
    radii (``eps`` and ``eps/2``) pass the isolatedness probe and give the
    same pair of integers; ``epsilon_used`` is the larger of the two.
    """
    x = np.asarray(x, float)
    diagnostics: dict = {}
    if eps == "auto" or eps is None:
        cache: dict[float, tuple | None] = {}

        def attempt(e):
            if e not in cache:
                cache[e] = None
                if check_isolated:
                    probe = isolatedness_probe(m, x, e, seed=seed)
                    if not probe.passed:
                        log.info("eps=%g: isolatedness probe failed (%.3g)", e, probe.min_residual)
                        return None
                try:
                    cache[e] = invariants_at(m, x, e, p=p, q=q, seed=seed, n_samples=n_samples)
                except NumericInstability as exc:
                    log.info("eps=%g: %s", e, exc)
            return cache[e]

        e = EPS_START
        found = None
        while e / 2 >= EPS_FLOOR:
            a, b = attempt(e), attempt(e / 2)
            if a is not None and b is not None and a[:2] == b[:2]:
                found = (e, a, b)
                break
            e /= 2
        if found is None:
            raise EpsilonUnstable(
                f"no two successive radii in [{EPS_FLOOR}, {EPS_START}] agree for {m.source}"
            )
        eps_used, (lam, rho, diag), (lam2, rho2, _) = found
        diagnostics.update(diag)
        diagnostics["radii_checked"] = sorted(cache, reverse=True)
        diagnostics["eps_half_lambda"], diagnostics["eps_half_rho"] = lam2, rho2
    else:
        eps_used = float(eps)
        if check_isolated:
            probe = isolatedness_probe(m, x, eps_used, seed=seed)
            diagnostics["probe_min_residual"] = probe.min_residual
            if not probe.passed:
                log.warning("isolatedness probe failed at eps=%g (min residual %.3g)",
                            eps_used, probe.min_residual)
        lam, rho, diag = invariants_at(m, x, eps_used, p=p, q=q, seed=seed, n_samples=n_samples)
        diagnostics.update(diag)
    mu_oracle = None
    if with_oracle and m.is_analytic:
        from .oracles import milnor_oracle

        try:
            mu_oracle = milnor_oracle(m, x, seed=seed)
        except NumericInstability as exc:
            diagnostics["oracle_error"] = str(exc)
    return InvariantReport(m.source, tuple(float(v) for v in x), eps_used, lam, rho, mu_oracle, diagnostics)


def mirror_map(m: MapExpr) -> MapExpr:
    """``m o conj``: precompose with quaternionic conjugation ``(z, w) -> (zb, -w)``.

    Quaternionic conjugation reverses the orientation of R^4, so the local
    link of the result is the mirror image of that of ``m``; it exchanges the
    left and right structures and hence swaps lambda and rho. (Post-composing
    with complex conjugation instead would only reverse the link.)
    """
    swap = {"z": "zb", "zb": "z", "w": "(-w)", "wb": "(-wb)"}
    tokens = re.split(r"\b(zb|wb|z|w)\b", m.source)
    return parse_map("".join(swap.get(t, t) for t in tokens))


def mirror_point(x) -> np.ndarray:
    """Image of ``x`` under quaternionic conjugation (where the mirrored map is studied)."""
    return np.asarray(x, float) * np.array([1.0, -1.0, -1.0, -1.0])
