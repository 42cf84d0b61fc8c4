"""Maps from the unit 3-sphere to S^2 whose Hopf invariants we compute.

Every field is a callable taking an ``(N, 4)`` array of unit vectors and
returning ``(N, 3)`` unit vectors in the (i, j, k) coordinates of the pure
quaternions.
"""

from __future__ import annotations

import numpy as np

from .polymap import MapExpr, l_star, r_star
from .quaternion import hopf_vectors, l_vectors, qmul, r_vectors

_J = np.array([0.0, 0.0, 1.0, 0.0])
_K = np.array([0.0, 0.0, 0.0, 1.0])


def _normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return v / n


class SphereField:
    name = "field"

    def vectors(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, U) -> np.ndarray:
        return _normalize(self.vectors(np.asarray(U, float)))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class HopfField(SphereField):
    name = "hopf"

    def vectors(self, U):
        return hopf_vectors(U)


class TangentJKField(SphereField):
    """l or r of the tangent plane field Q -> <jQ, kQ>."""

    def __init__(self, side: str):
        if side not in ("l", "r"):
            raise ValueError(side)
        self.side = side
        self.name = f"tangent-jk/{side}"

    def vectors(self, U):
        A = qmul(np.broadcast_to(_J, U.shape), U)
        B = qmul(np.broadcast_to(_K, U.shape), U)
        return l_vectors(A, B) if self.side == "l" else r_vectors(A, B)


class ConstantField(SphereField):
    def __init__(self, p):
        self.p = np.asarray(p, float) / np.linalg.norm(p)
        self.name = f"constant{tuple(np.round(self.p, 6))}"

    def vectors(self, U):
        return np.broadcast_to(self.p, U.shape[:-1] + (3,)).copy()


class Antipodal(SphereField):
    def __init__(self, inner: SphereField):
        self.inner = inner
        self.name = f"antipodal({inner.name})"

    def vectors(self, U):
        return -self.inner.vectors(U)


class MapField(SphereField):
    """``u -> l(<DF>)(x + eps u)`` or the r-analogue, for a polynomial map F."""

    def __init__(self, m: MapExpr, side: str, x=(0.0, 0.0, 0.0, 0.0), eps: float = 0.1):
        if side not in ("l", "r"):
            raise ValueError(side)
        self.m = m
        self.side = side
        self.x = np.asarray(x, float)
        self.eps = float(eps)
        self.name = f"{side}<D({m.source})>@eps={self.eps:g}"

    def vectors(self, U):
        Y = self.x + self.eps * U
        z = Y[..., 0] + 1j * Y[..., 1]
        w = Y[..., 2] + 1j * Y[..., 3]
        D = self.m.partials(z, w)
        return l_star(*D) if self.side == "l" else r_star(*D)


BUILTIN_FIELDS = {
    "hopf": HopfField,
    "antipodal-hopf": lambda: Antipodal(HopfField()),
    "tangent-jk": TangentJKField,
}
