"""Quaternions, 2-frames and the Grassmannian maps ``l`` and ``r``.

Coordinates follow the identification of H with C^2 given by
``(z, w) <-> z + w j``, i.e. ``(a + b i, c + d i) <-> a + b i + c j + d k``.
Every oriented 2-plane in R^4 is a complex line for exactly one left
structure ``L_p`` and one right structure ``R_p`` (``p`` a unit pure
quaternion); :func:`l_of_frame` and :func:`r_of_frame` return those ``p``.

The array helpers at the bottom work on ``(..., 4)`` arrays and are what the
numeric modules use; the :class:`Quaternion` value type is the public face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, NotOnSphere

GRAM_TOL = 1e-10
PURE_TOL = 1e-12


@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_complex(cls, z: complex, w: complex = 0) -> Quaternion:
        z, w = complex(z), complex(w)
        return cls(z.real, z.imag, w.real, w.imag)

    @classmethod
    def from_array(cls, v) -> Quaternion:
        a, b, c, d = (float(x) for x in v)
        return cls(a, b, c, d)

    def to_complex(self) -> tuple[complex, complex]:
        return complex(self.a, self.b), complex(self.c, self.d)

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def __add__(self, other):
        return Quaternion(*(x + y for x, y in zip(self, _coerce(other))))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion(*(x - y for x, y in zip(self, _coerce(other))))

    def __neg__(self):
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(*(x * other for x in self))
        return quat_product(self, _coerce(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion(*(x * other for x in self))
        return quat_product(_coerce(other), self)

    def conj(self) -> Quaternion:
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def pure(self) -> Quaternion:
        return Quaternion(0.0, self.b, self.c, self.d)

    def norm(self) -> float:
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    def normalized(self) -> Quaternion:
        n = self.norm()
        return Quaternion(*(x / n for x in self))

    def inverse(self) -> Quaternion:
        n2 = self.norm() ** 2
        return Quaternion(self.a / n2, -self.b / n2, -self.c / n2, -self.d / n2)

    def isclose(self, other, tol=1e-12) -> bool:
        return max(abs(x - y) for x, y in zip(self, _coerce(other))) <= tol


@dataclass(frozen=True)
class UnitPureQuaternion(Quaternion):
    """A point of S^2, i.e. a square root of -1 in H."""

    def __post_init__(self):
        if abs(self.a) > PURE_TOL or abs(self.norm() - 1.0) > PURE_TOL:
            raise ValueError(f"not a unit pure quaternion: {tuple(self)}")

    @classmethod
    def from_vector(cls, v) -> UnitPureQuaternion:
        """Normalize a 3-vector of (i, j, k) coefficients onto S^2."""
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(0.0, float(v[0]), float(v[1]), float(v[2]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d])


ONE = Quaternion(1.0)
I = UnitPureQuaternion(0.0, 1.0, 0.0, 0.0)
J = UnitPureQuaternion(0.0, 0.0, 1.0, 0.0)
K = UnitPureQuaternion(0.0, 0.0, 0.0, 1.0)


def _coerce(x) -> Quaternion:
    if isinstance(x, Quaternion):
        return x
    if isinstance(x, (int, float)):
        return Quaternion(float(x))
    if isinstance(x, complex):
        return Quaternion.from_complex(x)
    return Quaternion.from_array(x)


def quat_product(x: Quaternion, y: Quaternion) -> Quaternion:
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


@dataclass(frozen=True)
class TwoFrame:
    A: Quaternion
    B: Quaternion

    def __post_init__(self):
        A, B = _coerce(self.A), _coerce(self.B)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if gram_determinant(A.to_array(), B.to_array()) < GRAM_TOL:
            raise DegenerateFrame("frame vectors are (nearly) linearly dependent")

    @classmethod
    def from_complex(cls, A: tuple[complex, complex], B: tuple[complex, complex]):
        return cls(Quaternion.from_complex(*A), Quaternion.from_complex(*B))

    def swapped(self) -> TwoFrame:
        return TwoFrame(self.B, self.A)


def gram_determinant(A, B) -> float:
    A, B = np.asarray(A, float), np.asarray(B, float)
    return float(A @ A * (B @ B) - (A @ B) ** 2)


def _unit_pure(q: Quaternion) -> UnitPureQuaternion:
    v = np.array([q.b, q.c, q.d])
    n = np.linalg.norm(v)
    if n < PURE_TOL:
        raise DegenerateFrame("pure part vanishes")
    return UnitPureQuaternion(0.0, *(v / n).tolist())


def l_of_frame(f: TwoFrame) -> UnitPureQuaternion:
    """The ``p`` for which span(A, B) is a complex line of ``L_p``: UP(B conj A)."""
    return _unit_pure(f.B * f.A.conj())


def r_of_frame(f: TwoFrame) -> UnitPureQuaternion:
    """The ``p`` for which span(A, B) is a complex line of ``R_p``: UP(conj(A) B)."""
    return _unit_pure(f.A.conj() * f.B)


def hopf_map(q: Quaternion) -> UnitPureQuaternion:
    """``(z, w) -> ((|z|^2 - |w|^2) i, 2 i z conj(w))`` read back through C^2 = H."""
    q = _coerce(q)
    if abs(q.norm() - 1.0) > 1e-9:
        raise NotOnSphere(f"|q| = {q.norm()!r}")
    z, w = q.to_complex()
    second = 2j * z * w.conjugate()
    return UnitPureQuaternion.from_vector(
        [abs(z) ** 2 - abs(w) ** 2, second.real, second.imag]
    )


# -- array helpers -----------------------------------------------------------


def qmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Batched quaternion product over the last axis."""
    a1, b1, c1, d1 = np.moveaxis(np.asarray(x, float), -1, 0)
    a2, b2, c2, d2 = np.moveaxis(np.asarray(y, float), -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def qconj(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, float) * np.array([1.0, -1.0, -1.0, -1.0])


def l_vectors(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Unnormalized pure parts of ``B conj(A)`` as ``(..., 3)`` arrays."""
    return qmul(B, qconj(A))[..., 1:]


def r_vectors(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return qmul(qconj(A), B)[..., 1:]


def hopf_vectors(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, float)
    z = U[..., 0] + 1j * U[..., 1]
    w = U[..., 2] + 1j * U[..., 3]
    s = 2j * z * np.conj(w)
    return np.stack([np.abs(z) ** 2 - np.abs(w) ** 2, s.real, s.imag], axis=-1)


def tangent_basis(U: np.ndarray) -> np.ndarray:
    """Positively oriented orthonormal frames ``(iU, jU, kU)`` of T_U S^3.

    Returns shape ``(..., 3, 4)``. ``(U, iU, jU, kU)`` is right multiplication
    of the standard basis by ``U`` and hence lies in SO(4), so with the
    outward-normal-first convention the triple is positive on S^3.
    """
    U = np.asarray(U, float)
    units = np.eye(4)[1:]
    return np.stack([qmul(np.broadcast_to(e, U.shape), U) for e in units], axis=-2)
