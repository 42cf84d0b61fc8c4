"""Quaternion algebra, l and r of oriented 2-planes, and the Hopf map."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from milnorsplit.errors import DegenerateFrame, NotOnSphere
from milnorsplit.quaternion import (
    I,
    J,
    K,
    ONE,
    Quaternion,
    TwoFrame,
    UnitPureQuaternion,
    hopf_map,
    hopf_vectors,
    l_of_frame,
    l_vectors,
    qmul,
    quat_product,
    r_of_frame,
    r_vectors,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = st.tuples(finite, finite, finite, finite).map(lambda t: Quaternion(*t))


def frame_from(v):
    v = np.asarray(v, float)
    return TwoFrame(Quaternion.from_array(v[:4]), Quaternion.from_array(v[4:]))


# -- product -----------------------------------------------------------------


def test_defining_relations():
    assert quat_product(I, J).isclose(K)
    assert quat_product(J, K).isclose(I)
    assert quat_product(K, J).isclose(-I)
    for u in (I, J, K):
        assert quat_product(u, u).isclose(-ONE)
    assert quat_product(quat_product(I, J), K).isclose(-ONE)


def test_product_bilinear_example():
    assert quat_product(ONE + I, ONE + J).isclose(Quaternion(1, 1, 1, 1))


@given(quats, quats, quats)
def test_associative(x, y, z):
    lhs = quat_product(quat_product(x, y), z)
    rhs = quat_product(x, quat_product(y, z))
    assert np.allclose(lhs.to_array(), rhs.to_array(), atol=1e-9 * (1 + x.norm() * y.norm() * z.norm()))


@given(quats, quats)
def test_conj_antimultiplicative(x, y):
    lhs = quat_product(x, y).conj()
    rhs = quat_product(y.conj(), x.conj())
    assert np.allclose(lhs.to_array(), rhs.to_array(), atol=1e-9)


@given(quats, quats)
def test_norm_multiplicative(x, y):
    assert np.isclose(quat_product(x, y).norm(), x.norm() * y.norm(), rtol=1e-12, atol=1e-12)


def test_complex_identification():
    q = Quaternion.from_complex(1 + 2j, 3 + 4j)
    assert q.to_array().tolist() == [1, 2, 3, 4]
    assert q.to_complex() == (1 + 2j, 3 + 4j)
    # z + w j with w = 1 is j
    assert Quaternion.from_complex(0, 1).isclose(J)
    assert Quaternion.from_complex(0, 1j).isclose(K)


def test_vectorized_product_matches_scalar():
    rng = np.random.default_rng(1)
    X, Y = rng.normal(size=(2, 50, 4))
    P = qmul(X, Y)
    for x, y, p in zip(X, Y, P):
        assert np.allclose(quat_product(Quaternion(*x), Quaternion(*y)).to_array(), p)


def test_unit_pure_validation():
    u = UnitPureQuaternion(0, 0.6, 0.8, 0)
    assert quat_product(u, u).isclose(-ONE, tol=1e-10)
    with pytest.raises(ValueError):
        UnitPureQuaternion(0.1, 1, 0, 0)
    with pytest.raises(ValueError):
        UnitPureQuaternion(0, 2, 0, 0)


# -- l and r -------------------------------------------------------------------


@pytest.mark.parametrize(
    "A, B, l_exp, r_exp",
    [
        ((1, 0), (1j, 0), I, I),
        ((1, 0), (0, 1), J, J),
    ],
)
def test_l_r_complex_frames(A, B, l_exp, r_exp):
    f = TwoFrame.from_complex(A, B)
    assert l_of_frame(f).isclose(l_exp)
    assert r_of_frame(f).isclose(r_exp)


def test_l_r_of_jk():
    f = TwoFrame(J, K)
    assert l_of_frame(f).isclose(I)
    assert r_of_frame(f).isclose(-I)


def test_coordinate_formulas():
    # l = UP(conj(z1) z2 + conj(w1) w2, z1 w2 - w1 z2)
    # r = UP(conj(z1) z2 + w1 conj(w2), conj(z1) w2 - w1 conj(z2))
    rng = np.random.default_rng(2)
    for _ in range(100):
        z1, w1, z2, w2 = rng.normal(size=4) + 1j * rng.normal(size=4)
        f = TwoFrame.from_complex((z1, w1), (z2, w2))
        lq = Quaternion.from_complex(np.conj(z1) * z2 + np.conj(w1) * w2, z1 * w2 - w1 * z2).pure().normalized()
        rq = Quaternion.from_complex(np.conj(z1) * z2 + w1 * np.conj(w2), np.conj(z1) * w2 - w1 * np.conj(z2))
        rq = rq.pure().normalized()
        assert l_of_frame(f).isclose(lq, tol=1e-10)
        assert r_of_frame(f).isclose(rq, tol=1e-10)


def test_degenerate_frames():
    with pytest.raises(DegenerateFrame):
        TwoFrame(I, 2 * I)
    with pytest.raises(DegenerateFrame):
        TwoFrame(ONE, ONE + 1e-7 * J)


@settings(max_examples=50)
@given(st.lists(finite, min_size=8, max_size=8), st.integers(0, 2**32 - 1))
def test_frame_invariance(v, seed):
    try:
        f = frame_from(v)
    except DegenerateFrame:
        return
    A, B = f.A.to_array(), f.B.to_array()
    if np.linalg.svd(np.stack([A, B]), compute_uv=False)[-1] < 1e-3:
        return
    l0, r0 = l_of_frame(f).vector, r_of_frame(f).vector
    rng = np.random.default_rng(seed)
    n = 0
    while n < 100:
        M = rng.normal(size=(2, 2))
        if abs(np.linalg.det(M)) < 1e-2:
            continue
        if np.linalg.det(M) < 0:
            M[0] *= -1
        n += 1
        g = TwoFrame(Quaternion(*(M[0, 0] * A + M[0, 1] * B)), Quaternion(*(M[1, 0] * A + M[1, 1] * B)))
        assert np.allclose(l_of_frame(g).vector, l0, atol=1e-10)
        assert np.allclose(r_of_frame(g).vector, r0, atol=1e-10)


@given(st.lists(finite, min_size=8, max_size=8))
def test_orientation_reversal(v):
    try:
        f = frame_from(v)
    except DegenerateFrame:
        return
    s = f.swapped()
    assert np.allclose(l_of_frame(s).vector, -l_of_frame(f).vector, atol=1e-12)
    assert np.allclose(r_of_frame(s).vector, -r_of_frame(f).vector, atol=1e-12)


@given(st.lists(finite, min_size=8, max_size=8))
def test_outputs_are_unit_pure(v):
    try:
        f = frame_from(v)
    except DegenerateFrame:
        return
    for q in (l_of_frame(f), r_of_frame(f)):
        assert abs(q.a) < 1e-12
        assert abs(q.norm() - 1) < 1e-12


def test_vectorized_l_r_match():
    rng = np.random.default_rng(3)
    A, B = rng.normal(size=(2, 40, 4))
    Lv = l_vectors(A, B)
    Rv = r_vectors(A, B)
    for a, b, lv, rv in zip(A, B, Lv, Rv):
        f = TwoFrame(Quaternion(*a), Quaternion(*b))
        assert np.allclose(lv / np.linalg.norm(lv), l_of_frame(f).vector)
        assert np.allclose(rv / np.linalg.norm(rv), r_of_frame(f).vector)


# -- Hopf map ------------------------------------------------------------------


def test_hopf_examples():
    assert hopf_map(Quaternion.from_complex(1, 0)).isclose(I)
    assert hopf_map(Quaternion.from_complex(0, 1)).isclose(-I)
    s = 1 / np.sqrt(2)
    assert hopf_map(Quaternion.from_complex(s, s)).isclose(K)


def test_hopf_requires_unit():
    with pytest.raises(NotOnSphere):
        hopf_map(Quaternion(1.0 + 1e-6, 0, 0, 0))


def test_hopf_fiber_invariance():
    rng = np.random.default_rng(4)
    U = rng.normal(size=(1000, 4))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    z, w = U[:, 0] + 1j * U[:, 1], U[:, 2] + 1j * U[:, 3]
    u = np.exp(2j * np.pi * rng.random(1000))
    zu, wu = z * u, w * u
    V = np.stack([zu.real, zu.imag, wu.real, wu.imag], axis=1)
    assert np.allclose(hopf_vectors(U), hopf_vectors(V), atol=1e-12)
    assert np.allclose(np.linalg.norm(hopf_vectors(U), axis=1), 1, atol=1e-12)
